//! The ULTraS data model: labelled transitions into sets of weight
//! functions, together with the constrained classes (functional, Segala,
//! generative, reactive) and the correspondence with weighted LTSs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{Debug, Display, Write as _};

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::monoid::{Monoid, MonoidError, Weight};
use crate::weightfn::WeightFunction;

pub type Label = String;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("state {0} lies on the unexplored boundary")]
    OnBoundary(String),
    #[error("system is only partially explored ({0} boundary states); explore fully first")]
    Unexplored(usize),
    #[error("monoids differ: {0} vs {1}")]
    MonoidMismatch(String, String),
    #[error("label sets differ")]
    LabelMismatch,
    #[error("operation requires monoid rat-plus, found {0}")]
    WrongMonoid(String),
    #[error("system is not functional at ({0}, {1})")]
    NotFunctional(String, String),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

/// A finite fragment of a uniform labelled transition system.
///
/// Each `(state, label)` maps to a finite set of weight functions. An
/// absent (or empty) set means the state is *stuck* on that label; a set
/// holding the zero function means it is *terminal*. States in the
/// boundary were discovered but not explored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ultras<S: Ord> {
    monoid: Monoid,
    labels: BTreeSet<Label>,
    states: BTreeSet<S>,
    boundary: BTreeSet<S>,
    trans: BTreeMap<S, BTreeMap<Label, BTreeSet<WeightFunction<S>>>>,
}

impl<S: Ord + Clone + Debug> Ultras<S> {
    pub fn new<L: Into<Label>>(monoid: Monoid, labels: impl IntoIterator<Item = L>) -> Self {
        Ultras {
            monoid,
            labels: labels.into_iter().map(Into::into).collect(),
            states: BTreeSet::new(),
            boundary: BTreeSet::new(),
            trans: BTreeMap::new(),
        }
    }

    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    /// Explored states.
    pub fn states(&self) -> &BTreeSet<S> {
        &self.states
    }

    pub fn boundary(&self) -> &BTreeSet<S> {
        &self.boundary
    }

    pub fn is_fully_explored(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn add_state(&mut self, s: S) {
        if !self.boundary.contains(&s) {
            self.states.insert(s);
        }
    }

    /// Moves `s` to the unexplored boundary.
    pub fn mark_boundary(&mut self, s: S) -> Result<(), SystemError> {
        if self.trans.contains_key(&s) {
            return Err(SystemError::OnBoundary(format!("{s:?}")));
        }
        self.states.remove(&s);
        self.boundary.insert(s);
        Ok(())
    }

    /// Adds `s -[label]-> rho`. States in the support that are not yet known
    /// become explored states.
    pub fn add_transition(
        &mut self,
        s: S,
        label: &str,
        rho: WeightFunction<S>,
    ) -> Result<(), SystemError> {
        if !self.labels.contains(label) {
            return Err(SystemError::UnknownLabel(label.into()));
        }
        if self.boundary.contains(&s) {
            return Err(SystemError::OnBoundary(format!("{s:?}")));
        }
        for (_, w) in rho.iter() {
            if !self.monoid.contains(w) {
                return Err(MonoidError::NotInCarrier(format!("{w:?}"), self.monoid.name().into()).into());
            }
        }
        for t in rho.support_iter() {
            if !self.boundary.contains(t) {
                self.states.insert(t.clone());
            }
        }
        self.states.insert(s.clone());
        self.trans
            .entry(s)
            .or_default()
            .entry(label.to_string())
            .or_default()
            .insert(rho);
        Ok(())
    }

    /// The transition set of `(s, label)`; empty when stuck.
    pub fn transitions(&self, s: &S, label: &str) -> impl Iterator<Item = &WeightFunction<S>> {
        self.trans
            .get(s)
            .and_then(|m| m.get(label))
            .into_iter()
            .flatten()
    }

    pub fn transition_set(&self, s: &S, label: &str) -> BTreeSet<WeightFunction<S>> {
        self.transitions(s, label).cloned().collect()
    }

    pub fn is_stuck(&self, s: &S, label: &str) -> bool {
        self.transitions(s, label).next().is_none()
    }

    pub fn is_terminal(&self, s: &S, label: &str) -> bool {
        self.transitions(s, label).any(|rho| rho.is_zero())
    }

    /// All `(state, label, function)` triples, in order.
    pub fn iter_transitions(&self) -> impl Iterator<Item = (&S, &Label, &WeightFunction<S>)> {
        self.trans.iter().flat_map(|(s, by_label)| {
            by_label
                .iter()
                .flat_map(move |(a, set)| set.iter().map(move |rho| (s, a, rho)))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.iter_transitions().count()
    }

    fn require_explored(&self) -> Result<(), SystemError> {
        if self.boundary.is_empty() {
            Ok(())
        } else {
            Err(SystemError::Unexplored(self.boundary.len()))
        }
    }

    /// Exactly one weight function per state and label.
    pub fn is_functional(&self) -> Result<bool, SystemError> {
        self.require_explored()?;
        Ok(self.first_non_functional().is_none())
    }

    fn first_non_functional(&self) -> Option<(&S, &Label)> {
        for s in &self.states {
            for a in &self.labels {
                if self.transitions(s, a).count() != 1 {
                    return Some((s, a));
                }
            }
        }
        None
    }

    /// `f` is a homomorphism iff for every state and label, pushing the
    /// transition set of `x` forward along `f` yields that of `f(x)`.
    pub fn check_homomorphism<T: Ord + Clone + Debug>(
        &self,
        target: &Ultras<T>,
        f: &BTreeMap<S, T>,
    ) -> Result<bool, SystemError> {
        if self.monoid != target.monoid {
            return Err(SystemError::MonoidMismatch(
                self.monoid.name().into(),
                target.monoid.name().into(),
            ));
        }
        if self.labels != target.labels {
            return Err(SystemError::LabelMismatch);
        }
        self.require_explored()?;
        target.require_explored()?;
        for x in &self.states {
            let fx = f
                .get(x)
                .ok_or_else(|| SystemError::UnknownState(format!("{x:?}")))?;
            if !target.states.contains(fx) {
                return Err(SystemError::UnknownState(format!("{fx:?}")));
            }
            for a in &self.labels {
                let mut image = BTreeSet::new();
                for rho in self.transitions(x, a) {
                    let pushed = rho
                        .pushforward(&self.monoid, |s| f.get(s).cloned())
                        .map_err(|e| SystemError::UnknownState(e.to_string()))?;
                    image.insert(pushed);
                }
                if image != target.transition_set(fx, a) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn require_rat_plus(&self) -> Result<(), SystemError> {
        if self.monoid == Monoid::RatPlus {
            Ok(())
        } else {
            Err(SystemError::WrongMonoid(self.monoid.name().into()))
        }
    }

    /// Every weight function is a probability distribution.
    pub fn check_segala(&self) -> Result<bool, SystemError> {
        self.require_rat_plus()?;
        let one = Weight::int(1);
        Ok(self
            .iter_transitions()
            .all(|(_, _, rho)| rho.total_weight(&self.monoid) == one))
    }

    /// Functional, and every total weight is 0 or 1.
    pub fn check_generative(&self) -> Result<bool, SystemError> {
        self.require_rat_plus()?;
        if !self.is_functional()? {
            return Ok(false);
        }
        Ok(self
            .iter_transitions()
            .all(|(_, _, rho)| is_zero_or_one(&rho.total_weight(&self.monoid))))
    }

    /// Per state and label, the totals of all outgoing functions sum to 0 or 1.
    pub fn check_reactive(&self) -> Result<bool, SystemError> {
        self.require_rat_plus()?;
        for s in &self.states {
            for a in &self.labels {
                let totals: Vec<Weight> = self
                    .transitions(s, a)
                    .map(|rho| rho.total_weight(&self.monoid))
                    .collect();
                if !is_zero_or_one(&self.monoid.sum(&totals)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The weighted LTS of a functional system.
    pub fn to_wlts(&self) -> Result<Wlts<S>, SystemError> {
        self.require_explored()?;
        if let Some((s, a)) = self.first_non_functional() {
            return Err(SystemError::NotFunctional(format!("{s:?}"), a.clone()));
        }
        let mut w = Wlts::new(self.monoid.clone(), self.labels.iter().cloned());
        for s in &self.states {
            w.add_state(s.clone());
            for a in &self.labels {
                let rho = self.transitions(s, a).next().expect("functional");
                w.set_row(s.clone(), a, rho.clone())?;
            }
        }
        Ok(w)
    }

    pub fn from_wlts(w: &Wlts<S>) -> Self {
        let mut u = Ultras::new(w.monoid.clone(), w.labels.iter().cloned());
        for s in &w.states {
            for a in &w.labels {
                u.add_transition(s.clone(), a, w.row(s, a))
                    .expect("wlts rows are valid");
            }
        }
        u
    }

    /// Restriction to `keep`: transitions of other states are dropped and
    /// they move to the boundary if still referenced.
    pub fn restrict(&self, keep: &BTreeSet<S>) -> Self {
        let mut u = Ultras::new(self.monoid.clone(), self.labels.iter().cloned());
        for s in keep {
            if self.states.contains(s) {
                u.add_state(s.clone());
            }
        }
        for (s, a, rho) in self.iter_transitions() {
            if keep.contains(s) {
                u.add_transition(s.clone(), a, rho.clone()).expect("valid");
            }
        }
        let dangling: Vec<S> = u
            .states
            .iter()
            .filter(|s| !keep.contains(*s) || !self.states.contains(*s))
            .cloned()
            .collect();
        for s in dangling {
            u.mark_boundary(s).expect("no transitions");
        }
        u
    }

    /// Renames states along `f`, which should be injective; functions are
    /// pushed forward, so a non-injective `f` merges weights.
    pub fn map_states<T: Ord + Clone + Debug>(&self, f: impl Fn(&S) -> T) -> Ultras<T> {
        let mut u = Ultras::new(self.monoid.clone(), self.labels.iter().cloned());
        for s in &self.states {
            u.add_state(f(s));
        }
        for (s, a, rho) in self.iter_transitions() {
            u.add_transition(f(s), a, rho.map(&self.monoid, &f)).expect("same labels and monoid");
        }
        for s in &self.boundary {
            u.mark_boundary(f(s)).expect("boundary states have no transitions");
        }
        u
    }
}

fn is_zero_or_one(w: &Weight) -> bool {
    matches!(w, Weight::Rat(q) if q.is_zero() || q.is_one())
}

impl<S: Ord + Clone + Debug + Display> Ultras<S> {
    /// Line-oriented text dump with sorted states, labels and functions.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.monoid;
        writeln!(out, "monoid {}", m.name()).unwrap();
        let labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        writeln!(out, "labels {}", labels.join(" ")).unwrap();
        for s in &self.states {
            writeln!(out, "state {s}").unwrap();
        }
        for s in &self.boundary {
            writeln!(out, "boundary {s}").unwrap();
        }
        for (s, a, rho) in self.iter_transitions() {
            writeln!(out, "trans {s} -[{a}]-> {}", rho.format(m)).unwrap();
        }
        out
    }

    /// Key-sorted JSON document.
    pub fn to_structured(&self) -> Value {
        let m = &self.monoid;
        let mut transitions = Vec::new();
        for (s, by_label) in &self.trans {
            for (a, set) in by_label {
                let functions: Vec<Value> = set.iter().map(|rho| function_json(m, rho)).collect();
                transitions.push(json!({
                    "source": s.to_string(),
                    "label": a,
                    "functions": functions,
                }));
            }
        }
        json!({
            "monoid": m.name(),
            "labels": self.labels.iter().collect::<Vec<_>>(),
            "states": self.states.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "boundary": self.boundary.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "transitions": transitions,
        })
    }

    /// `digraph` text. Each weight function is a point node between the
    /// source state and the states in its support.
    pub fn to_dot(&self) -> String {
        let m = &self.monoid;
        let ids: BTreeMap<&S, usize> = self
            .states
            .iter()
            .chain(self.boundary.iter())
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let mut out = String::from("digraph ultras {\n");
        for (s, i) in &ids {
            let shape = if self.boundary.contains(*s) { "box" } else { "ellipse" };
            writeln!(out, "  s{i} [label={}, shape={shape}];", dot_quote(&s.to_string())).unwrap();
        }
        for (k, (s, a, rho)) in self.iter_transitions().enumerate() {
            writeln!(out, "  f{k} [shape=point];").unwrap();
            writeln!(out, "  s{} -> f{k} [label={}];", ids[s], dot_quote(a)).unwrap();
            for (t, w) in rho.iter() {
                writeln!(out, "  f{k} -> s{} [label={}];", ids[t], dot_quote(&m.format_weight(w)))
                    .unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

fn function_json<S: Ord + Clone + Display>(m: &Monoid, rho: &WeightFunction<S>) -> Value {
    let mut obj = Map::new();
    for (t, w) in rho.iter() {
        obj.insert(t.to_string(), Value::String(m.format_weight(w)));
    }
    Value::Object(obj)
}

pub(crate) fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// A weighted LTS `(X, A, rho)` stored sparsely: only non-zero rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wlts<S: Ord> {
    monoid: Monoid,
    labels: BTreeSet<Label>,
    states: BTreeSet<S>,
    rows: BTreeMap<(S, Label), WeightFunction<S>>,
}

impl<S: Ord + Clone + Debug> Wlts<S> {
    pub fn new<L: Into<Label>>(monoid: Monoid, labels: impl IntoIterator<Item = L>) -> Self {
        Wlts {
            monoid,
            labels: labels.into_iter().map(Into::into).collect(),
            states: BTreeSet::new(),
            rows: BTreeMap::new(),
        }
    }

    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn states(&self) -> &BTreeSet<S> {
        &self.states
    }

    pub fn add_state(&mut self, s: S) {
        self.states.insert(s);
    }

    /// Sets `rho(s, label, -)`; targets become states.
    pub fn set_row(&mut self, s: S, label: &str, row: WeightFunction<S>) -> Result<(), SystemError> {
        if !self.labels.contains(label) {
            return Err(SystemError::UnknownLabel(label.into()));
        }
        for (t, w) in row.iter() {
            if !self.monoid.contains(w) {
                return Err(MonoidError::NotInCarrier(format!("{w:?}"), self.monoid.name().into()).into());
            }
            self.states.insert(t.clone());
        }
        self.states.insert(s.clone());
        let key = (s, label.to_string());
        if row.is_zero() {
            self.rows.remove(&key);
        } else {
            self.rows.insert(key, row);
        }
        Ok(())
    }

    pub fn set_weight(&mut self, s: S, label: &str, t: S, w: Weight) -> Result<(), SystemError> {
        let mut pairs: Vec<(S, Weight)> = self
            .row(&s, label)
            .iter()
            .filter(|(k, _)| **k != t)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        pairs.push((t, w));
        let row = WeightFunction::try_from_pairs(&self.monoid, pairs)?;
        self.set_row(s, label, row)
    }

    /// The row `rho(s, label, -)`; zero when absent.
    pub fn row(&self, s: &S, label: &str) -> WeightFunction<S> {
        self.rows
            .get(&(s.clone(), label.to_string()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn weight(&self, s: &S, label: &str, t: &S) -> Weight {
        self.rows
            .get(&(s.clone(), label.to_string()))
            .map(|r| r.weight(&self.monoid, t))
            .unwrap_or_else(|| self.monoid.zero())
    }

    /// Restriction of rows to the sources in `keep`.
    pub fn restrict_sources(&self, keep: &BTreeSet<S>) -> Self {
        let mut w = Wlts::new(self.monoid.clone(), self.labels.iter().cloned());
        for s in keep {
            if self.states.contains(s) {
                w.add_state(s.clone());
            }
        }
        for ((s, a), row) in &self.rows {
            if keep.contains(s) {
                w.set_row(s.clone(), a, row.clone()).expect("valid");
            }
        }
        w
    }
}
