//! Compilation of Segala-GSOS and W-GSOS rules into WF-GSOS
//! specifications, and a direct semantics of W-GSOS used as an oracle.
//!
//! `.wgsos` files:
//!
//! ```text
//! monoid nat-plus
//! labels a b
//! sig nil/0 f/1 g/2
//! rule f(x) -[a, 2*u]-> g(y, x) when x =[a]=> 3, x -[a, u]-> y
//! ```
//!
//! `x =[a]=> w` says the total `a`-weight of `x` is `w`; `x -[b, u]-> y`
//! binds a `b`-successor `y` of `x` with weight `u`. The weight of the
//! conclusion is a product of all weight variables, optionally times a
//! constant.
//!
//! `.sgsos` files (rational probabilities):
//!
//! ```text
//! labels a
//! sig nil/0 f/1 g/2
//! rule f(x) -[a]-> 1/2 * g(phi#1, phi#2) + 1/2 * nil when x -[a]-> phi, phi => y
//! ```
//!
//! `phi#k` is the `k`-th colour of the distribution variable `phi`, an
//! independent sample from it; plain `phi` is colour 0.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::BigRational;
use thiserror::Error;

use crate::monoid::{Club, Monoid, Weight};
use crate::system::{Label, Ultras, Wlts};
use crate::weightfn::WeightFunction;
use crate::wfgsos::rule::TotalPremise;
use crate::wfgsos::term::{split_top_level, Scanner};
use crate::wfgsos::{
    parse_term, Combinator, Fun, Hole, Interpretation, ParseError, Rule, Signature, Specification, Term, WTerm, WfError,
};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid rules: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{count} rules for `{op}` on `{label}` exceed the supported {max}")]
    TooManyRules { op: String, label: Label, count: usize, max: usize },
    #[error("generated name `{0}` clashes with the process signature")]
    NameClash(String),
    #[error(transparent)]
    Wf(#[from] WfError),
}

/// `x =[a]=> w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightPremise {
    pub arg: usize,
    pub label: Label,
    pub weight: Weight,
}

/// `x -[b, u]-> y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransPremise {
    pub arg: usize,
    pub label: Label,
    pub u: String,
    pub y: String,
}

/// A W-GSOS rule whose weight function is `coeff * u_1 * ... * u_m`
/// (`coeff` defaults to the unit of multiplication and is required when
/// `m = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WgsosRule {
    pub op: String,
    pub args: Vec<String>,
    pub label: Label,
    pub weights: Vec<WeightPremise>,
    pub transitions: Vec<TransPremise>,
    pub coeff: Option<Weight>,
    pub target: Term,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WgsosSpec {
    pub monoid: Monoid,
    pub labels: BTreeSet<Label>,
    pub sig: Signature,
    pub rules: Vec<WgsosRule>,
}

impl WgsosRule {
    fn beta(&self, m: &Monoid, us: &[&Weight]) -> Result<Weight, WfError> {
        let mut acc = self.coeff.clone();
        for u in us {
            acc = Some(match acc {
                None => (*u).clone(),
                Some(a) => m.mul(&a, u)?,
            });
        }
        Ok(acc.expect("validated: constant rules carry a coefficient"))
    }

    fn weight_of(&self, i: usize, a: &str) -> Option<&Weight> {
        self.weights.iter().find(|w| w.arg == i && w.label == a).map(|w| &w.weight)
    }

    pub fn format(&self, m: &Monoid) -> String {
        let mut beta: Vec<String> = self.coeff.iter().map(|c| m.format_weight(c)).collect();
        beta.extend(self.transitions.iter().map(|t| t.u.clone()));
        let mut prem: Vec<String> = self
            .weights
            .iter()
            .map(|w| format!("{} =[{}]=> {}", self.args[w.arg], w.label, m.format_weight(&w.weight)))
            .collect();
        prem.extend(self.transitions.iter().map(|t| format!("{} -[{}, {}]-> {}", self.args[t.arg], t.label, t.u, t.y)));
        let src = Term::app(&self.op, self.args.iter().map(|a| Term::var(a)).collect());
        let mut out = format!("{src} -[{}, {}]-> {}", self.label, beta.join("*"), self.target);
        if !prem.is_empty() {
            out.push_str(" when ");
            out.push_str(&prem.join(", "));
        }
        out
    }
}

impl WgsosSpec {
    /// Well-formedness: known operators and labels, distinct variables,
    /// nonzero weight premises for every transition premise, targets over
    /// `X` and `Y` using every `y`, and a weight function in the
    /// supported family.
    pub fn validate(&self) -> Vec<String> {
        let m = &self.monoid;
        let mut out = Vec::new();
        for (n, r) in self.rules.iter().enumerate() {
            let mut d = |s: String| out.push(format!("rule {}: {s}", n + 1));
            if self.sig.arity(&r.op) != Some(r.args.len()) {
                d(format!("`{}` with {} arguments is not in the signature", r.op, r.args.len()));
            }
            let labels = std::iter::once(&r.label)
                .chain(r.weights.iter().map(|w| &w.label))
                .chain(r.transitions.iter().map(|t| &t.label));
            for l in labels {
                if !self.labels.contains(l) {
                    d(format!("unknown label `{l}`"));
                }
            }
            let mut seen = BTreeSet::new();
            for v in r.args.iter().chain(r.transitions.iter().flat_map(|t| [&t.u, &t.y])) {
                if !seen.insert(v) {
                    d(format!("variable `{v}` bound twice"));
                }
            }
            let mut consts: BTreeMap<(usize, &str), &Weight> = BTreeMap::new();
            for w in &r.weights {
                if w.arg >= r.args.len() {
                    d(format!("premise on argument {}", w.arg + 1));
                }
                if !m.contains(&w.weight) {
                    d(format!("weight {:?} outside {}", w.weight, m.name()));
                }
                if consts.insert((w.arg, w.label.as_str()), &w.weight).is_some() {
                    d(format!("two weight premises for `{}` on `{}`", r.args.get(w.arg).map_or("?", |s| s), w.label));
                }
            }
            for t in &r.transitions {
                match r.weight_of(t.arg, &t.label) {
                    Some(w) if !m.is_zero(w) => {}
                    _ => d(format!("transition premise for `{}` needs a nonzero weight premise on `{}`", t.y, t.label)),
                }
            }
            let xs: BTreeSet<&str> = r.args.iter().map(String::as_str).collect();
            let ys: BTreeSet<&str> = r.transitions.iter().map(|t| t.y.as_str()).collect();
            let vars = r.target.vars();
            for y in &ys {
                if !vars.contains(*y) {
                    d(format!("`{y}` does not occur in the target"));
                }
            }
            for v in &vars {
                if !xs.contains(v.as_str()) && !ys.contains(v.as_str()) {
                    d(format!("target variable `{v}` is unbound"));
                }
            }
            if let Err(e) = r.target.check(&self.sig) {
                d(format!("target: {e}"));
            }
            let factors = r.transitions.len() + usize::from(r.coeff.is_some());
            if factors == 0 {
                d("a rule without transition premises needs a constant weight".into());
            }
            if factors > 1 && !m.has_multiplication() {
                d(format!("{} has no multiplication for the weight product", m.name()));
            }
            if let Some(c) = &r.coeff {
                if !m.contains(c) {
                    d(format!("coefficient {c:?} outside {}", m.name()));
                }
            }
        }
        out
    }
}

// ------------------------------------------------------------- oracle

struct WgsosEval<'a> {
    spec: &'a WgsosSpec,
    memo: BTreeMap<Term, BTreeMap<Label, Fun>>,
}

impl WgsosEval<'_> {
    fn rows(&mut self, p: &Term) -> Result<BTreeMap<Label, Fun>, WfError> {
        if let Some(r) = self.memo.get(p) {
            return Ok(r.clone());
        }
        let m = &self.spec.monoid;
        let op = p.op().ok_or_else(|| WfError::NotGround(p.to_string()))?;
        let args = p.args();
        let subs: Vec<BTreeMap<Label, Fun>> = args.iter().map(|a| self.rows(a)).collect::<Result<_, _>>()?;
        let row = |i: usize, a: &str| subs[i].get(a).cloned().unwrap_or_default();
        let mut acc: BTreeMap<Label, Vec<(Term, Weight)>> = BTreeMap::new();
        for r in self.spec.rules.iter().filter(|r| r.op == op && r.args.len() == args.len()) {
            if !r.weights.iter().all(|w| row(w.arg, &w.label).total_weight(m) == w.weight) {
                continue;
            }
            let choices: Vec<Vec<(Term, Weight)>> = r
                .transitions
                .iter()
                .map(|t| row(t.arg, &t.label).iter().map(|(s, w)| (s.clone(), w.clone())).collect())
                .collect();
            let mut sigma: BTreeMap<String, Term> = r.args.iter().cloned().zip(args.iter().cloned()).collect();
            let mut idx = vec![0usize; choices.len()];
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            loop {
                let mut us = Vec::with_capacity(idx.len());
                for (k, t) in r.transitions.iter().enumerate() {
                    let (s, w) = &choices[k][idx[k]];
                    sigma.insert(t.y.clone(), s.clone());
                    us.push(w);
                }
                let w = r.beta(m, &us)?;
                acc.entry(r.label.clone()).or_default().push((r.target.substitute(&sigma), w));
                let mut k = idx.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < choices[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX || idx.is_empty() {
                    break;
                }
            }
        }
        let out: BTreeMap<Label, Fun> = acc
            .into_iter()
            .map(|(a, pairs)| (a, WeightFunction::from_pairs(m, pairs)))
            .filter(|(_, f)| !f.is_zero())
            .collect();
        self.memo.insert(p.clone(), out.clone());
        Ok(out)
    }
}

/// The weighted LTS of a W-GSOS specification over ground terms reachable
/// from `roots`: the weight of `p -[c]-> t` is the sum of `beta` over all
/// triggered rule instances with target `t`. At most `budget` states get
/// rows; the rest only appear as targets.
pub fn wgsos_semantics(spec: &WgsosSpec, roots: &BTreeSet<Term>, budget: usize) -> Result<Wlts<Term>, WfError> {
    let mut ev = WgsosEval { spec, memo: BTreeMap::new() };
    let mut w = Wlts::new(spec.monoid.clone(), spec.labels.iter().cloned());
    let mut seen: BTreeSet<Term> = roots.clone();
    let mut queue: VecDeque<Term> = roots.iter().cloned().collect();
    let mut explored = 0;
    while let Some(p) = queue.pop_front() {
        if explored == budget {
            w.add_state(p);
            for rest in queue {
                w.add_state(rest);
            }
            break;
        }
        explored += 1;
        w.add_state(p.clone());
        let mut fresh = BTreeSet::new();
        for (a, row) in ev.rows(&p)? {
            for t in row.support_iter() {
                if !seen.contains(t) {
                    fresh.insert(t.clone());
                }
            }
            w.set_row(p.clone(), &a, row)?;
        }
        for t in fresh {
            seen.insert(t.clone());
            queue.push_back(t);
        }
    }
    Ok(w)
}

/// Rows of the explored states of a functional fragment; boundary states
/// appear as row-less states.
pub fn explored_wlts(u: &Ultras<Term>) -> Result<Wlts<Term>, WfError> {
    let mut w = Wlts::new(u.monoid().clone(), u.labels().iter().cloned());
    for s in u.states().iter().chain(u.boundary()) {
        w.add_state(s.clone());
    }
    for s in u.states() {
        for a in u.labels() {
            let fs: Vec<_> = u.transitions(s, a).collect();
            if fs.len() != 1 {
                return Err(crate::system::SystemError::NotFunctional(s.to_string(), a.clone()).into());
            }
            w.set_row(s.clone(), a, fs[0].clone())?;
        }
    }
    Ok(w)
}

// --------------------------------------------------- W-GSOS translation

/// Largest number of rules sharing an operator and label; the
/// translation emits one rule per consistent subset of them.
pub const MAX_RULE_GROUP: usize = 12;

fn leaf_weight(m: &Monoid) -> Weight {
    m.one()
        .or_else(|| m.elements().and_then(|es| es.into_iter().find(|w| !m.is_zero(w))))
        .unwrap_or_else(|| m.zero())
}

fn check_fresh(sig: &Signature, names: &[&str]) -> Result<(), TranslateError> {
    for n in names {
        if sig.contains(n) {
            return Err(TranslateError::NameClash(n.to_string()));
        }
    }
    Ok(())
}

/// Replaces variables of a target by holes: weighted holes first (in
/// `weighted` order), then one term hole per remaining variable.
fn templatize(t: &Term, weighted: &[String]) -> (Term, Vec<Hole>, Vec<String>) {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut holes = Vec::new();
    for (k, v) in weighted.iter().enumerate() {
        names.insert(v.clone(), format!("#{k}"));
        holes.push(Hole::Weighted);
    }
    let mut term_vars = Vec::new();
    for v in t.vars() {
        if !names.contains_key(&v) {
            names.insert(v.clone(), format!("#{}", holes.len()));
            holes.push(Hole::Term);
            term_vars.push(v);
        }
    }
    (t.rename(&names), holes, term_vars)
}

/// Compiles a W-GSOS specification. Rules sharing operator and label are
/// combined: for every consistent subset `S` there is one rule whose
/// total premises are those of `S` and whose target sums the
/// contributions of `S`, guarded against any further rule being
/// triggered. Exactly one rule fires per term and label, so the induced
/// system is functional.
pub fn translate_wgsos(spec: &WgsosSpec) -> Result<Specification, TranslateError> {
    let problems = spec.validate();
    if !problems.is_empty() {
        return Err(TranslateError::Invalid(problems));
    }
    let m = &spec.monoid;
    check_fresh(&spec.sig, &["wzero", "wsum"])?;
    let mut wsig = Signature::new();
    let mut interp = Interpretation::new(leaf_weight(m));
    wsig.insert("wzero", 0);
    wsig.insert("wsum", 2);
    interp.ops.insert("wzero".into(), Combinator::Zero);
    interp.ops.insert("wsum".into(), Combinator::Sum);

    // one context per source rule, one colour per weight variable
    let mut contexts: Vec<(String, Vec<String>, Vec<String>)> = Vec::new();
    for (n, r) in spec.rules.iter().enumerate() {
        let ys: Vec<String> = r.transitions.iter().map(|t| t.y.clone()).collect();
        let (template, holes, term_vars) = templatize(&r.target, &ys);
        let ctx = format!("ctx_{}", n + 1);
        let cols: Vec<String> = (1..=ys.len()).map(|k| format!("col_{}_{k}", n + 1)).collect();
        check_fresh(&spec.sig, &[ctx.as_str()])?;
        for c in &cols {
            check_fresh(&spec.sig, &[c.as_str()])?;
            wsig.insert(c, 1);
            interp.ops.insert(c.clone(), Combinator::Colour);
        }
        wsig.insert(&ctx, holes.len());
        interp.ops.insert(ctx.clone(), Combinator::Context { template, holes, coeff: r.coeff.clone() });
        contexts.push((ctx, cols, term_vars));
    }

    let mut rules = Vec::new();
    let mut guard_count = 0usize;
    for (op, arity) in spec.sig.iter() {
        let xs: Vec<String> = (1..=arity).map(|i| format!("x{i}")).collect();
        let xs_ref: Vec<&str> = xs.iter().map(String::as_str).collect();
        for c in &spec.labels {
            let group: Vec<usize> =
                (0..spec.rules.len()).filter(|&n| spec.rules[n].op == op && spec.rules[n].label == *c).collect();
            if group.len() > MAX_RULE_GROUP {
                return Err(TranslateError::TooManyRules {
                    op: op.to_string(),
                    label: c.clone(),
                    count: group.len(),
                    max: MAX_RULE_GROUP,
                });
            }
            // (arg, label) pairs observed by the group, each bound to one variable
            let observed: BTreeSet<(usize, Label)> = group
                .iter()
                .flat_map(|&n| {
                    let r = &spec.rules[n];
                    r.weights.iter().map(|w| (w.arg, w.label.clone())).chain(r.transitions.iter().map(|t| (t.arg, t.label.clone())))
                })
                .collect();
            let observed: Vec<(usize, Label)> = observed.into_iter().collect();
            let phi = |i: usize, a: &str| {
                let k = observed.iter().position(|(j, b)| *j == i && b == a).expect("observed");
                format!("phi{}", k + 1)
            };
            for mask in 0u32..(1u32 << group.len()) {
                let members: Vec<usize> = (0..group.len()).filter(|b| mask & (1 << b) != 0).map(|b| group[b]).collect();
                let mut totals: BTreeMap<(usize, Label), Weight> = BTreeMap::new();
                let mut consistent = true;
                for &n in &members {
                    for w in &spec.rules[n].weights {
                        match totals.get(&(w.arg, w.label.clone())) {
                            Some(v) if *v != w.weight => consistent = false,
                            _ => {
                                totals.insert((w.arg, w.label.clone()), w.weight.clone());
                            }
                        }
                    }
                }
                if !consistent {
                    continue;
                }
                let mut body: Option<WTerm> = None;
                for &n in &members {
                    let r = &spec.rules[n];
                    let (ctx, cols, term_vars) = &contexts[n];
                    let mut args: Vec<WTerm> = r
                        .transitions
                        .iter()
                        .zip(cols)
                        .map(|(t, col)| WTerm::op(col, vec![WTerm::wvar(&phi(t.arg, &t.label))]))
                        .collect();
                    for v in term_vars {
                        let i = r.args.iter().position(|a| a == v).expect("validated");
                        args.push(WTerm::pvar(&xs[i]));
                    }
                    let contribution = WTerm::op(ctx, args);
                    body = Some(match body {
                        None => contribution,
                        Some(b) => WTerm::op("wsum", vec![b, contribution]),
                    });
                }
                let body = body.unwrap_or_else(|| WTerm::op("wzero", vec![]));
                let forbid: Vec<Vec<(usize, Weight)>> = group
                    .iter()
                    .filter(|n| !members.contains(n))
                    .filter_map(|&n| {
                        let r = &spec.rules[n];
                        let clash = r.weights.iter().any(|w| totals.get(&(w.arg, w.label.clone())).is_some_and(|v| *v != w.weight));
                        (!clash).then(|| {
                            r.weights
                                .iter()
                                .map(|w| (observed.iter().position(|(j, b)| *j == w.arg && *b == w.label).expect("observed") + 1, w.weight.clone()))
                                .collect()
                        })
                    })
                    .collect();
                let target = if forbid.is_empty() {
                    body
                } else {
                    guard_count += 1;
                    let g = format!("guard_{guard_count}");
                    check_fresh(&spec.sig, &[g.as_str()])?;
                    wsig.insert(&g, observed.len() + 1);
                    interp.ops.insert(g.clone(), Combinator::Guard { forbid });
                    let mut args = vec![body];
                    args.extend(observed.iter().map(|(i, a)| WTerm::wvar(&phi(*i, a))));
                    WTerm::op(&g, args)
                };
                let mut rule = Rule::new(op, &xs_ref, c, target);
                for (i, a) in &observed {
                    rule = rule.with_positive(*i, a, &phi(*i, a));
                }
                for ((i, a), w) in &totals {
                    rule.totals.push(TotalPremise { var: phi(*i, a), weight: w.clone() });
                }
                rules.push(rule);
            }
        }
    }
    let out = Specification {
        monoid: m.clone(),
        labels: spec.labels.clone(),
        sig: spec.sig.clone(),
        wsig,
        rules,
        interp,
        processes: BTreeMap::new(),
    };
    out.ensure_valid()?;
    Ok(out)
}

// --------------------------------------------------- Segala translation

/// A Segala-GSOS rule over rational probabilities. Target terms use
/// variables from the arguments, the `y`s, and coloured distribution
/// variables `phi#k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegalaRule {
    pub op: String,
    pub args: Vec<String>,
    pub label: Label,
    /// `(arg, label, phi)`
    pub positive: Vec<(usize, Label, String)>,
    /// `(arg, label)`
    pub negative: Vec<(usize, Label)>,
    /// `phi => y`
    pub supports: Vec<(String, String)>,
    pub target: Vec<(Weight, Term)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegalaSpec {
    pub labels: BTreeSet<Label>,
    pub sig: Signature,
    pub rules: Vec<SegalaRule>,
}

/// Splits `phi#k` into the variable and its colour.
pub fn colour_of(v: &str) -> (&str, usize) {
    match v.split_once('#') {
        Some((base, k)) => (base, k.parse().unwrap_or(0)),
        None => (v, 0),
    }
}

impl SegalaRule {
    fn phis(&self) -> BTreeSet<&str> {
        self.positive.iter().map(|p| p.2.as_str()).collect()
    }

    pub fn format(&self) -> String {
        let m = Monoid::RatPlus;
        let mut prem: Vec<String> =
            self.positive.iter().map(|(i, a, v)| format!("{} -[{a}]-> {v}", self.args[*i])).collect();
        prem.extend(self.negative.iter().map(|(i, b)| format!("{} -/[{b}]", self.args[*i])));
        prem.extend(self.supports.iter().map(|(p, y)| format!("{p} => {y}")));
        let target: Vec<String> = self.target.iter().map(|(w, t)| format!("{} * {t}", m.format_weight(w))).collect();
        let src = Term::app(&self.op, self.args.iter().map(|a| Term::var(a)).collect());
        let mut out = format!("{src} -[{}]-> {}", self.label, target.join(" + "));
        if !prem.is_empty() {
            out.push_str(" when ");
            out.push_str(&prem.join(", "));
        }
        out
    }
}

impl SegalaSpec {
    pub fn validate(&self) -> Vec<String> {
        let m = Monoid::RatPlus;
        let one = Weight::int(1);
        let mut out = Vec::new();
        for (n, r) in self.rules.iter().enumerate() {
            let mut d = |s: String| out.push(format!("rule {}: {s}", n + 1));
            if self.sig.arity(&r.op) != Some(r.args.len()) {
                d(format!("`{}` with {} arguments is not in the signature", r.op, r.args.len()));
            }
            let labels = std::iter::once(&r.label)
                .chain(r.positive.iter().map(|p| &p.1))
                .chain(r.negative.iter().map(|p| &p.1));
            for l in labels {
                if !self.labels.contains(l) {
                    d(format!("unknown label `{l}`"));
                }
            }
            for (i, a, _) in &r.positive {
                if r.negative.contains(&(*i, a.clone())) {
                    d(format!("overlapping premises on `{a}`"));
                }
            }
            let mut seen = BTreeSet::new();
            let ys = r.supports.iter().map(|s| &s.1);
            for v in r.args.iter().chain(r.positive.iter().map(|p| &p.2)).chain(ys) {
                if !seen.insert(v) || v.contains('#') {
                    d(format!("variable `{v}` bound twice or malformed"));
                }
            }
            let phis = r.phis();
            for (p, _) in &r.supports {
                if !phis.contains(p.as_str()) {
                    d(format!("`{p}` is not a distribution variable"));
                }
            }
            if r.target.is_empty() {
                d("empty target".into());
            }
            let mut total = m.zero();
            for (w, t) in &r.target {
                let in_range = w.as_rational().is_some_and(|q| *q > BigRational::from_integer(0.into()) && *q <= BigRational::from_integer(1.into()));
                if !in_range {
                    d(format!("weight {} not in (0,1]", m.format_weight(w)));
                }
                total = m.add(&total, w).unwrap_or(total);
                if let Err(e) = t.check(&self.sig) {
                    d(format!("target: {e}"));
                }
                for v in t.vars() {
                    let (base, _) = colour_of(&v);
                    let bound = r.args.contains(&v)
                        || r.supports.iter().any(|s| s.1 == v)
                        || phis.contains(base);
                    if !bound {
                        d(format!("target variable `{v}` is unbound"));
                    }
                }
            }
            if total != one {
                d(format!("weights sum to {}, not 1", m.format_weight(&total)));
            }
        }
        out
    }
}

/// Compiles Segala-GSOS rules: support premises become `nonzero` club
/// premises, each coloured distribution variable gets its own colour
/// operator, and each target summand `w * t` becomes a context that
/// multiplies the probabilities of the sampled successors.
pub fn translate_segala(spec: &SegalaSpec) -> Result<Specification, TranslateError> {
    let problems = spec.validate();
    if !problems.is_empty() {
        return Err(TranslateError::Invalid(problems));
    }
    let m = Monoid::RatPlus;
    check_fresh(&spec.sig, &["wsum"])?;
    let mut wsig = Signature::new();
    let mut interp = Interpretation::new(Weight::int(1));
    wsig.insert("wsum", 2);
    interp.ops.insert("wsum".into(), Combinator::Sum);
    let mut rules = Vec::new();
    for (n, r) in spec.rules.iter().enumerate() {
        let phis = r.phis();
        let mut colours: BTreeMap<String, String> = BTreeMap::new();
        let mut body: Option<WTerm> = None;
        for (i, (w, t)) in r.target.iter().enumerate() {
            let coloured: Vec<String> =
                t.vars().into_iter().filter(|v| phis.contains(colour_of(v).0) && !r.args.contains(v)).collect();
            let (template, holes, term_vars) = templatize(t, &coloured);
            let ctx = format!("ctx_{}_{}", n + 1, i + 1);
            check_fresh(&spec.sig, &[ctx.as_str()])?;
            let mut args = Vec::new();
            for v in &coloured {
                let next = colours.len() + 1;
                let col = colours.entry(v.clone()).or_insert_with(|| format!("col_{}_{next}", n + 1)).clone();
                check_fresh(&spec.sig, &[col.as_str()])?;
                wsig.insert(&col, 1);
                interp.ops.insert(col.clone(), Combinator::Colour);
                args.push(WTerm::op(&col, vec![WTerm::wvar(colour_of(v).0)]));
            }
            args.extend(term_vars.iter().map(|v| WTerm::pvar(v)));
            wsig.insert(&ctx, holes.len());
            interp.ops.insert(ctx.clone(), Combinator::Context { template, holes, coeff: Some(w.clone()) });
            let summand = WTerm::op(&ctx, args);
            body = Some(match body {
                None => summand,
                Some(b) => WTerm::op("wsum", vec![b, summand]),
            });
        }
        let args: Vec<&str> = r.args.iter().map(String::as_str).collect();
        let mut rule = Rule::new(&r.op, &args, &r.label, body.expect("validated non-empty"));
        for (i, a, v) in &r.positive {
            rule = rule.with_positive(*i, a, v);
        }
        for (i, b) in &r.negative {
            rule = rule.with_negative(*i, b);
        }
        for (p, y) in &r.supports {
            rule = rule.with_club(p, Club::NonZero, y);
        }
        rules.push(rule);
    }
    let out = Specification {
        monoid: m,
        labels: spec.labels.clone(),
        sig: spec.sig.clone(),
        wsig,
        rules,
        interp,
        processes: BTreeMap::new(),
    };
    out.ensure_valid()?;
    Ok(out)
}

// ------------------------------------------------------------- parsing

fn perr(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, col, message: message.into() }
}

struct Header {
    monoid: Option<Monoid>,
    labels: BTreeSet<Label>,
    sig: Signature,
    rules: Vec<(usize, String)>,
}

fn read_header(text: &str) -> Result<Header, ParseError> {
    let mut h = Header { monoid: None, labels: BTreeSet::new(), sig: Signature::new(), rules: Vec::new() };
    let mut pending: Option<(usize, String)> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = match raw.find(" # ").or_else(|| raw.trim_start().starts_with('#').then_some(0)) {
            Some(i) => &raw[..i],
            None => raw,
        };
        if let Some((start, mut acc)) = pending.take() {
            acc.push(' ');
            acc.push_str(line.trim());
            if acc.matches('{').count() <= acc.matches('}').count() {
                h.monoid = Some(Monoid::parse_declaration(&acc).map_err(|e| perr(start, 8, e.to_string()))?);
            } else {
                pending = Some((start, acc));
            }
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match kw {
            "monoid" => {
                if rest.matches('{').count() > rest.matches('}').count() {
                    pending = Some((n + 1, rest.to_string()));
                } else {
                    h.monoid = Some(Monoid::parse_declaration(rest).map_err(|e| perr(n + 1, 8, e.to_string()))?);
                }
            }
            "labels" => h.labels.extend(rest.split_whitespace().map(str::to_string)),
            "sig" => {
                let mut sc = Scanner::new(rest);
                while !sc.at_end() {
                    let name = sc.ident().ok_or_else(|| perr(n + 1, sc.pos() + 5, "expected an operator name"))?;
                    sc.expect("/").map_err(|e| perr(n + 1, e.pos + 5, e.message))?;
                    sc.skip_ws();
                    let digits: String = sc.rest().chars().take_while(char::is_ascii_digit).collect();
                    let a = digits.parse().map_err(|_| perr(n + 1, sc.pos() + 5, "expected an arity"))?;
                    sc.eat(&digits);
                    if !h.sig.insert(&name, a) {
                        return Err(perr(n + 1, 1, format!("`{name}` declared twice")));
                    }
                }
            }
            "rule" => h.rules.push((n + 1, rest.to_string())),
            other => return Err(perr(n + 1, 1, format!("unknown directive `{other}`"))),
        }
    }
    if let Some((start, _)) = pending {
        return Err(perr(start, 1, "unterminated monoid block"));
    }
    Ok(h)
}

/// `f(x1, ..., xn) -[label` and the remainder after `]`.
fn rule_head(line: usize, text: &str) -> Result<(String, Vec<String>, &str), ParseError> {
    let mut sc = Scanner::new(text);
    let op = sc.ident().ok_or_else(|| perr(line, 6, "expected the source operator"))?;
    let mut args = Vec::new();
    if sc.eat("(") && !sc.eat(")") {
        loop {
            args.push(sc.ident().ok_or_else(|| perr(line, sc.pos() + 6, "expected a variable"))?);
            if sc.eat(")") {
                break;
            }
            sc.expect(",").map_err(|e| perr(line, e.pos + 6, e.message))?;
        }
    }
    sc.expect("-[").map_err(|e| perr(line, e.pos + 6, e.message))?;
    Ok((op, args, sc.rest()))
}

fn split_when(text: &str) -> (&str, Option<&str>) {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            'w' if depth == 0 && text[i..].starts_with("when ") && (i == 0 || text[..i].ends_with(' ')) => {
                return (&text[..i], Some(&text[i + 5..]));
            }
            _ => {}
        }
    }
    (text, None)
}

fn arg_index(line: usize, args: &[String], x: &str) -> Result<usize, ParseError> {
    args.iter().position(|a| a == x).ok_or_else(|| perr(line, 1, format!("`{x}` is not an argument of the source")))
}

/// Parses a `.wgsos` file.
pub fn parse_wgsos(text: &str) -> Result<WgsosSpec, ParseError> {
    let h = read_header(text)?;
    let monoid = h.monoid.ok_or_else(|| perr(1, 1, "missing `monoid` line"))?;
    let mut rules = Vec::new();
    for (line, body) in &h.rules {
        let line = *line;
        let (op, args, rest) = rule_head(line, body)?;
        let close = rest.find("]->").ok_or_else(|| perr(line, 1, "expected `-[label, weight]->`"))?;
        let (label, beta) = rest[..close].split_once(',').ok_or_else(|| perr(line, 1, "expected `label, weight`"))?;
        let (target, premises) = split_when(&rest[close + 3..]);
        let mut weights = Vec::new();
        let mut transitions = Vec::new();
        for (_, p) in premises.map(|p| split_top_level(p, ',')).unwrap_or_default() {
            let p = p.trim();
            if let Some((x, r)) = p.split_once("=[") {
                let (a, w) = r.split_once("]=>").ok_or_else(|| perr(line, 1, format!("expected `x =[a]=> w`, got `{p}`")))?;
                let weight = monoid.parse_weight(w).map_err(|e| perr(line, 1, e.to_string()))?;
                weights.push(WeightPremise { arg: arg_index(line, &args, x.trim())?, label: a.trim().to_string(), weight });
            } else if let Some((x, r)) = p.split_once("-[") {
                let (inner, y) = r.split_once("]->").ok_or_else(|| perr(line, 1, format!("expected `x -[b, u]-> y`, got `{p}`")))?;
                let (b, u) = inner.split_once(',').ok_or_else(|| perr(line, 1, format!("expected `b, u` in `{p}`")))?;
                transitions.push(TransPremise {
                    arg: arg_index(line, &args, x.trim())?,
                    label: b.trim().to_string(),
                    u: u.trim().to_string(),
                    y: y.trim().to_string(),
                });
            } else {
                return Err(perr(line, 1, format!("unrecognised premise `{p}`")));
            }
        }
        let us: Vec<&str> = transitions.iter().map(|t| t.u.as_str()).collect();
        let mut coeff = None;
        let mut seen_u = Vec::new();
        for f in beta.split('*').map(str::trim) {
            if us.contains(&f) {
                seen_u.push(f);
            } else {
                let w = monoid.parse_weight(f).map_err(|_| perr(line, 1, format!("`{f}` is neither a weight variable nor a weight")))?;
                if coeff.replace(w).is_some() {
                    return Err(perr(line, 1, "at most one constant factor"));
                }
            }
        }
        let mut sorted_seen = seen_u.clone();
        sorted_seen.sort();
        let mut sorted_us = us.clone();
        sorted_us.sort();
        if sorted_seen != sorted_us {
            return Err(perr(line, 1, "the weight must multiply every weight variable exactly once"));
        }
        // keep transition premises in the order they appear in the product
        transitions.sort_by_key(|t| seen_u.iter().position(|u| *u == t.u));
        let target = parse_term(target.trim(), &h.sig, true).map_err(|e| perr(line, e.pos + 1, e.message))?;
        rules.push(WgsosRule { op, args, label: label.trim().to_string(), weights, transitions, coeff, target });
    }
    Ok(WgsosSpec { monoid, labels: h.labels, sig: h.sig, rules })
}

/// Writes a `.wgsos` file.
pub fn emit_wgsos(spec: &WgsosSpec) -> String {
    let m = &spec.monoid;
    let mut out = format!("monoid {}\nlabels {}\n", m.declaration(), spec.labels.iter().cloned().collect::<Vec<_>>().join(" "));
    out.push_str(&format!("sig {}\n", spec.sig.iter().map(|(n, a)| format!("{n}/{a}")).collect::<Vec<_>>().join(" ")));
    for r in &spec.rules {
        out.push_str(&format!("rule {}\n", r.format(m)));
    }
    out
}

/// Parses a `.sgsos` file. A `monoid` line, if present, must name
/// `rat-plus`.
pub fn parse_sgsos(text: &str) -> Result<SegalaSpec, ParseError> {
    let h = read_header(text)?;
    if let Some(m) = &h.monoid {
        if *m != Monoid::RatPlus {
            return Err(perr(1, 1, "Segala rules use the monoid rat-plus"));
        }
    }
    let m = Monoid::RatPlus;
    let mut rules = Vec::new();
    for (line, body) in &h.rules {
        let line = *line;
        let (op, args, rest) = rule_head(line, body)?;
        let close = rest.find("]->").ok_or_else(|| perr(line, 1, "expected `-[label]->`"))?;
        let label = rest[..close].trim().to_string();
        let (target, premises) = split_when(&rest[close + 3..]);
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut supports = Vec::new();
        for (_, p) in premises.map(|p| split_top_level(p, ',')).unwrap_or_default() {
            let p = p.trim();
            if let Some((phi, y)) = p.split_once("=>") {
                supports.push((phi.trim().to_string(), y.trim().to_string()));
            } else if let Some((x, r)) = p.split_once("-/[") {
                let b = r.split(']').next().unwrap_or("").trim().to_string();
                negative.push((arg_index(line, &args, x.trim())?, b));
            } else if let Some((x, r)) = p.split_once("-[") {
                let (a, v) = r.split_once("]->").ok_or_else(|| perr(line, 1, format!("expected `x -[a]-> phi`, got `{p}`")))?;
                positive.push((arg_index(line, &args, x.trim())?, a.trim().to_string(), v.trim().to_string()));
            } else {
                return Err(perr(line, 1, format!("unrecognised premise `{p}`")));
            }
        }
        let mut summands = Vec::new();
        for (_, s) in split_top_level(target, '+') {
            let (w, t) = s.split_once('*').ok_or_else(|| perr(line, 1, format!("expected `w * term`, got `{}`", s.trim())))?;
            let w = m.parse_weight(w).map_err(|e| perr(line, 1, e.to_string()))?;
            let t = parse_term(t.trim(), &h.sig, true).map_err(|e| perr(line, e.pos + 1, e.message))?;
            summands.push((w, t));
        }
        rules.push(SegalaRule { op, args, label, positive, negative, supports, target: summands });
    }
    Ok(SegalaSpec { labels: h.labels, sig: h.sig, rules })
}

/// Writes a `.sgsos` file.
pub fn emit_sgsos(spec: &SegalaSpec) -> String {
    let mut out = format!("monoid rat-plus\nlabels {}\n", spec.labels.iter().cloned().collect::<Vec<_>>().join(" "));
    out.push_str(&format!("sig {}\n", spec.sig.iter().map(|(n, a)| format!("{n}/{a}")).collect::<Vec<_>>().join(" ")));
    for r in &spec.rules {
        out.push_str(&format!("rule {}\n", r.format()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfgsos::{induce, one_step};

    const STOCHASTIC: &str = "\
monoid rat-plus
labels a b
sig nil/0 pre/1 sw/1 par/2
rule pre(x) -[a, 2]-> x
rule sw(x) -[b, 3*u]-> sw(y) when x =[a]=> 2, x -[a, u]-> y
rule sw(x) -[b, 1]-> nil when x =[a]=> 2
rule par(x1, x2) -[a, u]-> par(y, x2) when x1 =[a]=> 2, x1 -[a, u]-> y
rule par(x1, x2) -[a, u1*u2]-> par(y1, y2) when x1 =[a]=> 2, x2 =[a]=> 2, x1 -[a, u1]-> y1, x2 -[a, u2]-> y2
";

    fn t(s: &str, sig: &Signature) -> Term {
        parse_term(s, sig, false).unwrap()
    }

    #[test]
    fn wgsos_round_trip_and_oracle() {
        let s = parse_wgsos(STOCHASTIC).unwrap();
        assert!(s.validate().is_empty(), "{:?}", s.validate());
        assert_eq!(parse_wgsos(&emit_wgsos(&s)).unwrap(), s);
        let roots = BTreeSet::from([t("par(pre(pre(nil)), sw(pre(nil)))", &s.sig)]);
        let oracle = wgsos_semantics(&s, &roots, 200).unwrap();
        let wf = translate_wgsos(&s).unwrap();
        let u = induce(&wf, &roots, 200).unwrap();
        assert!(u.is_functional().unwrap());
        assert_eq!(u.to_wlts().unwrap(), oracle);
        // the sw rules fire together: 3*2 to sw(nil) plus 1 to nil
        let sw = t("sw(pre(nil))", &s.sig);
        let oracle = wgsos_semantics(&s, &BTreeSet::from([sw.clone()]), 10).unwrap();
        assert_eq!(oracle.weight(&sw, "b", &t("sw(nil)", &s.sig)), Weight::int(6));
        assert_eq!(oracle.weight(&sw, "b", &t("nil", &s.sig)), Weight::int(1));
    }

    #[test]
    fn shared_targets_add_up() {
        let s = parse_wgsos("monoid nat-plus\nlabels a\nsig k/0\nrule k -[a, 2]-> k\nrule k -[a, 3]-> k\n").unwrap();
        let w = wgsos_semantics(&s, &BTreeSet::from([Term::constant("k")]), 5).unwrap();
        assert_eq!(w.weight(&Term::constant("k"), "a", &Term::constant("k")), Weight::nat(5));
        let wf = translate_wgsos(&s).unwrap();
        let u = induce(&wf, &BTreeSet::from([Term::constant("k")]), 5).unwrap();
        assert_eq!(u.to_wlts().unwrap(), w);
    }

    #[test]
    fn wgsos_validation() {
        let bad = parse_wgsos("monoid nat-plus\nlabels a\nsig f/1\nrule f(x) -[a, u]-> f(y) when x -[a, u]-> y\n").unwrap();
        assert!(bad.validate().iter().any(|d| d.contains("nonzero weight premise")));
        let table = parse_wgsos("monoid bool-or\nlabels a\nsig f/1\nrule f(x) -[a, tt]-> f(x)\n").unwrap();
        assert!(table.validate().is_empty());
        assert!(parse_wgsos("monoid nat-plus\nlabels a\nsig f/1\nrule f(x) -[a, 2*3]-> x\n").is_err());
    }

    const SEGALA: &str = "\
labels a
sig nil/0 coin/0 two/1 pair/2
rule coin -[a]-> 1/2 * nil + 1/2 * coin
rule two(x) -[a]-> 1 * pair(phi#1, phi#2) when x -[a]-> phi
rule pair(x1, x2) -[a]-> 1 * pair(y, x2) when x1 -[a]-> phi, phi => y
";

    #[test]
    fn segala_translation() {
        let s = parse_sgsos(SEGALA).unwrap();
        assert!(s.validate().is_empty(), "{:?}", s.validate());
        assert_eq!(parse_sgsos(&emit_sgsos(&s)).unwrap(), s);
        let wf = translate_segala(&s).unwrap();
        let coin = Term::constant("coin");
        let step = one_step(&wf, &coin).unwrap();
        assert_eq!(step["a"].len(), 1);
        // two independent samples: the product distribution over pairs
        let two = Term::app("two", vec![coin.clone()]);
        let step = one_step(&wf, &two).unwrap();
        let f = step["a"].iter().next().unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f.weight(&Monoid::RatPlus, &Term::app("pair", vec![coin.clone(), Term::constant("nil")])), Weight::rat(1, 4));
        // support selection: one Dirac transition per support point
        let pair = Term::app("pair", vec![coin.clone(), coin.clone()]);
        assert_eq!(one_step(&wf, &pair).unwrap()["a"].len(), 2);
        let u = induce(&wf, &BTreeSet::from([two]), 50).unwrap();
        assert!(u.check_segala().unwrap());
    }

    #[test]
    fn segala_weights_must_be_convex() {
        let s = parse_sgsos("labels a\nsig k/0\nrule k -[a]-> 1/2 * k\n").unwrap();
        assert!(s.validate().iter().any(|d| d.contains("sum")));
        assert!(translate_segala(&s).is_err());
        let s = parse_sgsos("labels a\nsig k/0\nrule k -[a]-> 3/2 * k + 1/2 * k\n").unwrap();
        assert!(!s.validate().is_empty());
    }
}
