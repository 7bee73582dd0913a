//! Derivation of the induced system by structural recursion on ground
//! terms, with a shared memo table.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::{Arc, Mutex};

use crate::bisim::{largest_bisimulation, Side};
use crate::system::{Label, Ultras};

use super::interp::Fun;
use super::rule::{rule_triggered, Rule, Trigger};
use super::term::Term;
use super::{Specification, WfError};

/// One rule instance that contributed a transition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Firing {
    pub rule: usize,
    pub label: Label,
    pub trigger: Trigger,
    pub function: Fun,
}

/// The transitions of one ground term together with their justification.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub transitions: BTreeMap<Label, BTreeSet<Fun>>,
    pub firings: Vec<Firing>,
}

impl Outcome {
    pub fn enabled(&self) -> BTreeSet<Label> {
        self.transitions.keys().cloned().collect()
    }
}

/// Computes outcomes of ground terms for a fixed specification.
/// Outcomes are memoized per term; the engine may be shared across
/// threads.
pub struct Engine<'s> {
    spec: &'s Specification,
    memo: Mutex<BTreeMap<Term, Arc<Outcome>>>,
}

impl<'s> Engine<'s> {
    pub fn new(spec: &'s Specification) -> Self {
        Engine { spec, memo: Mutex::new(BTreeMap::new()) }
    }

    pub fn spec(&self) -> &Specification {
        self.spec
    }

    /// Outcome of `p`, computed from the outcomes of its immediate
    /// subterms.
    pub fn outcome(&self, p: &Term) -> Result<Arc<Outcome>, WfError> {
        if let Some(o) = self.memo.lock().expect("memo lock").get(p) {
            return Ok(o.clone());
        }
        let (op, args) = match p {
            Term::App(op, args) => (op.as_ref(), args.as_ref()),
            Term::Var(v) => return Err(WfError::NotGround(v.to_string())),
        };
        let subs: Vec<Arc<Outcome>> = args.iter().map(|a| self.outcome(a)).collect::<Result<_, _>>()?;
        let mut out = Outcome::default();
        for (idx, rule) in self.spec.rules.iter().enumerate() {
            if rule.op == op && rule.arity() == args.len() {
                self.fire(idx, rule, args, &subs, &mut out)?;
            }
        }
        let out = Arc::new(out);
        // equal keys always map to equal outcomes, so a racing insert is harmless
        self.memo.lock().expect("memo lock").entry(p.clone()).or_insert_with(|| out.clone());
        Ok(out)
    }

    pub fn one_step(&self, p: &Term) -> Result<BTreeMap<Label, BTreeSet<Fun>>, WfError> {
        Ok(self.outcome(p)?.transitions.clone())
    }

    fn fire(&self, idx: usize, rule: &Rule, args: &[Term], subs: &[Arc<Outcome>], out: &mut Outcome) -> Result<(), WfError> {
        let m = &self.spec.monoid;
        let enabled: Vec<BTreeSet<Label>> = subs.iter().map(|o| o.enabled()).collect();
        if rule.negative.iter().any(|n| enabled[n.arg].contains(&n.label)) {
            return Ok(());
        }
        // candidate successors per positive premise, filtered by total premises
        let mut candidates: Vec<Vec<&Fun>> = Vec::with_capacity(rule.positive.len());
        for p in &rule.positive {
            let succ = match subs[p.arg].transitions.get(&p.label) {
                Some(s) => s,
                None => return Ok(()),
            };
            let wanted: Vec<_> = rule.totals.iter().filter(|t| t.var == p.var).map(|t| &t.weight).collect();
            let c: Vec<&Fun> = succ
                .iter()
                .filter(|f| {
                    if wanted.is_empty() {
                        return true;
                    }
                    let total = f.total_weight(m);
                    wanted.iter().all(|w| **w == total)
                })
                .collect();
            if c.is_empty() {
                return Ok(());
            }
            candidates.push(c);
        }
        let mut sigma: BTreeMap<String, Term> =
            rule.args.iter().cloned().zip(args.iter().cloned()).collect();
        let mut choice = vec![0usize; candidates.len()];
        loop {
            let theta: BTreeMap<String, Fun> = rule
                .positive
                .iter()
                .zip(&choice)
                .enumerate()
                .map(|(k, (p, &c))| (p.var.clone(), candidates[k][c].clone()))
                .collect();
            let trigger = Trigger {
                enabled: enabled.clone(),
                weights: rule.totals.iter().map(|t| theta.get(&t.var).map(|f| f.total_weight(m)).unwrap_or_else(|| m.zero())).collect(),
            };
            debug_assert!(rule_triggered(rule, &trigger));
            let bound = rule.target.bind(&theta);
            let rhos = self.spec.interp.eval(m, &bound, &BTreeMap::new())?;
            // club selections for the y variables
            let mut selections: Vec<(String, Vec<Term>)> = Vec::with_capacity(rule.clubs.len());
            for c in &rule.clubs {
                let phi = &theta[&c.var];
                let picked: Vec<Term> = phi.select_by_club(m, &c.club)?.into_iter().collect();
                selections.push((c.target.clone(), picked));
            }
            if selections.iter().all(|(_, s)| !s.is_empty()) {
                let mut pick = vec![0usize; selections.len()];
                loop {
                    for ((y, s), &k) in selections.iter().zip(&pick) {
                        sigma.insert(y.clone(), s[k].clone());
                    }
                    for rho in &rhos {
                        let f: Fun = rho.map(m, |t| t.substitute(&sigma));
                        if !f.support_iter().all(Term::is_ground) {
                            return Err(WfError::NotGround(format!("rule {} produced {}", idx + 1, f.format(m))));
                        }
                        out.transitions.entry(rule.label.clone()).or_default().insert(f.clone());
                        out.firings.push(Firing { rule: idx, label: rule.label.clone(), trigger: trigger.clone(), function: f });
                    }
                    if !advance(&mut pick, |i| selections[i].1.len()) {
                        break;
                    }
                }
            }
            if !advance(&mut choice, |i| candidates[i].len()) {
                break;
            }
        }
        Ok(())
    }

    /// Breadth-first closure from `roots`, exploring at most `budget`
    /// states; discovered but unexplored states form the boundary.
    pub fn induce(&self, roots: &BTreeSet<Term>, budget: usize) -> Result<Ultras<Term>, WfError> {
        if budget < roots.len() {
            return Err(WfError::Budget { budget, roots: roots.len() });
        }
        if let Some(r) = roots.iter().find(|r| !r.is_ground()) {
            return Err(WfError::NotGround(r.to_string()));
        }
        let mut u = Ultras::new(self.spec.monoid.clone(), self.spec.labels.iter().cloned());
        let mut seen: BTreeSet<Term> = roots.clone();
        let mut queue: VecDeque<Term> = roots.iter().cloned().collect();
        let mut explored = 0usize;
        while let Some(p) = queue.pop_front() {
            if explored == budget {
                queue.push_front(p);
                break;
            }
            explored += 1;
            u.add_state(p.clone());
            let o = self.outcome(&p)?;
            let mut fresh = BTreeSet::new();
            for (label, fs) in &o.transitions {
                for f in fs {
                    u.add_transition(p.clone(), label, f.clone())?;
                    for t in f.support_iter() {
                        if !seen.contains(t) {
                            fresh.insert(t.clone());
                        }
                    }
                }
            }
            for t in fresh {
                seen.insert(t.clone());
                queue.push_back(t);
            }
        }
        for p in queue {
            u.add_state(p.clone());
            u.mark_boundary(p)?;
        }
        Ok(u)
    }

    /// `Some(true)` when `p` and `q` are bisimilar, `None` when either
    /// fragment is truncated.
    pub fn bisimilar(&self, p: &Term, q: &Term, budget: usize) -> Result<Option<bool>, WfError> {
        let u1 = self.induce(&BTreeSet::from([p.clone()]), budget)?;
        let u2 = self.induce(&BTreeSet::from([q.clone()]), budget)?;
        if !u1.is_fully_explored() || !u2.is_fully_explored() {
            return Ok(None);
        }
        let part = largest_bisimulation(&u1, &u2)?;
        Ok(Some(part.same_block(&Side::Left(p.clone()), &Side::Right(q.clone()))))
    }

    /// Checks that bisimilarity of `p` and `q` survives every context.
    /// Contexts are Σ-terms with the hole written as the variable `#`.
    pub fn congruence_probe(&self, p: &Term, q: &Term, contexts: &[Term], budget: usize) -> Result<ProbeOutcome, WfError> {
        match self.bisimilar(p, q, budget)? {
            None => return Ok(ProbeOutcome::Inconclusive),
            Some(false) => return Ok(ProbeOutcome::NotBisimilar),
            Some(true) => {}
        }
        let mut inconclusive = false;
        for k in contexts {
            let kp = plug(k, p);
            let kq = plug(k, q);
            match self.bisimilar(&kp, &kq, budget)? {
                Some(true) => {}
                Some(false) => return Ok(ProbeOutcome::Fails(k.clone())),
                None => inconclusive = true,
            }
        }
        Ok(if inconclusive { ProbeOutcome::Inconclusive } else { ProbeOutcome::Holds })
    }
}

/// Result of [`Engine::congruence_probe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeOutcome {
    Holds,
    /// The probed terms were not bisimilar to begin with.
    NotBisimilar,
    /// A context separating the two terms.
    Fails(Term),
    /// Some fragment hit the budget.
    Inconclusive,
}

impl ProbeOutcome {
    pub fn holds(&self) -> bool {
        *self == ProbeOutcome::Holds
    }
}

/// The hole variable of unary contexts.
pub const HOLE: &str = "#";

/// Substitutes `t` for the hole of `context`.
pub fn plug(context: &Term, t: &Term) -> Term {
    context.substitute(&BTreeMap::from([(HOLE.to_string(), t.clone())]))
}

/// Odometer step over mixed radices; `false` once it wraps around.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

pub fn one_step(spec: &Specification, p: &Term) -> Result<BTreeMap<Label, BTreeSet<Fun>>, WfError> {
    Engine::new(spec).one_step(p)
}

pub fn induce(spec: &Specification, roots: &BTreeSet<Term>, budget: usize) -> Result<Ultras<Term>, WfError> {
    Engine::new(spec).induce(roots, budget)
}

pub fn congruence_probe(
    spec: &Specification,
    p: &Term,
    q: &Term,
    contexts: &[Term],
    budget: usize,
) -> Result<ProbeOutcome, WfError> {
    Engine::new(spec).congruence_probe(p, q, contexts, budget)
}

#[cfg(test)]
mod tests {
    use super::super::interp::{Combinator, Hole, Interpretation};
    use super::super::rule::WTerm;
    use super::super::term::Signature;
    use super::*;
    use crate::monoid::{Club, Monoid, Weight};

    fn counter() -> Specification {
        // tick -[a]-> tick with weight 1; dup(x) copies every successor of
        // x selected by the nonzero club into pair(y, y)
        let m = Monoid::NatPlus;
        let sig: Signature = [("tick", 0), ("dup", 1), ("pair", 2), ("two", 0), ("one", 0)].into_iter().collect();
        let wsig: Signature = [("pt", 1), ("k", 1), ("sum", 2)].into_iter().collect();
        let interp = Interpretation::new(Weight::nat(1))
            .with("pt", Combinator::PointMass(Weight::nat(1)))
            .with("k", Combinator::Context {
                template: Term::app("pair", vec![Term::var("#0"), Term::var("#0")]),
                holes: vec![Hole::Term],
                coeff: Some(Weight::nat(1)),
            })
            .with("sum", Combinator::Sum);
        let rules = vec![
            Rule::new("tick", &[], "a", WTerm::op("pt", vec![WTerm::Proc(Term::constant("tick"))])),
            Rule::new(
                "two",
                &[],
                "a",
                WTerm::op("sum", vec![WTerm::Proc(Term::constant("tick")), WTerm::Proc(Term::constant("one"))]),
            ),
            Rule::new("dup", &["x"], "a", WTerm::op("k", vec![WTerm::pvar("y")]))
                .with_positive(0, "a", "phi")
                .with_club("phi", Club::NonZero, "y"),
        ];
        Specification { monoid: m, labels: ["a".to_string()].into(), sig, wsig, rules, interp, processes: BTreeMap::new() }
    }

    #[test]
    fn self_loop_and_club_selection() {
        let spec = counter();
        assert!(spec.validate().is_empty(), "{:?}", spec.validate());
        let tick = Term::constant("tick");
        let u = induce(&spec, &BTreeSet::from([tick.clone()]), 10).unwrap();
        assert_eq!(u.states().len(), 1);
        assert_eq!(u.transition_count(), 1);

        let dup = Term::app("dup", vec![Term::constant("two")]);
        let step = one_step(&spec, &dup).unwrap();
        // two selected successors, one transition each
        assert_eq!(step["a"].len(), 2);
    }

    #[test]
    fn budget_leaves_boundary() {
        let spec = counter();
        let dup = Term::app("dup", vec![Term::app("dup", vec![Term::constant("two")])]);
        let small = induce(&spec, &BTreeSet::from([dup.clone()]), 1).unwrap();
        assert!(!small.is_fully_explored());
        let big = induce(&spec, &BTreeSet::from([dup.clone()]), 100).unwrap();
        assert!(big.is_fully_explored());
        for s in small.states() {
            if !small.boundary().contains(s) {
                for l in small.labels() {
                    assert_eq!(small.transition_set(s, l), big.transition_set(s, l));
                }
            }
        }
        assert!(matches!(induce(&spec, &BTreeSet::from([dup]), 0), Err(WfError::Budget { .. })));
        assert!(matches!(
            induce(&spec, &BTreeSet::from([Term::var("x")]), 3),
            Err(WfError::NotGround(_))
        ));
    }

    #[test]
    fn firings_cite_triggered_rules() {
        let spec = counter();
        let e = Engine::new(&spec);
        let o = e.outcome(&Term::app("dup", vec![Term::constant("two")])).unwrap();
        assert!(!o.firings.is_empty());
        for f in &o.firings {
            assert!(rule_triggered(&spec.rules[f.rule], &f.trigger));
        }
        assert_eq!(e.outcome(&Term::app("dup", vec![Term::constant("two")])).unwrap(), o);
    }

    #[test]
    fn identical_terms_are_congruent() {
        let spec = counter();
        let t = Term::constant("two");
        let ctx = vec![Term::app("dup", vec![Term::var(HOLE)])];
        assert_eq!(congruence_probe(&spec, &t, &t, &ctx, 50).unwrap(), ProbeOutcome::Holds);
    }
}
