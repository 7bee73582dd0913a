//! Interpretation of weight terms as finite sets of weight functions over
//! process terms, built from a small library of combinators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::monoid::{Monoid, MonoidError, Weight};
use crate::weightfn::WeightFunction;

use super::rule::WTerm;
use super::term::{split_top_level, Signature, Term};

pub type Fun = WeightFunction<Term>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpError {
    #[error("unbound weight variable `{0}`")]
    UnboundVariable(String),
    #[error("no combinator for weight operator `{0}`")]
    UnknownOperator(String),
    #[error("weight operator `{op}` expects {expected} arguments, got {got}")]
    Arity { op: String, expected: usize, got: usize },
    #[error("`{op}`: {reason}")]
    Domain { op: String, reason: String },
    #[error("interpretation of `{0}` exceeds the enumeration limit")]
    TooLarge(String),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

/// How the total weights of the two arguments of a rate law combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TotalLaw {
    Min,
    Product,
    Sum,
}

/// A context hole either takes weighted successors or a single term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hole {
    Weighted,
    Term,
}

/// Programmatic combinators. Implementations must respect renamings of
/// process variables; check them with [`naturality_probe`].
pub trait CustomCombinator: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn arity(&self) -> usize;
    fn apply(&self, m: &Monoid, args: &[&Fun]) -> Result<BTreeSet<Fun>, InterpError>;
}

/// The meaning of one weight operator.
#[derive(Clone, Debug)]
pub enum Combinator {
    /// The constantly zero function.
    Zero,
    /// `w` on every support point of the argument.
    PointMass(Weight),
    /// Spreads `r` uniformly over the argument's support.
    Normalize(Weight),
    /// Pointwise sum of two arguments.
    Sum,
    /// `psi(t1)/<psi> * phi(t2)/<phi> * law(<psi>, <phi>)` at `ctor(t1, t2)`.
    RateLaw { ctor: String, law: TotalLaw },
    /// Plugs successors into a template with holes `#0, #1, ...`; the
    /// weight is the product of the weighted holes' weights (times the
    /// coefficient).
    Context { template: Term, holes: Vec<Hole>, coeff: Option<Weight> },
    /// Identity, used to tell apart copies of a variable.
    Colour,
    /// The body (argument 0) unless one of the clauses holds; a clause
    /// holds when every listed argument has the listed total.
    Guard { forbid: Vec<Vec<(usize, Weight)>> },
    /// Set union of two arguments.
    Union,
    Custom(Arc<dyn CustomCombinator>),
}

impl PartialEq for Combinator {
    fn eq(&self, other: &Self) -> bool {
        use Combinator::*;
        match (self, other) {
            (Zero, Zero) | (Sum, Sum) | (Colour, Colour) | (Union, Union) => true,
            (PointMass(a), PointMass(b)) | (Normalize(a), Normalize(b)) => a == b,
            (RateLaw { ctor: c1, law: l1 }, RateLaw { ctor: c2, law: l2 }) => c1 == c2 && l1 == l2,
            (
                Context { template: t1, holes: h1, coeff: c1 },
                Context { template: t2, holes: h2, coeff: c2 },
            ) => t1 == t2 && h1 == h2 && c1 == c2,
            (Guard { forbid: f1 }, Guard { forbid: f2 }) => f1 == f2,
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Combinator {
    /// Number of arguments, if fixed by the combinator itself.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Combinator::Zero => Some(0),
            Combinator::PointMass(_) | Combinator::Normalize(_) | Combinator::Colour => Some(1),
            Combinator::Sum | Combinator::RateLaw { .. } | Combinator::Union => Some(2),
            Combinator::Context { holes, .. } => Some(holes.len()),
            Combinator::Guard { .. } => None,
            Combinator::Custom(c) => Some(c.arity()),
        }
    }

    pub fn format(&self, m: &Monoid) -> String {
        match self {
            Combinator::Zero => "zero".into(),
            Combinator::PointMass(w) => format!("point({})", m.format_weight(w)),
            Combinator::Normalize(w) => format!("normalize({})", m.format_weight(w)),
            Combinator::Sum => "sum".into(),
            Combinator::RateLaw { ctor, law } => {
                let law = match law {
                    TotalLaw::Min => "min",
                    TotalLaw::Product => "product",
                    TotalLaw::Sum => "sum",
                };
                format!("ratelaw({ctor}, {law})")
            }
            Combinator::Context { template, holes, coeff } => {
                let holes: String = holes.iter().map(|h| if *h == Hole::Weighted { 'w' } else { 't' }).collect();
                match coeff {
                    Some(c) => format!("context({template}; {holes}; {})", m.format_weight(c)),
                    None => format!("context({template}; {holes})"),
                }
            }
            Combinator::Colour => "colour".into(),
            Combinator::Guard { forbid } => {
                let clauses: Vec<String> = forbid
                    .iter()
                    .map(|c| {
                        let parts: Vec<String> = c.iter().map(|(i, w)| format!("{i}={}", m.format_weight(w))).collect();
                        format!("{{{}}}", parts.join(", "))
                    })
                    .collect();
                format!("guard({})", clauses.join(" | "))
            }
            Combinator::Union => "union".into(),
            Combinator::Custom(c) => format!("custom:{}", c.name()),
        }
    }

    /// Parses the text produced by [`Combinator::format`]; context
    /// templates are resolved against `sig`.
    pub fn parse(text: &str, m: &Monoid, sig: &Signature) -> Result<Combinator, String> {
        let text = text.trim();
        let (head, body) = match text.find('(') {
            Some(i) if text.ends_with(')') => (text[..i].trim(), Some(&text[i + 1..text.len() - 1])),
            Some(_) => return Err(format!("unbalanced parentheses in `{text}`")),
            None => (text, None),
        };
        let weight = |s: &str| m.parse_weight(s.trim()).map_err(|e| e.to_string());
        let no_body = |c: Combinator| match body {
            None => Ok(c),
            Some(_) => Err(format!("`{head}` takes no parameters")),
        };
        let body_or = |what: &str| body.ok_or_else(|| format!("`{head}` needs {what}"));
        match head {
            "zero" => no_body(Combinator::Zero),
            "sum" => no_body(Combinator::Sum),
            "colour" => no_body(Combinator::Colour),
            "union" => no_body(Combinator::Union),
            "point" => Ok(Combinator::PointMass(weight(body_or("a weight")?)?)),
            "normalize" => Ok(Combinator::Normalize(weight(body_or("a weight")?)?)),
            "ratelaw" => {
                let parts: Vec<&str> = split_top_level(body_or("a constructor and a law")?, ',').into_iter().map(|p| p.1.trim()).collect();
                if parts.len() != 2 {
                    return Err("expected `ratelaw(ctor, min|product|sum)`".into());
                }
                let law = match parts[1] {
                    "min" => TotalLaw::Min,
                    "product" => TotalLaw::Product,
                    "sum" => TotalLaw::Sum,
                    other => return Err(format!("unknown total law `{other}`")),
                };
                Ok(Combinator::RateLaw { ctor: parts[0].chars().filter(|c| !c.is_whitespace()).collect(), law })
            }
            "context" => {
                let parts: Vec<&str> = split_top_level(body_or("a template")?, ';').into_iter().map(|p| p.1.trim()).collect();
                if parts.len() < 2 || parts.len() > 3 {
                    return Err("expected `context(template; holes[; coeff])`".into());
                }
                let template = super::term::parse_term(parts[0], sig, true).map_err(|e| e.message)?;
                let holes = parts[1]
                    .chars()
                    .map(|c| match c {
                        'w' => Ok(Hole::Weighted),
                        't' => Ok(Hole::Term),
                        other => Err(format!("hole kind `{other}` is neither `w` nor `t`")),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let coeff = parts.get(2).map(|c| weight(c)).transpose()?;
                Ok(Combinator::Context { template, holes, coeff })
            }
            "guard" => {
                let mut forbid = Vec::new();
                let body = body.unwrap_or("").trim();
                if !body.is_empty() {
                    for (_, clause) in split_top_level(body, '|') {
                        let clause = clause.trim();
                        let inner = clause
                            .strip_prefix('{')
                            .and_then(|c| c.strip_suffix('}'))
                            .ok_or_else(|| format!("guard clause `{clause}` must be braced"))?;
                        let mut conj = Vec::new();
                        for (_, item) in split_top_level(inner, ',') {
                            if item.trim().is_empty() {
                                continue;
                            }
                            let (i, w) = item.split_once('=').ok_or_else(|| format!("expected `index=weight`, got `{item}`"))?;
                            let i: usize = i.trim().parse().map_err(|_| format!("bad argument index `{i}`"))?;
                            conj.push((i, weight(w)?));
                        }
                        forbid.push(conj);
                    }
                }
                Ok(Combinator::Guard { forbid })
            }
            other => Err(format!("unknown combinator `{other}`")),
        }
    }
}

/// A weight-term interpretation: the weight of process leaves and one
/// combinator per weight operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpretation {
    pub leaf: Weight,
    pub ops: BTreeMap<String, Combinator>,
}

const MAX_COMBINATIONS: usize = 1 << 20;

fn product<'a, T>(sets: &[&'a [T]], op: &str) -> Result<Vec<Vec<&'a T>>, InterpError> {
    let mut total: usize = 1;
    for s in sets {
        total = total.saturating_mul(s.len());
    }
    if total > MAX_COMBINATIONS {
        return Err(InterpError::TooLarge(op.to_string()));
    }
    let mut out: Vec<Vec<&T>> = vec![Vec::new()];
    for s in sets {
        let mut next = Vec::with_capacity(out.len() * s.len());
        for prefix in &out {
            for x in s.iter() {
                let mut v = prefix.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    Ok(out)
}

fn rational(m: &Monoid, op: &str) -> Result<(), InterpError> {
    match m {
        Monoid::RatPlus | Monoid::RatPlusInf => Ok(()),
        _ => Err(InterpError::Domain { op: op.into(), reason: format!("needs rational weights, monoid is {}", m.name()) }),
    }
}

/// `a / b` with `inf / inf = 1` and `finite / inf = 0`.
fn ratio(a: &Weight, b: &Weight, op: &str) -> Result<Weight, InterpError> {
    let dom = |reason: &str| InterpError::Domain { op: op.into(), reason: reason.into() };
    match (a, b) {
        (Weight::Infinity, Weight::Infinity) => Ok(Weight::Rat(BigRational::one())),
        (Weight::Rat(_), Weight::Infinity) => Ok(Weight::Rat(BigRational::zero())),
        (Weight::Rat(x), Weight::Rat(y)) if !y.is_zero() => Ok(Weight::Rat(x / y)),
        _ => Err(dom("division by zero or of infinity by a finite weight")),
    }
}

fn divide_by_count(w: &Weight, n: usize, op: &str) -> Result<Weight, InterpError> {
    match w {
        Weight::Infinity => Ok(Weight::Infinity),
        Weight::Rat(q) => Ok(Weight::Rat(q / BigRational::from_integer(n.into()))),
        _ => Err(InterpError::Domain { op: op.into(), reason: "needs rational weights".into() }),
    }
}

fn min_weight(a: &Weight, b: &Weight) -> Weight {
    match (a, b) {
        (Weight::Infinity, x) | (x, Weight::Infinity) => x.clone(),
        (x, y) => x.min(y).clone(),
    }
}

impl Interpretation {
    pub fn new(leaf: Weight) -> Self {
        Interpretation { leaf, ops: BTreeMap::new() }
    }

    pub fn with(mut self, op: &str, c: Combinator) -> Self {
        self.ops.insert(op.to_string(), c);
        self
    }

    /// Interprets `psi` with weight variables bound by `env`. Process
    /// leaves become point masses of weight `leaf`.
    pub fn eval(&self, m: &Monoid, psi: &WTerm, env: &BTreeMap<String, Fun>) -> Result<BTreeSet<Fun>, InterpError> {
        match psi {
            WTerm::WVar(v) => env
                .get(v)
                .map(|f| BTreeSet::from([f.clone()]))
                .ok_or_else(|| InterpError::UnboundVariable(v.clone())),
            WTerm::Fun(f) => Ok(BTreeSet::from([f.clone()])),
            WTerm::Proc(t) => Ok(BTreeSet::from([WeightFunction::point(m, t.clone(), self.leaf.clone())])),
            WTerm::Op(op, args) => {
                let comb = self.ops.get(op).ok_or_else(|| InterpError::UnknownOperator(op.clone()))?;
                if let Some(n) = comb.arity() {
                    if n != args.len() {
                        return Err(InterpError::Arity { op: op.clone(), expected: n, got: args.len() });
                    }
                }
                let values: Vec<Vec<Fun>> = args
                    .iter()
                    .map(|a| self.eval(m, a, env).map(|s| s.into_iter().collect()))
                    .collect::<Result<_, _>>()?;
                self.apply(m, op, comb, &values)
            }
        }
    }

    fn apply(&self, m: &Monoid, op: &str, comb: &Combinator, args: &[Vec<Fun>]) -> Result<BTreeSet<Fun>, InterpError> {
        match comb {
            Combinator::Union => return Ok(args.iter().flatten().cloned().collect()),
            Combinator::Guard { forbid } => {
                if args.is_empty() {
                    return Err(InterpError::Arity { op: op.into(), expected: 1, got: 0 });
                }
                for clause in forbid {
                    for (i, _) in clause {
                        if *i == 0 || *i >= args.len() {
                            return Err(InterpError::Domain { op: op.into(), reason: format!("guard index {i} out of range") });
                        }
                    }
                }
                let guards: Vec<&[Fun]> = args[1..].iter().map(Vec::as_slice).collect();
                let mut out = BTreeSet::new();
                for combo in product(&guards, op)? {
                    let blocked = forbid.iter().any(|clause| {
                        clause.iter().all(|(i, w)| &combo[i - 1].total_weight(m) == w)
                    });
                    if !blocked {
                        out.extend(args[0].iter().cloned());
                    }
                }
                return Ok(out);
            }
            _ => {}
        }
        let slices: Vec<&[Fun]> = args.iter().map(Vec::as_slice).collect();
        let mut out = BTreeSet::new();
        for combo in product(&slices, op)? {
            match comb {
                Combinator::Custom(c) => out.extend(c.apply(m, &combo)?),
                _ => {
                    out.insert(self.apply_one(m, op, comb, &combo)?);
                }
            }
        }
        Ok(out)
    }

    fn apply_one(&self, m: &Monoid, op: &str, comb: &Combinator, args: &[&Fun]) -> Result<Fun, InterpError> {
        let dom = |reason: String| InterpError::Domain { op: op.into(), reason };
        Ok(match comb {
            Combinator::Zero => WeightFunction::zero(),
            Combinator::Colour => args[0].clone(),
            Combinator::Sum => args[0].add(m, args[1]),
            Combinator::PointMass(w) => WeightFunction::from_pairs(m, args[0].support_iter().map(|t| (t.clone(), w.clone()))),
            Combinator::Normalize(r) => {
                let n = args[0].len();
                if n == 0 {
                    return Ok(WeightFunction::zero());
                }
                let share = if n == 1 { r.clone() } else { divide_by_count(r, n, op)? };
                WeightFunction::from_pairs(m, args[0].support_iter().map(|t| (t.clone(), share.clone())))
            }
            Combinator::RateLaw { ctor, law } => {
                rational(m, op)?;
                let (psi, phi) = (args[0], args[1]);
                if psi.is_empty() || phi.is_empty() {
                    return Ok(WeightFunction::zero());
                }
                let (tp, tf) = (psi.total_weight(m), phi.total_weight(m));
                let scale = match law {
                    TotalLaw::Min => min_weight(&tp, &tf),
                    TotalLaw::Product => m.mul(&tp, &tf)?,
                    TotalLaw::Sum => m.add(&tp, &tf)?,
                };
                let mut pairs = Vec::with_capacity(psi.len() * phi.len());
                for (t1, w1) in psi.iter() {
                    let a = ratio(w1, &tp, op)?;
                    for (t2, w2) in phi.iter() {
                        let b = ratio(w2, &tf, op)?;
                        let w = m.mul(&m.mul(&a, &b)?, &scale)?;
                        pairs.push((Term::app(ctor, vec![t1.clone(), t2.clone()]), w));
                    }
                }
                WeightFunction::from_pairs(m, pairs)
            }
            Combinator::Context { template, holes, coeff } => {
                let weighted = holes.iter().filter(|h| **h == Hole::Weighted).count();
                if weighted + usize::from(coeff.is_some()) == 0 {
                    return Err(dom("context needs a weighted hole or a coefficient".into()));
                }
                let mut choices: Vec<Vec<(Term, Option<Weight>)>> = Vec::with_capacity(holes.len());
                for (k, (h, f)) in holes.iter().zip(args).enumerate() {
                    choices.push(match h {
                        Hole::Weighted => f.iter().map(|(t, w)| (t.clone(), Some(w.clone()))).collect(),
                        Hole::Term => {
                            let mut it = f.support_iter();
                            match (it.next(), it.next()) {
                                (Some(t), None) => vec![(t.clone(), None)],
                                _ => return Err(dom(format!("term hole #{k} needs a single-point argument"))),
                            }
                        }
                    });
                }
                let slices: Vec<&[(Term, Option<Weight>)]> = choices.iter().map(Vec::as_slice).collect();
                let mut pairs = Vec::new();
                for combo in product(&slices, op)? {
                    let sigma: BTreeMap<String, Term> =
                        combo.iter().enumerate().map(|(k, (t, _))| (format!("#{k}"), t.clone())).collect();
                    let mut w = coeff.clone();
                    for (_, wk) in &combo {
                        if let Some(wk) = wk {
                            w = Some(match w {
                                None => wk.clone(),
                                Some(acc) => m.mul(&acc, wk)?,
                            });
                        }
                    }
                    pairs.push((template.substitute(&sigma), w.expect("checked above")));
                }
                WeightFunction::from_pairs(m, pairs)
            }
            Combinator::Union | Combinator::Guard { .. } | Combinator::Custom(_) => unreachable!("handled by apply"),
        })
    }
}

/// `{|psi|}[sigma] = {|psi[sigma]|}` for a renaming `sigma` of process
/// variables, with weight variables bound by `env`.
pub fn naturality_probe(
    m: &Monoid,
    interp: &Interpretation,
    psi: &WTerm,
    env: &BTreeMap<String, Fun>,
    sigma: &BTreeMap<String, String>,
) -> Result<bool, InterpError> {
    let bound = psi.bind(env);
    let lhs: BTreeSet<Fun> = interp
        .eval(m, &bound, &BTreeMap::new())?
        .iter()
        .map(|f| f.map(m, |t| t.rename(sigma)))
        .collect();
    let rhs = interp.eval(m, &bound.rename(m, sigma), &BTreeMap::new())?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Weight {
        Weight::rat(n, d)
    }

    fn pepa_like() -> Interpretation {
        Interpretation::new(Weight::Infinity)
            .with("bot", Combinator::Zero)
            .with("diam[2]", Combinator::Normalize(q(2, 1)))
            .with("oplus", Combinator::Sum)
            .with("par[a]", Combinator::RateLaw { ctor: "coop[a]".into(), law: TotalLaw::Min })
    }

    fn f(pairs: &[(&str, Weight)]) -> Fun {
        WeightFunction::from_pairs(&Monoid::RatPlusInf, pairs.iter().map(|(t, w)| (Term::constant(t), w.clone())))
    }

    fn one(set: BTreeSet<Fun>) -> Fun {
        assert_eq!(set.len(), 1);
        set.into_iter().next().unwrap()
    }

    #[test]
    fn basic_combinators() {
        let m = Monoid::RatPlusInf;
        let i = pepa_like();
        let none = BTreeMap::new();
        assert_eq!(one(i.eval(&m, &WTerm::op("bot", vec![]), &none).unwrap()), WeightFunction::zero());
        let diam = WTerm::op("diam[2]", vec![WTerm::Proc(Term::constant("P"))]);
        assert_eq!(one(i.eval(&m, &diam, &none).unwrap()), f(&[("P", q(2, 1))]));
        let env = BTreeMap::from([("a".to_string(), f(&[("P", q(2, 1))])), ("b".to_string(), f(&[("P", q(3, 1))]))]);
        let sum = WTerm::op("oplus", vec![WTerm::wvar("a"), WTerm::wvar("b")]);
        assert_eq!(one(i.eval(&m, &sum, &env).unwrap()), f(&[("P", q(5, 1))]));
        assert!(matches!(i.eval(&m, &WTerm::wvar("zz"), &none), Err(InterpError::UnboundVariable(_))));
        // normalize on an empty support gives the zero function
        let empty = WTerm::op("diam[2]", vec![WTerm::op("bot", vec![])]);
        assert_eq!(one(i.eval(&m, &empty, &none).unwrap()), WeightFunction::zero());
    }

    #[test]
    fn minimal_rate_law() {
        let m = Monoid::RatPlusInf;
        let i = pepa_like();
        let env = BTreeMap::from([
            ("p".to_string(), f(&[("Q1", q(2, 1)), ("Q2", q(2, 1))])),
            ("r".to_string(), f(&[("R", q(3, 1))])),
        ]);
        let par = WTerm::op("par[a]", vec![WTerm::wvar("p"), WTerm::wvar("r")]);
        let out = one(i.eval(&m, &par, &env).unwrap());
        let t = |a: &str, b: &str| Term::app("coop[a]", vec![Term::constant(a), Term::constant(b)]);
        // totals 4 and 3: each pair gets 1/2 * 1 * 3
        assert_eq!(out.weight(&m, &t("Q1", "R")), q(3, 2));
        assert_eq!(out.total_weight(&m), q(3, 1));
        // against a process leaf the successor weights pass through unchanged
        let solo = WTerm::op("par[a]", vec![WTerm::wvar("p"), WTerm::Proc(Term::constant("S"))]);
        let out = one(i.eval(&m, &solo, &env).unwrap());
        assert_eq!(out.weight(&m, &t("Q1", "S")), q(2, 1));
    }

    #[test]
    fn contexts_and_guards() {
        let m = Monoid::RatPlus;
        let tmpl = Term::app("pair", vec![Term::var("#0"), Term::var("#1")]);
        let i = Interpretation::new(q(1, 1))
            .with("ctx", Combinator::Context { template: tmpl, holes: vec![Hole::Weighted, Hole::Weighted], coeff: Some(q(1, 2)) })
            .with("g", Combinator::Guard { forbid: vec![vec![(1, q(1, 1))]] })
            .with("u", Combinator::Union);
        let g = |pairs: &[(&str, Weight)]| WeightFunction::from_pairs(&m, pairs.iter().map(|(t, w)| (Term::constant(t), w.clone())));
        let env = BTreeMap::from([("d".to_string(), g(&[("x", q(1, 2)), ("y", q(1, 2))]))]);
        let sq = WTerm::op("ctx", vec![WTerm::wvar("d"), WTerm::wvar("d")]);
        let out = one(i.eval(&m, &sq, &env).unwrap());
        assert_eq!(out.len(), 4);
        assert_eq!(out.total_weight(&m), q(1, 2));
        let guarded = WTerm::op("g", vec![WTerm::wvar("d"), WTerm::wvar("d")]);
        assert!(i.eval(&m, &guarded, &env).unwrap().is_empty());
        let env2 = BTreeMap::from([("d".to_string(), g(&[("x", q(1, 3))]))]);
        assert_eq!(i.eval(&m, &guarded, &env2).unwrap().len(), 1);
        let u = WTerm::op("u", vec![WTerm::wvar("d"), WTerm::Proc(Term::constant("z"))]);
        assert_eq!(i.eval(&m, &u, &env).unwrap().len(), 2);
    }

    #[test]
    fn combinator_text_round_trip() {
        let m = Monoid::RatPlus;
        let sig: Signature = [("pair", 2)].into_iter().collect();
        for text in [
            "zero",
            "point(2)",
            "normalize(1/2)",
            "sum",
            "ratelaw(coop[a,b], min)",
            "context(pair(#0, #1); wt; 1/3)",
            "context(pair(#0, #0); w)",
            "colour",
            "guard({1=2, 2=3} | {1=5})",
            "guard()",
            "union",
        ] {
            let c = Combinator::parse(text, &m, &sig).unwrap();
            assert_eq!(c.format(&m), text);
            assert_eq!(Combinator::parse(&c.format(&m), &m, &sig).unwrap(), c);
        }
        assert!(Combinator::parse("frobnicate", &m, &sig).is_err());
        assert!(Combinator::parse("zero(1)", &m, &sig).is_err());
    }

    #[test]
    fn diamond_is_not_natural_on_wide_arguments() {
        // three points spread r/3 each; merging two of them gives 2r/3 on
        // one point, while normalizing after the merge gives r/2
        let m = Monoid::RatPlusInf;
        let i = pepa_like().with("u", Combinator::Sum);
        let psi = WTerm::op(
            "diam[2]",
            vec![WTerm::op("u", vec![WTerm::op("u", vec![WTerm::pvar("x"), WTerm::pvar("y")]), WTerm::pvar("z")])],
        );
        let sigma = BTreeMap::from([("y".to_string(), "x".to_string())]);
        assert!(!naturality_probe(&m, &i, &psi, &BTreeMap::new(), &sigma).unwrap());
        let narrow = WTerm::op("diam[2]", vec![WTerm::pvar("y")]);
        assert!(naturality_probe(&m, &i, &narrow, &BTreeMap::new(), &sigma).unwrap());
    }
}
