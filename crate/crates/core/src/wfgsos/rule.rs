//! Rules: premises, weight-term targets, validation and triggers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::monoid::{is_club, Club, Monoid, Weight};
use crate::system::Label;
use crate::weightfn::WeightFunction;

use super::term::{Signature, Term};

/// A term over the weight signature. Leaves are weight-function
/// variables, process terms (possibly open), or literal weight functions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum WTerm {
    Op(String, Vec<WTerm>),
    WVar(String),
    Proc(Term),
    Fun(WeightFunction<Term>),
}

impl WTerm {
    pub fn op(name: &str, args: Vec<WTerm>) -> Self {
        WTerm::Op(name.to_string(), args)
    }

    pub fn wvar(name: &str) -> Self {
        WTerm::WVar(name.to_string())
    }

    pub fn pvar(name: &str) -> Self {
        WTerm::Proc(Term::var(name))
    }

    /// Weight variables occurring in the term.
    pub fn wvars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let WTerm::WVar(v) = t {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Process variables occurring in process leaves.
    pub fn pvars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let WTerm::Proc(p) = t {
                out.extend(p.vars());
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&WTerm)) {
        f(self);
        if let WTerm::Op(_, args) = self {
            for a in args {
                a.walk(f);
            }
        }
    }

    /// Replaces weight variables by literal functions.
    pub fn bind(&self, theta: &BTreeMap<String, WeightFunction<Term>>) -> WTerm {
        match self {
            WTerm::WVar(v) => theta.get(v).map(|f| WTerm::Fun(f.clone())).unwrap_or_else(|| self.clone()),
            WTerm::Op(op, args) => WTerm::Op(op.clone(), args.iter().map(|a| a.bind(theta)).collect()),
            _ => self.clone(),
        }
    }

    /// Renames process variables in process leaves and, by pushforward,
    /// in literal functions.
    pub fn rename(&self, m: &Monoid, sigma: &BTreeMap<String, String>) -> WTerm {
        match self {
            WTerm::Proc(t) => WTerm::Proc(t.rename(sigma)),
            WTerm::Fun(f) => WTerm::Fun(f.map(m, |t| t.rename(sigma))),
            WTerm::Op(op, args) => WTerm::Op(op.clone(), args.iter().map(|a| a.rename(m, sigma)).collect()),
            WTerm::WVar(_) => self.clone(),
        }
    }

    pub fn format(&self, m: &Monoid) -> String {
        match self {
            WTerm::Op(op, args) if args.is_empty() => op.clone(),
            WTerm::Op(op, args) => {
                let parts: Vec<String> = args.iter().map(|a| a.format(m)).collect();
                format!("{op}({})", parts.join(", "))
            }
            WTerm::WVar(v) => v.clone(),
            WTerm::Proc(t) => t.to_string(),
            WTerm::Fun(f) => f.format(m),
        }
    }
}

/// `x_i -[a]-> phi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positive {
    pub arg: usize,
    pub label: Label,
    pub var: String,
}

/// `x_i -/[b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Negative {
    pub arg: usize,
    pub label: Label,
}

/// `total(phi) = w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalPremise {
    pub var: String,
    pub weight: Weight,
}

/// `club(phi, C) ∋ y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClubPremise {
    pub var: String,
    pub club: Club,
    pub target: String,
}

/// `f(x_1, ..., x_n) -[c]-> psi` with its four premise families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub op: String,
    pub args: Vec<String>,
    pub label: Label,
    pub positive: Vec<Positive>,
    pub negative: Vec<Negative>,
    pub totals: Vec<TotalPremise>,
    pub clubs: Vec<ClubPremise>,
    pub target: WTerm,
}

impl Rule {
    /// An axiom-style rule with no premises.
    pub fn new(op: &str, args: &[&str], label: &str, target: WTerm) -> Self {
        Rule {
            op: op.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
            label: label.to_string(),
            positive: Vec::new(),
            negative: Vec::new(),
            totals: Vec::new(),
            clubs: Vec::new(),
            target,
        }
    }

    pub fn with_positive(mut self, arg: usize, label: &str, var: &str) -> Self {
        self.positive.push(Positive { arg, label: label.into(), var: var.into() });
        self
    }

    pub fn with_negative(mut self, arg: usize, label: &str) -> Self {
        self.negative.push(Negative { arg, label: label.into() });
        self
    }

    pub fn with_total(mut self, var: &str, weight: Weight) -> Self {
        self.totals.push(TotalPremise { var: var.into(), weight });
        self
    }

    pub fn with_club(mut self, var: &str, club: Club, target: &str) -> Self {
        self.clubs.push(ClubPremise { var: var.into(), club, target: target.into() });
        self
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Labels with positive premises on argument `i`.
    pub fn positive_labels(&self, i: usize) -> BTreeSet<&str> {
        self.positive.iter().filter(|p| p.arg == i).map(|p| p.label.as_str()).collect()
    }

    pub fn negative_labels(&self, i: usize) -> BTreeSet<&str> {
        self.negative.iter().filter(|p| p.arg == i).map(|p| p.label.as_str()).collect()
    }

    /// The `(arg, label)` premise binding `var`.
    pub fn premise_of(&self, var: &str) -> Option<&Positive> {
        self.positive.iter().find(|p| p.var == var)
    }

    pub fn source_term(&self) -> Term {
        Term::app(&self.op, self.args.iter().map(|a| Term::var(a)).collect())
    }

    pub fn format(&self, m: &Monoid) -> String {
        let mut premises = Vec::new();
        for p in &self.positive {
            premises.push(format!("{} -[{}]-> {}", self.args[p.arg], p.label, p.var));
        }
        for n in &self.negative {
            premises.push(format!("{} -/[{}]", self.args[n.arg], n.label));
        }
        for t in &self.totals {
            premises.push(format!("total({})={}", t.var, m.format_weight(&t.weight)));
        }
        for c in &self.clubs {
            premises.push(format!("club({}, {}) ni {}", c.var, c.club.format(m), c.target));
        }
        let mut out = format!("{} -[{}]-> {}", self.source_term(), self.label, self.target.format(m));
        if !premises.is_empty() {
            out.push_str(" when ");
            out.push_str(&premises.join(", "));
        }
        out
    }
}

/// A validation finding, tagged with the violated clause.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub clause: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.clause, self.message)
    }
}

pub const OVERLAPPING_PREMISES: &str = "overlapping positive/negative premises";
pub const UNBOUND_TARGET: &str = "unbound target variable";
pub const DUPLICATE_VARIABLE: &str = "duplicate variable";
pub const UNKNOWN_OPERATOR: &str = "unknown operator";
pub const UNKNOWN_LABEL: &str = "unknown label";
pub const ARGUMENT_RANGE: &str = "premise argument out of range";
pub const UNBOUND_WEIGHT_VARIABLE: &str = "unbound weight variable";
pub const CONFLICTING_TOTALS: &str = "conflicting total premises";
pub const INVALID_CLUB: &str = "invalid club";
pub const FOREIGN_WEIGHT: &str = "weight outside monoid";
pub const UNKNOWN_WEIGHT_OPERATOR: &str = "unknown weight operator";
pub const UNINTERPRETED_OPERATOR: &str = "uninterpreted weight operator";

/// Checks a rule against the signatures, label set and monoid.
pub fn validate_rule(
    monoid: &Monoid,
    labels: &BTreeSet<Label>,
    sig: &Signature,
    wsig: &Signature,
    r: &Rule,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut diag = |clause: &'static str, message: String| out.push(Diagnostic { clause, message });
    match sig.arity(&r.op) {
        None => diag(UNKNOWN_OPERATOR, format!("source operator `{}` is not in the process signature", r.op)),
        Some(n) if n != r.arity() => {
            diag(UNKNOWN_OPERATOR, format!("source operator `{}` has arity {n}, rule uses {}", r.op, r.arity()))
        }
        _ => {}
    }
    let check_label = |l: &str, diag: &mut dyn FnMut(&'static str, String)| {
        if !labels.contains(l) {
            diag(UNKNOWN_LABEL, format!("label `{l}` is not declared"));
        }
    };
    check_label(&r.label, &mut diag);
    for p in &r.positive {
        check_label(&p.label, &mut diag);
        if p.arg >= r.arity() {
            diag(ARGUMENT_RANGE, format!("positive premise on argument {}", p.arg + 1));
        }
    }
    for n in &r.negative {
        check_label(&n.label, &mut diag);
        if n.arg >= r.arity() {
            diag(ARGUMENT_RANGE, format!("negative premise on argument {}", n.arg + 1));
        }
    }

    // X, Y and Phi pairwise distinct
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let names = r
        .args
        .iter()
        .chain(r.clubs.iter().map(|c| &c.target))
        .chain(r.positive.iter().map(|p| &p.var));
    for v in names {
        if !seen.insert(v) {
            diag(DUPLICATE_VARIABLE, format!("variable `{v}` is bound twice"));
        }
    }

    for i in 0..r.arity() {
        let both: Vec<&str> = r.positive_labels(i).intersection(&r.negative_labels(i)).copied().collect();
        if !both.is_empty() {
            diag(
                OVERLAPPING_PREMISES,
                format!("argument `{}` has both positive and negative premises on {}", r.args[i], both.join(", ")),
            );
        }
    }

    let phi: BTreeSet<&str> = r.positive.iter().map(|p| p.var.as_str()).collect();
    let mut totals: BTreeMap<&str, &Weight> = BTreeMap::new();
    for t in &r.totals {
        if !phi.contains(t.var.as_str()) {
            diag(UNBOUND_WEIGHT_VARIABLE, format!("total premise on undeclared `{}`", t.var));
        }
        if !monoid.contains(&t.weight) {
            diag(FOREIGN_WEIGHT, format!("total premise weight {:?} for `{}`", t.weight, t.var));
        }
        if let Some(prev) = totals.insert(&t.var, &t.weight) {
            if prev != &t.weight {
                diag(CONFLICTING_TOTALS, format!("`{}` constrained to two different totals", t.var));
            }
        }
    }
    for c in &r.clubs {
        if !phi.contains(c.var.as_str()) {
            diag(UNBOUND_WEIGHT_VARIABLE, format!("club premise on undeclared `{}`", c.var));
        }
        match is_club(monoid, &c.club) {
            Ok(true) => {}
            Ok(false) => diag(INVALID_CLUB, format!("{} is not a club of {}", c.club.format(monoid), monoid.name())),
            Err(e) => diag(INVALID_CLUB, e.to_string()),
        }
    }

    let process_vars: BTreeSet<&str> =
        r.args.iter().chain(r.clubs.iter().map(|c| &c.target)).map(String::as_str).collect();
    for v in r.target.wvars() {
        if !phi.contains(v.as_str()) {
            diag(UNBOUND_TARGET, format!("weight variable `{v}` in target is not bound by a premise"));
        }
    }
    for v in r.target.pvars() {
        if !process_vars.contains(v.as_str()) {
            diag(UNBOUND_TARGET, format!("process variable `{v}` in target is not bound"));
        }
    }
    check_target(&r.target, sig, wsig, &mut diag);
    out.sort();
    out.dedup();
    out
}

fn check_target(t: &WTerm, sig: &Signature, wsig: &Signature, diag: &mut impl FnMut(&'static str, String)) {
    match t {
        WTerm::Op(op, args) => {
            match wsig.arity(op) {
                None => diag(UNKNOWN_WEIGHT_OPERATOR, format!("`{op}` is not in the weight signature")),
                Some(n) if n != args.len() => diag(
                    UNKNOWN_WEIGHT_OPERATOR,
                    format!("`{op}` expects {n} arguments, got {}", args.len()),
                ),
                _ => {}
            }
            for a in args {
                check_target(a, sig, wsig, diag);
            }
        }
        WTerm::Proc(p) => {
            if let Err(e) = p.check(sig) {
                diag(UNKNOWN_OPERATOR, format!("in target process term: {e}"));
            }
        }
        WTerm::WVar(_) | WTerm::Fun(_) => {}
    }
}

/// Enabled labels per argument and observed totals, aligned with the
/// rule's total premises.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Trigger {
    pub enabled: Vec<BTreeSet<Label>>,
    pub weights: Vec<Weight>,
}

/// `A_i ⊆ C_i`, `B_i ∩ C_i = ∅` and `w_j = v_j` for all `i`, `j`.
pub fn rule_triggered(r: &Rule, t: &Trigger) -> bool {
    if t.enabled.len() != r.arity() || t.weights.len() != r.totals.len() {
        return false;
    }
    let labels_ok = r.positive.iter().all(|p| t.enabled[p.arg].contains(&p.label))
        && r.negative.iter().all(|n| !t.enabled[n.arg].contains(&n.label));
    labels_ok && r.totals.iter().zip(&t.weights).all(|(p, v)| &p.weight == v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> (Monoid, BTreeSet<Label>, Signature, Signature) {
        (
            Monoid::RatPlusInf,
            ["a", "b", "c"].into_iter().map(String::from).collect(),
            [("plus", 2), ("nil", 0)].into_iter().collect(),
            [("oplus", 2), ("bot", 0)].into_iter().collect(),
        )
    }

    fn choice(label: &str) -> Rule {
        Rule::new(
            "plus",
            &["x1", "x2"],
            label,
            WTerm::op("oplus", vec![WTerm::wvar("phi1"), WTerm::wvar("phi2")]),
        )
        .with_positive(0, label, "phi1")
        .with_positive(1, label, "phi2")
    }

    fn clauses(d: &[Diagnostic]) -> Vec<&str> {
        d.iter().map(|d| d.clause).collect()
    }

    #[test]
    fn well_formed_choice_rule() {
        let (m, l, s, w) = env();
        assert!(validate_rule(&m, &l, &s, &w, &choice("a")).is_empty());
    }

    #[test]
    fn overlapping_premises() {
        let (m, l, s, w) = env();
        let r = choice("a").with_negative(0, "a");
        assert_eq!(clauses(&validate_rule(&m, &l, &s, &w, &r)), vec![OVERLAPPING_PREMISES]);
    }

    #[test]
    fn unbound_target() {
        let (m, l, s, w) = env();
        let mut r = choice("a");
        r.target = WTerm::op("oplus", vec![WTerm::wvar("phi1"), WTerm::pvar("z")]);
        assert_eq!(clauses(&validate_rule(&m, &l, &s, &w, &r)), vec![UNBOUND_TARGET]);
        r.target = WTerm::op("oplus", vec![WTerm::wvar("phi1"), WTerm::pvar("x2")]);
        assert!(validate_rule(&m, &l, &s, &w, &r).is_empty());
    }

    #[test]
    fn other_clauses() {
        let (m, l, s, w) = env();
        let dup = choice("a").with_positive(1, "b", "phi1");
        assert!(clauses(&validate_rule(&m, &l, &s, &w, &dup)).contains(&DUPLICATE_VARIABLE));
        let bad_club = choice("a").with_club("phi1", Club::Elements([Weight::int(2)].into()), "y");
        assert!(clauses(&validate_rule(&m, &l, &s, &w, &bad_club)).contains(&INVALID_CLUB));
        let ok_club = choice("a").with_club("phi1", Club::NonZero, "y");
        assert!(validate_rule(&m, &l, &s, &w, &ok_club).is_empty());
        let bad_label = choice("d");
        assert!(clauses(&validate_rule(&m, &l, &s, &w, &bad_label)).contains(&UNKNOWN_LABEL));
        let conflicting = choice("a").with_total("phi1", Weight::int(1)).with_total("phi1", Weight::int(2));
        assert!(clauses(&validate_rule(&m, &l, &s, &w, &conflicting)).contains(&CONFLICTING_TOTALS));
        let mut unknown_op = choice("a");
        unknown_op.target = WTerm::op("otimes", vec![]);
        assert!(clauses(&validate_rule(&m, &l, &s, &w, &unknown_op)).contains(&UNKNOWN_WEIGHT_OPERATOR));
    }

    #[test]
    fn triggers() {
        let r = Rule::new("plus", &["x1", "x2"], "a", WTerm::op("bot", vec![]))
            .with_positive(0, "a", "phi")
            .with_negative(0, "c")
            .with_total("phi", Weight::int(2));
        let enabled = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<BTreeSet<_>>();
        let t = Trigger { enabled: vec![enabled(&["a", "b"]), enabled(&[])], weights: vec![Weight::int(2)] };
        assert!(rule_triggered(&r, &t));
        let blocked = Trigger { enabled: vec![enabled(&["a", "c"]), enabled(&[])], ..t.clone() };
        assert!(!rule_triggered(&r, &blocked));
        let heavier = Trigger { weights: vec![Weight::int(3)], ..t.clone() };
        assert!(!rule_triggered(&r, &heavier));
        let wrong_arity = Trigger { enabled: vec![enabled(&["a"])], ..t };
        assert!(!rule_triggered(&r, &wrong_arity));
    }
}
