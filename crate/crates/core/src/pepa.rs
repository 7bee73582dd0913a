//! PEPA: terms, the classic multi-transition semantics, and the
//! equivalent WF-GSOS specification whose induced system is the CTMC.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::monoid::{format_rational, parse_rational, Monoid, Weight};
use crate::system::{Label, Ultras};
use crate::wfgsos::{
    Combinator, Engine, Interpretation, Rule, Signature, Specification, Term, TotalLaw, WTerm, WfError,
};

/// The silent action.
pub const TAU: &str = "tau";

#[derive(Debug, Error)]
pub enum PepaError {
    #[error("at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("line {line}: {message}")]
    File { line: usize, message: String },
    #[error("`{0}` is not a PEPA term")]
    NotPepa(String),
    #[error(transparent)]
    Wf(#[from] WfError),
}

pub type LabelSet = BTreeSet<Label>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PepaTerm {
    Nil,
    Prefix(Label, BigRational, Box<PepaTerm>),
    Choice(Box<PepaTerm>, Box<PepaTerm>),
    Coop(Box<PepaTerm>, LabelSet, Box<PepaTerm>),
    Hide(Box<PepaTerm>, LabelSet),
}

impl PepaTerm {
    pub fn prefix(a: &str, r: BigRational, p: PepaTerm) -> Self {
        PepaTerm::Prefix(a.to_string(), r, Box::new(p))
    }

    pub fn choice(p: PepaTerm, q: PepaTerm) -> Self {
        PepaTerm::Choice(Box::new(p), Box::new(q))
    }

    pub fn coop(p: PepaTerm, l: &[&str], q: PepaTerm) -> Self {
        PepaTerm::Coop(Box::new(p), l.iter().map(|s| s.to_string()).collect(), Box::new(q))
    }

    pub fn hide(p: PepaTerm, l: &[&str]) -> Self {
        PepaTerm::Hide(Box::new(p), l.iter().map(|s| s.to_string()).collect())
    }

    pub fn depth(&self) -> usize {
        match self {
            PepaTerm::Nil => 0,
            PepaTerm::Prefix(_, _, p) | PepaTerm::Hide(p, _) => 1 + p.depth(),
            PepaTerm::Choice(p, q) | PepaTerm::Coop(p, _, q) => 1 + p.depth().max(q.depth()),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        let own = match self {
            PepaTerm::Choice(..) => 0,
            PepaTerm::Coop(..) => 1,
            PepaTerm::Hide(..) => 2,
            PepaTerm::Nil | PepaTerm::Prefix(..) => 3,
        };
        if own < level {
            write!(f, "(")?;
        }
        match self {
            PepaTerm::Nil => write!(f, "nil")?,
            PepaTerm::Prefix(a, r, p) => {
                write!(f, "({a},{}).", format_rational(r))?;
                p.fmt_prec(f, 3)?;
            }
            PepaTerm::Choice(p, q) => {
                p.fmt_prec(f, 0)?;
                write!(f, " + ")?;
                q.fmt_prec(f, 1)?;
            }
            PepaTerm::Coop(p, l, q) => {
                p.fmt_prec(f, 1)?;
                if l.is_empty() {
                    write!(f, " || ")?;
                } else {
                    write!(f, " <{}> ", l.iter().cloned().collect::<Vec<_>>().join(","))?;
                }
                q.fmt_prec(f, 2)?;
            }
            PepaTerm::Hide(p, l) => {
                p.fmt_prec(f, 2)?;
                write!(f, " \\ {{{}}}", l.iter().cloned().collect::<Vec<_>>().join(","))?;
            }
        }
        if own < level {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for PepaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Debug for PepaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// ---------------------------------------------------------------- parsing

struct Parser<'a, 'd> {
    text: &'a str,
    pos: usize,
    defs: &'d BTreeMap<String, PepaTerm>,
}

impl Parser<'_, '_> {
    fn err(&self, message: impl Into<String>) -> PepaError {
        PepaError::Syntax { pos: self.pos, message: message.into() }
    }

    fn ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.text[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), PepaError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tok}`")))
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let rest = &self.text[self.pos..];
        let first = rest.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let end = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\'')).unwrap_or(rest.len());
        self.pos += end;
        Some(rest[..end].to_string())
    }

    fn labels(&mut self, close: &str, allow_tau: bool) -> Result<LabelSet, PepaError> {
        let mut out = LabelSet::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            let l = self.ident().ok_or_else(|| self.err("expected an action name"))?;
            if l == TAU && !allow_tau {
                return Err(self.err("`tau` cannot be synchronised on"));
            }
            out.insert(l);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn choice(&mut self) -> Result<PepaTerm, PepaError> {
        let mut t = self.coop()?;
        while self.eat("+") {
            t = PepaTerm::choice(t, self.coop()?);
        }
        Ok(t)
    }

    fn coop(&mut self) -> Result<PepaTerm, PepaError> {
        let mut t = self.hide()?;
        loop {
            let l = if self.eat("||") {
                LabelSet::new()
            } else if self.eat("<") {
                self.labels(">", false)?
            } else {
                return Ok(t);
            };
            t = PepaTerm::Coop(Box::new(t), l, Box::new(self.hide()?));
        }
    }

    fn hide(&mut self) -> Result<PepaTerm, PepaError> {
        let mut t = self.prefix()?;
        while self.eat("\\") {
            self.expect("{")?;
            let l = self.labels("}", false)?;
            t = PepaTerm::Hide(Box::new(t), l);
        }
        Ok(t)
    }

    fn prefix(&mut self) -> Result<PepaTerm, PepaError> {
        self.ws();
        let start = self.pos;
        if self.eat("(") {
            // `(a, r).P` or a parenthesised term
            if let Some(a) = self.ident() {
                if self.eat(",") {
                    self.ws();
                    let rest = &self.text[self.pos..];
                    let end = rest.find(')').ok_or_else(|| self.err("expected `)` after the rate"))?;
                    let rate_pos = self.pos;
                    let r = parse_rational(rest[..end].trim())
                        .ok_or_else(|| PepaError::Syntax { pos: rate_pos, message: format!("bad rate `{}`", rest[..end].trim()) })?;
                    if !r.is_positive() {
                        return Err(PepaError::Syntax { pos: rate_pos, message: "rates must be positive".into() });
                    }
                    self.pos += end + 1;
                    self.expect(".")?;
                    let p = self.prefix()?;
                    return Ok(PepaTerm::Prefix(a, r, Box::new(p)));
                }
            }
            self.pos = start;
            self.expect("(")?;
            let t = self.choice()?;
            self.expect(")")?;
            return Ok(t);
        }
        let name = self.ident().ok_or_else(|| self.err("expected a process"))?;
        if name == "nil" {
            return Ok(PepaTerm::Nil);
        }
        self.defs.get(&name).cloned().ok_or_else(|| PepaError::Syntax { pos: start, message: format!("undefined process `{name}`") })
    }
}

fn parse_with(text: &str, defs: &BTreeMap<String, PepaTerm>) -> Result<PepaTerm, PepaError> {
    let mut p = Parser { text, pos: 0, defs };
    let t = p.choice()?;
    p.ws();
    if p.pos != text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(t)
}

/// Parses a term. Precedence, tightest first: prefix, hiding,
/// cooperation (`<a,b>`, or `||` for the empty set), choice.
pub fn parse_pepa(text: &str) -> Result<PepaTerm, PepaError> {
    parse_with(text, &BTreeMap::new())
}

/// A PEPA source file: definitions `name = term` (later ones may use
/// earlier ones) and an optional `main name`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PepaFile {
    pub defs: BTreeMap<String, PepaTerm>,
    pub order: Vec<String>,
    pub main: Option<String>,
}

impl PepaFile {
    pub fn parse(text: &str) -> Result<PepaFile, PepaError> {
        let mut defs = BTreeMap::new();
        let mut order = Vec::new();
        let mut main = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let err = |message: String| PepaError::File { line: i + 1, message };
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix("main ") {
                main = Some(name.trim().to_string());
                continue;
            }
            let (name, body) = line.split_once('=').ok_or_else(|| err("expected `name = term` or `main name`".into()))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'') || name == "nil" {
                return Err(err(format!("bad process name `{name}`")));
            }
            let t = parse_with(body, &defs).map_err(|e| err(e.to_string()))?;
            if defs.insert(name.to_string(), t).is_some() {
                return Err(err(format!("`{name}` defined twice")));
            }
            order.push(name.to_string());
        }
        if let Some(m) = &main {
            if !defs.contains_key(m) {
                return Err(PepaError::File { line: 0, message: format!("main process `{m}` is not defined") });
            }
        }
        Ok(PepaFile { defs, order, main })
    }

    /// The `main` process, else the last definition.
    pub fn main_term(&self) -> Option<(&str, &PepaTerm)> {
        let name = self.main.as_ref().or(self.order.last())?;
        self.defs.get_key_value(name).map(|(k, v)| (k.as_str(), v))
    }
}

// -------------------------------------------------------- classic semantics

/// Total rate of `a`-actions of `p`. For `tau`, hidden actions count.
pub fn apparent_rate(p: &PepaTerm, a: &str) -> BigRational {
    match p {
        PepaTerm::Nil => BigRational::zero(),
        PepaTerm::Prefix(b, r, _) => {
            if a == b {
                r.clone()
            } else {
                BigRational::zero()
            }
        }
        PepaTerm::Choice(p, q) => apparent_rate(p, a) + apparent_rate(q, a),
        PepaTerm::Coop(p, l, q) => {
            let (x, y) = (apparent_rate(p, a), apparent_rate(q, a));
            if l.contains(a) {
                x.min(y)
            } else {
                x + y
            }
        }
        PepaTerm::Hide(p, l) => {
            if l.contains(a) {
                BigRational::zero()
            } else if a == TAU {
                l.iter().fold(apparent_rate(p, TAU), |acc, b| acc + apparent_rate(p, b))
            } else {
                apparent_rate(p, a)
            }
        }
    }
}

/// Every derivation of the multi-transition rules, one entry per rule
/// instance. Hiding relabels to `tau` and continues with the plain
/// derivative.
pub fn classic_sos(p: &PepaTerm) -> Vec<(Label, BigRational, PepaTerm)> {
    match p {
        PepaTerm::Nil => Vec::new(),
        PepaTerm::Prefix(a, r, q) => vec![(a.clone(), r.clone(), (**q).clone())],
        PepaTerm::Choice(p, q) => {
            let mut v = classic_sos(p);
            v.extend(classic_sos(q));
            v
        }
        PepaTerm::Coop(p1, l, p2) => {
            let (s1, s2) = (classic_sos(p1), classic_sos(p2));
            let mut out = Vec::new();
            for (a, r, q) in &s1 {
                if !l.contains(a) {
                    out.push((a.clone(), r.clone(), PepaTerm::Coop(Box::new(q.clone()), l.clone(), p2.clone())));
                }
            }
            for (a, r, q) in &s2 {
                if !l.contains(a) {
                    out.push((a.clone(), r.clone(), PepaTerm::Coop(p1.clone(), l.clone(), Box::new(q.clone()))));
                }
            }
            for (a, r1, q1) in &s1 {
                if !l.contains(a) {
                    continue;
                }
                let (ra1, ra2) = (apparent_rate(p1, a), apparent_rate(p2, a));
                for (b, r2, q2) in &s2 {
                    if a == b {
                        let rate = (r1 / &ra1) * (r2 / &ra2) * ra1.clone().min(ra2.clone());
                        out.push((a.clone(), rate, PepaTerm::Coop(Box::new(q1.clone()), l.clone(), Box::new(q2.clone()))));
                    }
                }
            }
            out
        }
        PepaTerm::Hide(p, l) => classic_sos(p)
            .into_iter()
            .map(|(a, r, q)| if l.contains(&a) { (TAU.to_string(), r, q) } else { (a, r, q) })
            .collect(),
    }
}

pub type Aggregated = BTreeMap<Label, BTreeMap<PepaTerm, BigRational>>;

/// Sums the rates of [`classic_sos`] per `(label, target)`.
pub fn aggregate(sos: &[(Label, BigRational, PepaTerm)]) -> Aggregated {
    let mut out: Aggregated = BTreeMap::new();
    for (a, r, q) in sos {
        let e = out.entry(a.clone()).or_default().entry(q.clone()).or_insert_with(BigRational::zero);
        *e += r;
    }
    out
}

// ------------------------------------------------------- WF-GSOS encoding

/// Actions, prefix rates, cooperation sets and hiding sets needed to
/// build a finite specification covering some terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    pub labels: LabelSet,
    pub prefixes: BTreeSet<(Label, BigRational)>,
    pub coop: BTreeSet<LabelSet>,
    pub hide: BTreeSet<LabelSet>,
}

impl Alphabet {
    pub fn add(&mut self, p: &PepaTerm) {
        self.labels.insert(TAU.to_string());
        match p {
            PepaTerm::Nil => {}
            PepaTerm::Prefix(a, r, q) => {
                self.labels.insert(a.clone());
                self.prefixes.insert((a.clone(), r.clone()));
                self.add(q);
            }
            PepaTerm::Choice(p, q) => {
                self.add(p);
                self.add(q);
            }
            PepaTerm::Coop(p, l, q) => {
                self.labels.extend(l.iter().cloned());
                self.coop.insert(l.clone());
                self.add(p);
                self.add(q);
            }
            PepaTerm::Hide(p, l) => {
                self.labels.extend(l.iter().cloned());
                self.hide.insert(l.clone());
                self.add(p);
            }
        }
    }

    pub fn rates(&self) -> BTreeSet<&BigRational> {
        self.prefixes.iter().map(|(_, r)| r).collect()
    }
}

/// The alphabet of a collection of terms; always contains `tau`.
pub fn alphabet<'a>(terms: impl IntoIterator<Item = &'a PepaTerm>) -> Alphabet {
    let mut a = Alphabet::default();
    a.labels.insert(TAU.to_string());
    for t in terms {
        a.add(t);
    }
    a
}

fn set_name(l: &LabelSet) -> String {
    l.iter().cloned().collect::<Vec<_>>().join(",")
}

pub fn pre_op(a: &str, r: &BigRational) -> String {
    format!("pre[{a},{}]", format_rational(r))
}

pub fn coop_op(l: &LabelSet) -> String {
    format!("coop[{}]", set_name(l))
}

pub fn hide_op(l: &LabelSet) -> String {
    format!("hide[{}]", set_name(l))
}

pub fn diam_op(r: &BigRational) -> String {
    format!("diam[{}]", format_rational(r))
}

pub fn par_op(l: &LabelSet) -> String {
    format!("par[{}]", set_name(l))
}

fn parse_set(s: &str) -> LabelSet {
    s.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect()
}

/// Encodes a PEPA term as a process-signature term.
pub fn to_term(p: &PepaTerm) -> Term {
    match p {
        PepaTerm::Nil => Term::constant("nil"),
        PepaTerm::Prefix(a, r, q) => Term::app(&pre_op(a, r), vec![to_term(q)]),
        PepaTerm::Choice(p, q) => Term::app("plus", vec![to_term(p), to_term(q)]),
        PepaTerm::Coop(p, l, q) => Term::app(&coop_op(l), vec![to_term(p), to_term(q)]),
        PepaTerm::Hide(p, l) => Term::app(&hide_op(l), vec![to_term(p)]),
    }
}

/// Inverse of [`to_term`].
pub fn from_term(t: &Term) -> Result<PepaTerm, PepaError> {
    let bad = || PepaError::NotPepa(t.to_string());
    let op = t.op().ok_or_else(bad)?;
    let args = t.args();
    let inner = |prefix: &str| op.strip_prefix(prefix).and_then(|r| r.strip_suffix(']'));
    let sub = |i: usize| from_term(&args[i]).map(Box::new);
    Ok(match (op, args.len()) {
        ("nil", 0) => PepaTerm::Nil,
        ("plus", 2) => PepaTerm::Choice(sub(0)?, sub(1)?),
        (_, 1) if inner("pre[").is_some() => {
            let (a, r) = inner("pre[").unwrap().split_once(',').ok_or_else(bad)?;
            PepaTerm::Prefix(a.to_string(), parse_rational(r).ok_or_else(bad)?, sub(0)?)
        }
        (_, 2) if inner("coop[").is_some() => PepaTerm::Coop(sub(0)?, parse_set(inner("coop[").unwrap()), sub(1)?),
        (_, 1) if inner("hide[").is_some() => PepaTerm::Hide(sub(0)?, parse_set(inner("hide[").unwrap())),
        _ => return Err(bad()),
    })
}

/// The WF-GSOS specification of PEPA over `alpha`.
///
/// Rules: the prefix axiom and `bot` axioms for the other actions; `nil`
/// is `bot` on every action; choice sums; cooperation uses the minimal
/// rate law on shared actions and interleaves the others; hiding passes
/// visible actions through, maps hidden ones to `bot` and sums them into
/// `tau`.
pub fn pepa_wfgsos_spec(alpha: &Alphabet) -> Specification {
    let labels: Vec<&Label> = alpha.labels.iter().collect();
    let mut sig = Signature::new();
    let mut wsig = Signature::new();
    let mut interp = Interpretation::new(Weight::Infinity);
    let mut rules = Vec::new();
    let bot = || WTerm::op("bot", vec![]);
    let oplus = |a: WTerm, b: WTerm| WTerm::op("oplus", vec![a, b]);

    sig.insert("nil", 0);
    sig.insert("plus", 2);
    wsig.insert("bot", 0);
    wsig.insert("oplus", 2);
    interp.ops.insert("bot".into(), Combinator::Zero);
    interp.ops.insert("oplus".into(), Combinator::Sum);
    for r in alpha.rates() {
        wsig.insert(&diam_op(r), 1);
        interp.ops.insert(diam_op(r), Combinator::Normalize(Weight::Rat(r.clone())));
    }
    for c in &labels {
        rules.push(Rule::new("nil", &[], c, bot()));
    }
    for (a, r) in &alpha.prefixes {
        let op = pre_op(a, r);
        sig.insert(&op, 1);
        for c in &labels {
            let target = if *c == a { WTerm::op(&diam_op(r), vec![WTerm::pvar("x")]) } else { bot() };
            rules.push(Rule::new(&op, &["x"], c, target));
        }
    }
    for c in &labels {
        rules.push(
            Rule::new("plus", &["x1", "x2"], c, oplus(WTerm::wvar("phi1"), WTerm::wvar("phi2")))
                .with_positive(0, c, "phi1")
                .with_positive(1, c, "phi2"),
        );
    }
    for l in &alpha.coop {
        let op = coop_op(l);
        let par = par_op(l);
        sig.insert(&op, 2);
        wsig.insert(&par, 2);
        interp.ops.insert(par.clone(), Combinator::RateLaw { ctor: op.clone(), law: TotalLaw::Min });
        let p = |a: WTerm, b: WTerm| WTerm::op(&par, vec![a, b]);
        for c in &labels {
            let target = if l.contains(*c) {
                p(WTerm::wvar("phi1"), WTerm::wvar("phi2"))
            } else {
                oplus(p(WTerm::wvar("phi1"), WTerm::pvar("x2")), p(WTerm::pvar("x1"), WTerm::wvar("phi2")))
            };
            rules.push(
                Rule::new(&op, &["x1", "x2"], c, target).with_positive(0, c, "phi1").with_positive(1, c, "phi2"),
            );
        }
    }
    for l in &alpha.hide {
        let op = hide_op(l);
        sig.insert(&op, 1);
        for c in &labels {
            let rule = if l.contains(*c) {
                Rule::new(&op, &["x"], c, bot())
            } else if *c == TAU {
                let mut vars = vec![("tau".to_string(), "phi0".to_string())];
                vars.extend(l.iter().enumerate().map(|(i, a)| (a.clone(), format!("phi{}", i + 1))));
                let target = vars
                    .iter()
                    .rev()
                    .map(|(_, v)| WTerm::wvar(v))
                    .reduce(|acc, v| oplus(v, acc))
                    .expect("non-empty");
                vars.iter().fold(Rule::new(&op, &["x"], c, target), |r, (a, v)| r.with_positive(0, a, v))
            } else {
                Rule::new(&op, &["x"], c, WTerm::wvar("phi")).with_positive(0, c, "phi")
            };
            rules.push(rule);
        }
    }
    Specification {
        monoid: Monoid::RatPlusInf,
        labels: alpha.labels.clone(),
        sig,
        wsig,
        rules,
        interp,
        processes: BTreeMap::new(),
    }
}

/// The specification for `terms`, with each named term recorded as a
/// process.
pub fn spec_for(named: &BTreeMap<String, PepaTerm>) -> Specification {
    let mut s = pepa_wfgsos_spec(&alphabet(named.values()));
    s.processes = named.iter().map(|(k, v)| (k.clone(), to_term(v))).collect();
    s
}

fn to_pepa_system(u: &Ultras<Term>) -> Ultras<PepaTerm> {
    for (_, _, f) in u.iter_transitions() {
        assert!(
            f.iter().all(|(_, w)| matches!(w, Weight::Rat(_))),
            "infinite rate in a derived CTMC"
        );
    }
    u.map_states(|t| from_term(t).expect("states of the PEPA specification are PEPA terms"))
}

/// The functional system reachable from `p`, at most `budget` states
/// explored.
pub fn derive_ctmc(p: &PepaTerm, budget: usize) -> Result<Ultras<PepaTerm>, PepaError> {
    let spec = pepa_wfgsos_spec(&alphabet([p]));
    derive_with(&spec, p, budget)
}

/// As [`derive_ctmc`] with a given (covering) specification.
pub fn derive_with(spec: &Specification, p: &PepaTerm, budget: usize) -> Result<Ultras<PepaTerm>, PepaError> {
    let u = Engine::new(spec).induce(&BTreeSet::from([to_term(p)]), budget)?;
    Ok(to_pepa_system(&u))
}

/// Whether `p` and `q` are strongly equivalent; `None` when a
/// derivation hits the budget.
pub fn strong_equivalence(p: &PepaTerm, q: &PepaTerm, budget: usize) -> Result<Option<bool>, PepaError> {
    let spec = pepa_wfgsos_spec(&alphabet([p, q]));
    Ok(Engine::new(&spec).bisimilar(&to_term(p), &to_term(q), budget)?)
}

/// Rates of `u` as aggregated `label -> target -> rate` per state, for
/// comparison with [`aggregate`].
pub fn rates_of(u: &Ultras<PepaTerm>, s: &PepaTerm) -> Aggregated {
    let mut out: Aggregated = BTreeMap::new();
    for a in u.labels() {
        for f in u.transitions(s, a) {
            for (t, w) in f.iter() {
                if let Weight::Rat(q) = w {
                    out.entry(a.clone()).or_default().insert(t.clone(), q.clone());
                }
            }
        }
    }
    out
}
