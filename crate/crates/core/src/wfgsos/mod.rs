//! WF-GSOS specifications: rules over a process signature, weight terms
//! over a weight signature, and an interpretation of the latter.
//!
//! A specification induces a system over ground process terms.
//! [`Engine::one_step`] computes the transitions of one term from those of
//! its subterms, and [`induce`] explores the reachable fragment.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::bisim::BisimError;
use crate::monoid::{Monoid, MonoidError};
use crate::system::{Label, SystemError};
use crate::weightfn::WeightFnError;

pub mod induce;
pub mod interp;
pub mod parse;
pub mod rule;
pub mod term;

pub use induce::{congruence_probe, induce, one_step, plug, Engine, Firing, Outcome, ProbeOutcome, HOLE};
pub use interp::{naturality_probe, Combinator, CustomCombinator, Fun, Hole, InterpError, Interpretation, TotalLaw};
pub use parse::{emit_spec, parse_spec, ParseError};
pub use rule::{rule_triggered, validate_rule, ClubPremise, Diagnostic, Negative, Positive, Rule, TotalPremise, Trigger, WTerm};
pub use term::{parse_term, Signature, Term};

#[derive(Debug, Error)]
pub enum WfError {
    #[error("term `{0}` is not ground")]
    NotGround(String),
    #[error("budget {budget} is smaller than the {roots} roots")]
    Budget { budget: usize, roots: usize },
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Bisim(#[from] BisimError),
    #[error(transparent)]
    WeightFn(#[from] WeightFnError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid specification: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// Monoid, labels, both signatures, rules in file order and the
/// interpretation of the weight signature. `processes` names ground
/// terms so that tools can refer to roots by name.
#[derive(Clone, Debug, PartialEq)]
pub struct Specification {
    pub monoid: Monoid,
    pub labels: BTreeSet<Label>,
    pub sig: Signature,
    pub wsig: Signature,
    pub rules: Vec<Rule>,
    pub interp: Interpretation,
    pub processes: BTreeMap<String, Term>,
}

pub const SHARED_NAME: &str = "operator in both signatures";
pub const ARITY_MISMATCH: &str = "combinator arity mismatch";
pub const INVALID_COMBINATOR: &str = "invalid combinator";
pub const NON_GROUND_PROCESS: &str = "non-ground process";

impl Specification {
    pub fn validate_rule(&self, r: &Rule) -> Vec<Diagnostic> {
        validate_rule(&self.monoid, &self.labels, &self.sig, &self.wsig, r)
    }

    /// Every rule well-formed, every weight operator interpreted by a
    /// combinator of matching arity, and no stray interpretations.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = Vec::new();
        let mut diag = |clause: &'static str, message: String| out.push(Diagnostic { clause, message });
        for (name, _) in self.sig.iter() {
            if self.wsig.contains(name) {
                diag(SHARED_NAME, format!("`{name}` is both a process and a weight operator"));
            }
        }
        if !self.monoid.contains(&self.interp.leaf) {
            diag(rule::FOREIGN_WEIGHT, format!("leaf weight {:?}", self.interp.leaf));
        }
        for (name, n) in self.wsig.iter() {
            let Some(c) = self.interp.ops.get(name) else {
                diag(rule::UNINTERPRETED_OPERATOR, format!("`{name}` has no combinator"));
                continue;
            };
            match c.arity() {
                Some(k) if k != n => diag(ARITY_MISMATCH, format!("`{name}` has arity {n}, its combinator takes {k}")),
                None if n == 0 => diag(ARITY_MISMATCH, format!("guard `{name}` needs a body argument")),
                _ => {}
            }
            match c {
                Combinator::RateLaw { ctor, .. } if self.sig.arity(ctor) != Some(2) => {
                    diag(INVALID_COMBINATOR, format!("`{name}`: `{ctor}` is not a binary process operator"))
                }
                Combinator::Context { template, holes, .. } => {
                    if let Err(e) = template.check(&self.sig) {
                        diag(INVALID_COMBINATOR, format!("`{name}`: {e}"));
                    }
                    for v in template.vars() {
                        let ok = v.strip_prefix('#').and_then(|k| k.parse::<usize>().ok()).is_some_and(|k| k < holes.len());
                        if !ok {
                            diag(INVALID_COMBINATOR, format!("`{name}`: template variable `{v}` is not a hole"));
                        }
                    }
                }
                Combinator::Guard { forbid } => {
                    for (i, w) in forbid.iter().flatten() {
                        if *i == 0 || *i >= n {
                            diag(INVALID_COMBINATOR, format!("`{name}`: guard index {i} out of range"));
                        }
                        if !self.monoid.contains(w) {
                            diag(rule::FOREIGN_WEIGHT, format!("`{name}`: guard weight {w:?}"));
                        }
                    }
                }
                Combinator::PointMass(w) | Combinator::Normalize(w) if !self.monoid.contains(w) => {
                    diag(rule::FOREIGN_WEIGHT, format!("`{name}`: weight {w:?}"))
                }
                _ => {}
            }
        }
        for name in self.interp.ops.keys() {
            if !self.wsig.contains(name) {
                diag(rule::UNKNOWN_WEIGHT_OPERATOR, format!("combinator for undeclared `{name}`"));
            }
        }
        for (name, t) in &self.processes {
            if let Err(e) = t.check(&self.sig) {
                out.push(Diagnostic { clause: rule::UNKNOWN_OPERATOR, message: format!("process `{name}`: {e}") });
            } else if !t.is_ground() {
                out.push(Diagnostic { clause: NON_GROUND_PROCESS, message: format!("process `{name}` = {t} has variables") });
            }
        }
        for (i, r) in self.rules.iter().enumerate() {
            for d in self.validate_rule(r) {
                out.push(Diagnostic { clause: d.clause, message: format!("rule {}: {}", i + 1, d.message) });
            }
        }
        out
    }

    /// Fails with all diagnostics unless the specification validates.
    pub fn ensure_valid(&self) -> Result<(), WfError> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(WfError::Invalid(d))
        }
    }

    /// A named process, or a ground term over the process signature.
    pub fn resolve_root(&self, text: &str) -> Result<Term, WfError> {
        if let Some(t) = self.processes.get(text.trim()) {
            return Ok(t.clone());
        }
        let t = parse_term(text, &self.sig, true).map_err(|e| ParseError { line: 1, col: e.pos + 1, message: e.message })?;
        if !t.is_ground() {
            return Err(WfError::NotGround(t.to_string()));
        }
        Ok(t)
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(self)
    }
}
