//! Interpretations must commute with renaming process variables. The
//! PEPA combinators pass on the terms the encoding produces; spreading
//! a rate over a wide support does not.
//!
//! Run with `cargo run --example naturality`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use ultras::pepa::{alphabet, parse_pepa, pepa_wfgsos_spec};
use ultras::wfgsos::{naturality_probe, Term, WTerm};
use ultras::{Weight, WeightFunction};

fn main() {
    let p = parse_pepa("((a,2).nil <a> (a,3).nil) + (b,1).nil").unwrap();
    let spec = pepa_wfgsos_spec(&alphabet([&p]));
    let m = &spec.monoid;
    let r = |n: i64| Weight::Rat(BigRational::from_integer(n.into()));

    let phi = WeightFunction::from_pairs(m, [(Term::var("y1"), r(2)), (Term::var("y2"), r(1)), (Term::var("y3"), r(1))]);
    let env = BTreeMap::from([("phi".to_string(), phi)]);
    let merge = BTreeMap::from([("y1".to_string(), "z".to_string()), ("y2".to_string(), "z".to_string())]);

    let psi = WTerm::op("par[a]", vec![WTerm::wvar("phi"), WTerm::op("diam[2]", vec![WTerm::pvar("x")])]);
    println!("{}: {}", psi.format(m), naturality_probe(m, &spec.interp, &psi, &env, &merge).unwrap());

    let psi = WTerm::op("oplus", vec![WTerm::wvar("phi"), WTerm::op("bot", vec![])]);
    println!("{}: {}", psi.format(m), naturality_probe(m, &spec.interp, &psi, &env, &merge).unwrap());

    // diam spreads its rate evenly over the support; merging two of three
    // support points changes the share of the third
    let psi = WTerm::op("diam[2]", vec![WTerm::wvar("phi")]);
    println!("{}: {}", psi.format(m), naturality_probe(m, &spec.interp, &psi, &env, &merge).unwrap());
}
