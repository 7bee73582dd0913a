//! PEPA through its WF-GSOS encoding: CTMC derivation, agreement with the
//! classic rules, strong equivalence and a congruence probe.
//!
//! Run with `cargo run --example pepa`.

use std::collections::BTreeSet;

use num_rational::BigRational;
use ultras::pepa::{
    aggregate, alphabet, classic_sos, coop_op, derive_ctmc, hide_op, parse_pepa, pepa_wfgsos_spec, pre_op, rates_of,
    strong_equivalence, to_term, PepaFile,
};
use ultras::wfgsos::{congruence_probe, Term, HOLE};

fn main() {
    let race = parse_pepa("(a,2).nil + (a,3).nil").unwrap();
    let single = parse_pepa("(a,5).nil").unwrap();
    let u = derive_ctmc(&race, 100).unwrap();
    print!("{}", u.to_text());
    println!("functional: {}", u.is_functional().unwrap());
    println!("race ~ single: {:?}\n", strong_equivalence(&race, &single, 100).unwrap());

    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/server.pepa")).unwrap();
    let file = PepaFile::parse(&text).unwrap();
    let (name, system) = file.main_term().unwrap();
    let u = derive_ctmc(system, 500).unwrap();
    println!("{name}: {} states", u.states().len());
    for s in u.states() {
        assert_eq!(rates_of(&u, s), aggregate(&classic_sos(s)));
    }
    println!("every state agrees with the classic rules");

    // bisimilarity survives contexts; `#` marks the hole
    let partner = parse_pepa("(b,1).nil <a> (a,4).nil").unwrap();
    let l: BTreeSet<String> = BTreeSet::from(["a".to_string()]);
    let mut alpha = alphabet([&race, &single, &partner]);
    alpha.hide.insert(l.clone());
    alpha.coop.insert(l.clone());
    let spec = pepa_wfgsos_spec(&alpha);
    let hole = Term::var(HOLE);
    let contexts = vec![
        Term::app("plus", vec![hole.clone(), Term::constant("nil")]),
        Term::app("plus", vec![to_term(&partner), hole.clone()]),
        Term::app(&hide_op(&l), vec![hole.clone()]),
        Term::app(&coop_op(&l), vec![hole.clone(), to_term(&partner)]),
        Term::app(&pre_op("b", &BigRational::from_integer(7.into())), vec![hole]),
    ];
    let outcome = congruence_probe(&spec, &to_term(&race), &to_term(&single), &contexts, 100).unwrap();
    println!("congruence probe over {} contexts: {outcome:?}", contexts.len());
}
