//! Loading a WF-GSOS specification file, validating it, looking at single
//! steps with the rules that fired, and exploring the induced fragment.
//!
//! Run with `cargo run --example wfgsos_spec`.

use std::collections::BTreeSet;

use ultras::bisim::bisimilarity;
use ultras::wfgsos::{emit_spec, parse_spec};

fn main() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/buffer.spec")).unwrap();
    let spec = parse_spec(&text).unwrap();
    spec.ensure_valid().unwrap();
    println!("{} rules over {} operators", spec.rules.len(), spec.sig.len());

    let engine = spec.engine();
    let c = spec.resolve_root("C").unwrap();
    let outcome = engine.outcome(&c).unwrap();
    for f in &outcome.firings {
        println!("rule {} on `{}` gives {}", f.rule + 1, f.label, f.function.format(&spec.monoid));
    }

    let roots: BTreeSet<_> = spec.processes.values().cloned().collect();
    let u = engine.induce(&roots, 100).unwrap();
    print!("\n{}", u.to_text());
    println!("\nclasses:\n{}", bisimilarity(&u).unwrap().to_text());

    // emitting and re-parsing gives the same specification
    assert_eq!(parse_spec(&emit_spec(&spec)).unwrap(), spec);

    // a non-ground root is rejected
    println!("{}", spec.resolve_root("copy(x)").unwrap_err());
}
