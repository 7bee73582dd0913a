//! Compiling weighted GSOS rules into WF-GSOS and checking that the
//! induced system is the weighted LTS the rules describe directly.
//!
//! Run with `cargo run --example wgsos_translation`.

use std::collections::BTreeSet;

use ultras::translations::{parse_wgsos, translate_wgsos, wgsos_semantics};
use ultras::wfgsos::{emit_spec, induce, parse_term};

fn main() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/stochastic.wgsos")).unwrap();
    let source = parse_wgsos(&text).unwrap();
    let spec = translate_wgsos(&source).unwrap();
    println!("{} source rules became {} WF-GSOS rules", source.rules.len(), spec.rules.len());
    for line in emit_spec(&spec).lines().filter(|l| l.starts_with("rule sw")) {
        println!("  {line}");
    }

    let root = parse_term("par(pre(pre(nil)), sw(pre(nil)))", &source.sig, false).unwrap();
    let roots = BTreeSet::from([root]);
    let u = induce(&spec, &roots, 200).unwrap();
    let direct = wgsos_semantics(&source, &roots, 200).unwrap();
    print!("\n{}", u.to_text());
    println!("\nfunctional: {}", u.is_functional().unwrap());
    println!("matches the direct semantics: {}", u.to_wlts().unwrap() == direct);
}
