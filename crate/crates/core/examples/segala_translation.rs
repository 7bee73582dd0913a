//! Compiling Segala-GSOS rules into WF-GSOS: distributions are combined by
//! products of independent samples, support premises become clubs.
//!
//! Run with `cargo run --example segala_translation`.

use std::collections::BTreeSet;

use ultras::translations::{parse_sgsos, translate_segala};
use ultras::wfgsos::{induce, parse_term};

fn main() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/coins.sgsos")).unwrap();
    let source = parse_sgsos(&text).unwrap();
    let spec = translate_segala(&source).unwrap();
    for r in &spec.rules {
        println!("{}", r.format(&spec.monoid));
    }
    let root = parse_term("two(coin)", &source.sig, false).unwrap();
    let u = induce(&spec, &BTreeSet::from([root]), 50).unwrap();
    print!("\n{}", u.to_text());
    println!("\nSegala system: {}", u.check_segala().unwrap());
}
