//! Building a small nondeterministic weighted system by hand, computing
//! its bisimilarity classes and quotient, and checking a relation.
//!
//! Run with `cargo run --example bisimulation`.

use ultras::bisim::{bisimilarity, brute_force_bisimilarity, is_bisimulation, quotient, Relation};
use ultras::{Monoid, Ultras, Weight, WeightFunction};

fn main() {
    let m = Monoid::NatPlus;
    let f = |pairs: &[(&str, u64)]| WeightFunction::from_pairs(&m, pairs.iter().map(|(s, w)| (s.to_string(), Weight::nat(*w))));

    // x and y both offer a 2-weighted step into {u, v}, split differently.
    let mut u = Ultras::new(m.clone(), ["a"]);
    u.add_transition("x".into(), "a", f(&[("u", 1), ("v", 1)])).unwrap();
    u.add_transition("x".into(), "a", f(&[("u", 3)])).unwrap();
    u.add_transition("y".into(), "a", f(&[("v", 2)])).unwrap();
    u.add_transition("y".into(), "a", f(&[("v", 3)])).unwrap();
    u.add_transition("u".into(), "a", WeightFunction::zero()).unwrap();
    u.add_transition("v".into(), "a", WeightFunction::zero()).unwrap();
    print!("{}", u.to_text());

    let classes = bisimilarity(&u).unwrap();
    println!("\nbisimilarity classes:\n{}", classes.to_text());
    assert_eq!(brute_force_bisimilarity(&u).unwrap(), classes.relation());

    let q = quotient(&u, &classes).unwrap();
    println!("quotient:\n{}", q.system.to_text());

    let r: Relation<String, String> = [("x", "y"), ("u", "v")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    println!("{{(x,y), (u,v)}} is a bisimulation: {}", is_bisimulation(&u, &u, &r).unwrap());
}
