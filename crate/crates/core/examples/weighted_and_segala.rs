//! Functional systems and weighted bisimulation, and Segala systems with
//! their probabilistic bisimulation, checked against the general notion.
//!
//! Run with `cargo run --example weighted_and_segala`.

use ultras::bisim::{is_bisimulation, segala_bisim_check, weighted_bisim_check, Relation};
use ultras::{Monoid, Ultras, Weight, WeightFunction, Wlts};

fn rel(pairs: &[(&str, &str)]) -> Relation<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn main() {
    // a weighted LTS: p splits 4 over q1/q2, r sends 4 to q1 alone
    let m = Monoid::RatPlus;
    let mut w = Wlts::new(m.clone(), ["a"]);
    for s in ["p", "r", "q1", "q2"] {
        w.add_state(s.to_string());
    }
    w.set_weight("p".into(), "a", "q1".into(), Weight::int(1)).unwrap();
    w.set_weight("p".into(), "a", "q2".into(), Weight::int(3)).unwrap();
    w.set_weight("r".into(), "a", "q1".into(), Weight::int(4)).unwrap();
    let u = Ultras::from_wlts(&w);
    println!("functional: {}", u.is_functional().unwrap());
    let r = rel(&[("p", "r"), ("q1", "q1"), ("q1", "q2"), ("q2", "q1"), ("q2", "q2"), ("r", "p")]);
    println!(
        "weighted check: {}, general check: {}",
        weighted_bisim_check(&w, &w, &r).unwrap(),
        is_bisimulation(&u, &u, &r).unwrap()
    );

    // a Segala system: a fair coin against a biased one
    let d = |pairs: &[(&str, i64, i64)]| {
        WeightFunction::from_pairs(&m, pairs.iter().map(|(s, n, k)| (s.to_string(), Weight::rat(*n, *k))))
    };
    let mut s = Ultras::new(m.clone(), ["flip"]);
    s.add_transition("fair".into(), "flip", d(&[("h", 1, 2), ("t", 1, 2)])).unwrap();
    s.add_transition("biased".into(), "flip", d(&[("h", 3, 4), ("t", 1, 4)])).unwrap();
    s.add_transition("biased".into(), "flip", d(&[("h", 1, 4), ("t", 3, 4)])).unwrap();
    println!("\nSegala system: {}", s.check_segala().unwrap());
    let r = rel(&[("h", "t"), ("t", "h"), ("h", "h"), ("t", "t")]);
    println!(
        "heads ~ tails: segala {}, general {}",
        segala_bisim_check(&s, &s, &r).unwrap(),
        is_bisimulation(&s, &s, &r).unwrap()
    );
    let r = rel(&[("fair", "biased"), ("h", "h"), ("t", "t")]);
    println!(
        "fair ~ biased: segala {}, general {}",
        segala_bisim_check(&s, &s, &r).unwrap(),
        is_bisimulation(&s, &s, &r).unwrap()
    );
}
