//! The M-function of a bisimilarity partition, validated and checked as
//! an M-bisimulation.
//!
//! Run with `cargo run --example m_functions`.

use ultras::bisim::{bisimilarity, is_m_bisimulation, m_function_from_bisim, validate_m_function};
use ultras::{Monoid, Ultras, Weight, WeightFunction};

fn main() {
    let m = Monoid::BoolOr;
    let f = |targets: &[&str]| WeightFunction::from_pairs(&m, targets.iter().map(|s| (s.to_string(), Weight::Bool(true))));
    let mut u = Ultras::new(m.clone(), ["a"]);
    u.add_transition("s".into(), "a", f(&["t1", "t2"])).unwrap();
    u.add_transition("s".into(), "a", f(&["t1"])).unwrap();
    u.add_transition("r".into(), "a", f(&["t2"])).unwrap();
    u.add_transition("t1".into(), "a", WeightFunction::zero()).unwrap();
    u.add_transition("t2".into(), "a", WeightFunction::zero()).unwrap();

    let p = bisimilarity(&u).unwrap();
    print!("classes:\n{}", p.to_text());
    let mf = m_function_from_bisim(&u, &p).unwrap();
    for x in u.states() {
        for mask in 1..(1u32 << mf.classes().len()) {
            let cs: Vec<String> = mf.class_set(mask).into_iter().collect();
            println!("M({x}, a, {{{}}}) = {:?}", cs.join(","), mf.get(x, "a", mask).unwrap());
        }
    }
    println!("valid: {}", validate_m_function(&mf, &u).unwrap());
    println!("M-bisimulation: {}", is_m_bisimulation(&mf, &u, &p));
}
