//! Monoid predicates and clubs, for built-ins and a table monoid.
//!
//! Run with `cargo run --example monoids`.

use ultras::monoid::{enumerate_clubs, four_element_monoid, is_club, z2_monoid};
use ultras::{Club, Monoid};

fn describe(m: &Monoid) {
    let clubs = match enumerate_clubs(m) {
        Ok(cs) => cs.iter().map(|c| c.format(m)).collect::<Vec<_>>().join(", "),
        Err(e) => format!("({e})"),
    };
    println!(
        "{:<12} positive: {:<5} refinement: {:<5} clubs: {clubs}",
        m.name(),
        m.is_positive(),
        m.is_refinement()
    );
}

fn main() {
    for name in ["bool-or", "nat-plus", "nat-max", "rat-plus", "rat-plus-inf"] {
        describe(&Monoid::builtin(name).expect("built-in"));
    }
    describe(&four_element_monoid());
    describe(&z2_monoid());

    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/m4.table")).unwrap();
    let m4 = Monoid::parse_declaration(&text).unwrap();
    println!("\nparsed from file: {}", m4.declaration());

    let a_only = Club::parse(&m4, "{a}").unwrap();
    println!("is {{a}} a club of m4? {}", is_club(&m4, &a_only).unwrap());
    let nz = Club::NonZero;
    println!("is nonzero a club of nat-plus? {}", is_club(&Monoid::NatPlus, &nz).unwrap());
}
