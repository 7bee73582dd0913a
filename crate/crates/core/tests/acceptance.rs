//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the report is always printed; any failing criterion makes
//! the target fail.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ultras::bisim::{
    bisimilarity, brute_force_bisimilarity, is_bisimulation, is_m_bisimulation, largest_bisimulation,
    m_function_from_bisim, segala_bisim_check, validate_m_function, weighted_bisim_check, Relation,
};
use ultras::monoid::{enumerate_clubs, four_element_monoid, is_club, z2_monoid, TableMonoid};
use ultras::pepa::{
    aggregate, alphabet, classic_sos, coop_op, derive_ctmc, diam_op, hide_op, par_op, pepa_wfgsos_spec, pre_op,
    rates_of, strong_equivalence, to_term, Alphabet, PepaTerm,
};
use ultras::translations::{explored_wlts, translate_wgsos, wgsos_semantics, TransPremise, WeightPremise, WgsosRule, WgsosSpec};
use ultras::wfgsos::{congruence_probe, induce, naturality_probe, Fun, ProbeOutcome, Signature, Term, WTerm, HOLE};
use ultras::{Club, Monoid, Ultras, Weight, WeightFunction, Wlts};

type Check = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Check, u64); 10] = [
        ("largest bisimulation equals the brute-force union", c1, 60),
        ("functional: general and weighted bisimulation coincide", c2, 60),
        ("Segala: general and probabilistic bisimulation coincide", c3, 60),
        ("M-functions of bisimilarity partitions", c4, 60),
        ("PEPA derivation matches the classic rules", c5, 120),
        ("PEPA systems are functional; race example", c6, 60),
        ("congruence probe on bisimilar PEPA pairs", c7, 300),
        ("naturality of the PEPA interpretation", c8, 60),
        ("W-GSOS translation fidelity", c9, 300),
        ("monoid predicates and clubs", c10, 60),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > Duration::from_secs(*limit) => Err(format!("{d}; took longer than {limit} s")),
            other => other,
        };
        let secs = elapsed.as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1} s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ------------------------------------------------------------ generators

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn random_weight(rng: &mut ChaCha8Rng, m: &Monoid) -> Weight {
    match m {
        Monoid::BoolOr => Weight::Bool(rng.gen_bool(0.5)),
        Monoid::NatPlus => Weight::nat(rng.gen_range(0..=3)),
        _ => Weight::rat(rng.gen_range(0..=12), 4),
    }
}

fn random_function(rng: &mut ChaCha8Rng, m: &Monoid, states: &[String]) -> WeightFunction<String> {
    WeightFunction::from_pairs(m, states.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect::<Vec<_>>().into_iter().map(|s| (s, random_weight(rng, m))))
}

const LABELS: [&str; 3] = ["a", "b", "c"];

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A fully explored nondeterministic system; each (state, label) has 0 to
/// 2 transitions. Half the time a state copies another's behaviour to
/// make non-trivial bisimulations likely.
fn random_ultras(rng: &mut ChaCha8Rng, m: &Monoid, n: usize, labels: usize, prefix: &str) -> Ultras<String> {
    let states = names(prefix, n);
    let mut u = Ultras::new(m.clone(), LABELS[..labels].iter().copied());
    let mut rows: Vec<Vec<Vec<WeightFunction<String>>>> = Vec::new();
    for i in 0..n {
        if i > 0 && rng.gen_bool(0.3) {
            let j = rng.gen_range(0..i);
            rows.push(rows[j].clone());
            continue;
        }
        rows.push((0..labels).map(|_| (0..rng.gen_range(0..=2)).map(|_| random_function(rng, m, &states)).collect()).collect());
    }
    for (i, s) in states.iter().enumerate() {
        u.add_state(s.clone());
        for (l, fs) in rows[i].iter().enumerate() {
            for f in fs {
                u.add_transition(s.clone(), LABELS[l], f.clone()).unwrap();
            }
        }
    }
    u
}

fn random_monoid(rng: &mut ChaCha8Rng) -> Monoid {
    [Monoid::BoolOr, Monoid::NatPlus, Monoid::RatPlus].choose(rng).unwrap().clone()
}

/// Every relation between the states of two systems (at most 2^12).
fn all_relations(xs: &[String], ys: &[String]) -> Vec<Relation<String, String>> {
    let pairs: Vec<(String, String)> = xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))).collect();
    assert!(pairs.len() <= 12);
    (0u32..(1 << pairs.len()))
        .map(|mask| pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect())
        .collect()
}

// ------------------------------------------------------------- criteria

fn c1_instances() -> Vec<Ultras<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..600)
        .map(|_| {
            let m = random_monoid(&mut rng);
            let n = rng.gen_range(1..=6);
            let labels = rng.gen_range(1..=2);
            random_ultras(&mut rng, &m, n, labels, "s")
        })
        .collect()
}

fn c1() -> Result<String, String> {
    let instances = c1_instances();
    let mut nontrivial = 0;
    let mut exhaustive = 0;
    for (k, u) in instances.iter().enumerate() {
        let part = largest_bisimulation(u, u).map_err(|e| e.to_string())?;
        let computed = part.cross_relation();
        let states: Vec<String> = u.states().iter().cloned().collect();
        // every relation for small systems, every equivalence otherwise
        let oracle = if states.len() <= 3 {
            exhaustive += 1;
            let mut union = Relation::new();
            for r in all_relations(&states, &states) {
                if is_bisimulation(u, u, &r).unwrap() {
                    union = union.union(&r);
                }
            }
            union
        } else {
            brute_force_bisimilarity(u).unwrap()
        };
        ensure(computed == oracle, || format!("instance {k} differs:\n{}", u.to_text()))?;
        ensure(bisimilarity(u).unwrap().relation() == oracle, || format!("instance {k}: bisimilarity differs"))?;
        if oracle.len() > states.len() {
            nontrivial += 1;
        }
    }
    Ok(format!("{} systems ({exhaustive} over all relations, {nontrivial} with non-trivial bisimilarity)", instances.len()))
}

fn random_wlts(rng: &mut ChaCha8Rng, m: &Monoid, n: usize, labels: usize, prefix: &str) -> Wlts<String> {
    let states = names(prefix, n);
    let mut w = Wlts::new(m.clone(), LABELS[..labels].iter().copied());
    for s in &states {
        w.add_state(s.clone());
    }
    for s in &states {
        for a in &LABELS[..labels] {
            w.set_row(s.clone(), a, random_function(rng, m, &states)).unwrap();
        }
    }
    w
}

fn c2() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut relations, mut bisims) = (0usize, 0usize);
    let count = 250;
    for k in 0..count {
        let m = random_monoid(&mut rng);
        let n1 = rng.gen_range(1..=3);
        let n2 = rng.gen_range(1..=5 - n1);
        let labels = rng.gen_range(1..=2);
        let w1 = random_wlts(&mut rng, &m, n1, labels, "x");
        let w2 = random_wlts(&mut rng, &m, n2, labels, "y");
        let (u1, u2) = (Ultras::from_wlts(&w1), Ultras::from_wlts(&w2));
        let xs: Vec<String> = w1.states().iter().cloned().collect();
        let ys: Vec<String> = w2.states().iter().cloned().collect();
        for r in all_relations(&xs, &ys) {
            let general = is_bisimulation(&u1, &u2, &r).unwrap();
            let weighted = weighted_bisim_check(&w1, &w2, &r).unwrap();
            ensure(general == weighted, || format!("instance {k}, relation {r:?}: general {general}, weighted {weighted}"))?;
            relations += 1;
            bisims += usize::from(general);
        }
    }
    Ok(format!("{count} instance pairs, {relations} relations, {bisims} bisimulations"))
}

fn random_distribution(rng: &mut ChaCha8Rng, states: &[String]) -> WeightFunction<String> {
    let size = rng.gen_range(1..=states.len().min(3));
    let support: Vec<&String> = states.choose_multiple(rng, size).collect();
    // split 8 eighths, each support point at least one
    let mut parts = vec![1i64; size];
    for _ in 0..(8 - size) {
        parts[rng.gen_range(0..size)] += 1;
    }
    WeightFunction::from_pairs(&Monoid::RatPlus, support.into_iter().zip(parts).map(|(s, k)| (s.clone(), Weight::rat(k, 8))))
}

fn random_segala(rng: &mut ChaCha8Rng, n: usize, labels: usize, prefix: &str) -> Ultras<String> {
    let states = names(prefix, n);
    let mut u = Ultras::new(Monoid::RatPlus, LABELS[..labels].iter().copied());
    for s in &states {
        u.add_state(s.clone());
        for a in &LABELS[..labels] {
            for _ in 0..rng.gen_range(0..=2) {
                u.add_transition(s.clone(), a, random_distribution(rng, &states)).unwrap();
            }
        }
    }
    u
}

fn c3() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut relations, mut bisims) = (0usize, 0usize);
    let count = 250;
    for k in 0..count {
        let n1 = rng.gen_range(1..=3);
        let n2 = rng.gen_range(1..=5 - n1);
        let labels = rng.gen_range(1..=2);
        let u1 = random_segala(&mut rng, n1, labels, "x");
        let u2 = random_segala(&mut rng, n2, labels, "y");
        ensure(u1.check_segala().unwrap() && u2.check_segala().unwrap(), || "generator produced a non-Segala system".into())?;
        let xs: Vec<String> = u1.states().iter().cloned().collect();
        let ys: Vec<String> = u2.states().iter().cloned().collect();
        for r in all_relations(&xs, &ys) {
            let general = is_bisimulation(&u1, &u2, &r).unwrap();
            let segala = segala_bisim_check(&u1, &u2, &r).unwrap();
            ensure(general == segala, || format!("instance {k}, relation {r:?}: general {general}, segala {segala}"))?;
            relations += 1;
            bisims += usize::from(general);
        }
    }
    Ok(format!("{count} instance pairs, {relations} relations, {bisims} bisimulations"))
}

fn single_kind_termination(u: &Ultras<String>) -> bool {
    u.labels().iter().all(|a| {
        let stuck = u.states().iter().any(|x| u.is_stuck(x, a));
        let terminal = u.states().iter().any(|x| u.is_terminal(x, a));
        !(stuck && terminal)
    })
}

fn c4() -> Result<String, String> {
    let mut checked = 0;
    for (k, u) in c1_instances().iter().enumerate() {
        if !single_kind_termination(u) {
            continue;
        }
        let p = bisimilarity(u).unwrap();
        let f = m_function_from_bisim(u, &p).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(validate_m_function(&f, u).unwrap(), || format!("instance {k}: M-function does not validate"))?;
        ensure(is_m_bisimulation(&f, u, &p), || format!("instance {k}: partition is not an M-bisimulation"))?;
        checked += 1;
    }
    ensure(checked >= 100, || format!("only {checked} eligible systems"))?;
    Ok(format!("{checked} partitions"))
}

const RATES: [(i64, i64); 4] = [(1, 1), (2, 1), (3, 1), (1, 2)];

fn random_rate(rng: &mut ChaCha8Rng) -> BigRational {
    let (n, d) = *RATES.choose(rng).unwrap();
    q(n, d)
}

fn random_set(rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    LABELS.iter().copied().filter(|_| rng.gen_bool(0.4)).collect()
}

fn random_pepa(rng: &mut ChaCha8Rng, depth: usize) -> PepaTerm {
    let a = *LABELS.choose(rng).unwrap();
    if depth == 0 {
        return if rng.gen_bool(0.2) { PepaTerm::Nil } else { PepaTerm::prefix(a, random_rate(rng), PepaTerm::Nil) };
    }
    match rng.gen_range(0..10) {
        0 => PepaTerm::Nil,
        1..=3 => PepaTerm::prefix(a, random_rate(rng), random_pepa(rng, depth - 1)),
        4..=5 => PepaTerm::choice(random_pepa(rng, depth - 1), random_pepa(rng, depth - 1)),
        6..=8 => {
            let l = random_set(rng);
            PepaTerm::coop(random_pepa(rng, depth - 1), &l, random_pepa(rng, depth - 1))
        }
        _ => {
            let l = random_set(rng);
            PepaTerm::hide(random_pepa(rng, depth - 1), &l)
        }
    }
}

fn c5_terms() -> Vec<PepaTerm> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..150).map(|_| random_pepa(&mut rng, 3)).collect()
}

/// States reachable under the classic rules.
fn classic_reachable(p: &PepaTerm) -> BTreeSet<PepaTerm> {
    let mut seen = BTreeSet::from([p.clone()]);
    let mut queue = VecDeque::from([p.clone()]);
    while let Some(s) = queue.pop_front() {
        for (_, _, t) in classic_sos(&s) {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    seen
}

fn c5() -> Result<String, String> {
    let terms = c5_terms();
    let mut states = 0;
    for p in &terms {
        ensure(p.depth() <= 4, || format!("{p} deeper than 4"))?;
        let u = derive_ctmc(p, 500).map_err(|e| e.to_string())?;
        ensure(u.is_fully_explored(), || format!("{p}: budget reached"))?;
        ensure(*u.states() == classic_reachable(p), || format!("{p}: reachable states differ"))?;
        for s in u.states() {
            ensure(rates_of(&u, s) == aggregate(&classic_sos(s)), || format!("{p}: rates of {s} differ"))?;
        }
        states += u.states().len();
    }
    Ok(format!("{} terms, {states} states", terms.len()))
}

fn c6() -> Result<String, String> {
    for p in &c5_terms() {
        let u = derive_ctmc(p, 500).map_err(|e| e.to_string())?;
        ensure(u.is_functional().unwrap(), || format!("{p}: not functional"))?;
    }
    let race = PepaTerm::choice(PepaTerm::prefix("a", q(2, 1), PepaTerm::Nil), PepaTerm::prefix("a", q(3, 1), PepaTerm::Nil));
    let u = derive_ctmc(&race, 10).unwrap();
    let fs: Vec<_> = u.transitions(&race, "a").collect();
    let expected = WeightFunction::from_pairs(u.monoid(), [(PepaTerm::Nil, Weight::Rat(q(5, 1)))]);
    ensure(fs.len() == 1 && *fs[0] == expected, || format!("race gives {fs:?}"))?;
    Ok("all derived systems functional; (a,2).nil + (a,3).nil -a-> {nil: 5}".into())
}

fn labels_of(p: &PepaTerm, out: &mut BTreeSet<String>) {
    match p {
        PepaTerm::Nil => {}
        PepaTerm::Prefix(a, _, p) => {
            out.insert(a.clone());
            labels_of(p, out);
        }
        PepaTerm::Choice(p, q) | PepaTerm::Coop(p, _, q) => {
            labels_of(p, out);
            labels_of(q, out);
        }
        PepaTerm::Hide(p, _) => labels_of(p, out),
    }
}

/// A strongly equivalent variant of `p`, by one law applied somewhere.
fn equivalent_variant(rng: &mut ChaCha8Rng, p: &PepaTerm) -> PepaTerm {
    use PepaTerm::*;
    if rng.gen_bool(0.5) {
        // descend
        match p {
            Prefix(a, r, c) => return Prefix(a.clone(), r.clone(), Box::new(equivalent_variant(rng, c))),
            Choice(l, r) if rng.gen_bool(0.5) => return Choice(Box::new(equivalent_variant(rng, l)), r.clone()),
            Choice(l, r) => return Choice(l.clone(), Box::new(equivalent_variant(rng, r))),
            Coop(l, s, r) if rng.gen_bool(0.5) => return Coop(Box::new(equivalent_variant(rng, l)), s.clone(), r.clone()),
            Coop(l, s, r) => return Coop(l.clone(), s.clone(), Box::new(equivalent_variant(rng, r))),
            Hide(c, s) => return Hide(Box::new(equivalent_variant(rng, c)), s.clone()),
            Nil => {}
        }
    }
    match (rng.gen_range(0..4), p) {
        (0, Prefix(a, r, c)) => {
            let half = r / BigRational::from_integer(3.into());
            Choice(Box::new(Prefix(a.clone(), half.clone(), c.clone())), Box::new(Prefix(a.clone(), r - half, c.clone())))
        }
        (1, Choice(l, r)) => Choice(r.clone(), l.clone()),
        (1, Coop(l, s, r)) => Coop(r.clone(), s.clone(), l.clone()),
        (2, _) => {
            let mut used = BTreeSet::new();
            labels_of(p, &mut used);
            match LABELS.iter().find(|l| !used.contains(**l)) {
                Some(l) => PepaTerm::hide(p.clone(), &[l]),
                None => PepaTerm::choice(p.clone(), Nil),
            }
        }
        (3, _) => PepaTerm::choice(Nil, p.clone()),
        _ => PepaTerm::choice(p.clone(), Nil),
    }
}

fn c7() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut pairs, mut contexts_checked) = (0, 0);
    while pairs < 60 {
        let p = random_pepa(&mut rng, 3);
        let mut variant = equivalent_variant(&mut rng, &p);
        for _ in 0..rng.gen_range(0..3) {
            variant = equivalent_variant(&mut rng, &variant);
        }
        match strong_equivalence(&p, &variant, 500).map_err(|e| e.to_string())? {
            Some(true) => {}
            Some(false) => return Err(format!("{p} and {variant} are not equivalent")),
            None => continue,
        }
        let partner = random_pepa(&mut rng, 2);
        let l1: BTreeSet<String> = random_set(&mut rng).into_iter().map(String::from).collect();
        let l2: BTreeSet<String> = random_set(&mut rng).into_iter().map(String::from).collect();
        let rate = random_rate(&mut rng);
        let mut alpha: Alphabet = alphabet([&p, &variant, &partner]);
        alpha.add(&PepaTerm::prefix("b", rate.clone(), PepaTerm::Nil));
        alpha.coop.insert(l1.clone());
        alpha.hide.insert(l2.clone());
        alpha.labels.extend(l1.iter().chain(&l2).cloned());
        let spec = pepa_wfgsos_spec(&alpha);
        let hole = Term::var(HOLE);
        let r = to_term(&partner);
        let contexts = vec![
            Term::app(&pre_op("b", &rate), vec![hole.clone()]),
            Term::app("plus", vec![hole.clone(), r.clone()]),
            Term::app("plus", vec![r.clone(), hole.clone()]),
            Term::app(&coop_op(&l1), vec![hole.clone(), r.clone()]),
            Term::app(&coop_op(&l1), vec![r.clone(), hole.clone()]),
            Term::app(&hide_op(&l2), vec![hole]),
        ];
        match congruence_probe(&spec, &to_term(&p), &to_term(&variant), &contexts, 500).map_err(|e| e.to_string())? {
            ProbeOutcome::Holds => {}
            ProbeOutcome::Inconclusive => continue,
            other => return Err(format!("{p} vs {variant}: {other:?}")),
        }
        pairs += 1;
        contexts_checked += contexts.len();
    }
    Ok(format!("{pairs} pairs, {contexts_checked} context applications"))
}

/// Weight terms over the PEPA weight signature whose value is finite.
fn finite_wterm(rng: &mut ChaCha8Rng, depth: usize, sets: &[BTreeSet<String>]) -> WTerm {
    let pvars = ["x1", "x2", "y1", "y2", "y3"];
    let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..5) };
    match pick {
        0 => WTerm::op("bot", vec![]),
        1 => WTerm::op(&diam_op(&random_rate(rng)), vec![WTerm::pvar(pvars.choose(rng).unwrap())]),
        2 => WTerm::wvar(["phi1", "phi2", "phi3"].choose(rng).unwrap()),
        3 => WTerm::op("oplus", vec![finite_wterm(rng, depth - 1, sets), finite_wterm(rng, depth - 1, sets)]),
        _ => {
            let l = sets.choose(rng).unwrap();
            let leaf = WTerm::pvar(pvars.choose(rng).unwrap());
            let f = finite_wterm(rng, depth - 1, sets);
            let other = if rng.gen_bool(0.5) { leaf } else { finite_wterm(rng, depth - 1, sets) };
            let args = if rng.gen_bool(0.5) { vec![f, other] } else { vec![other, f] };
            WTerm::op(&par_op(l), args)
        }
    }
}

fn c8() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sets: Vec<BTreeSet<String>> =
        [vec![], vec!["a"], vec!["a", "b"]].iter().map(|l| l.iter().map(|s| s.to_string()).collect()).collect();
    let mut alpha = Alphabet::default();
    for (n, d) in RATES {
        alpha.add(&PepaTerm::prefix("a", q(n, d), PepaTerm::Nil));
    }
    alpha.coop.extend(sets.iter().cloned());
    let spec = pepa_wfgsos_spec(&alpha);
    let m = &spec.monoid;
    let pvars = ["x1", "x2", "y1", "y2", "y3"];
    let samples = 1500;
    for k in 0..samples {
        let psi = if rng.gen_bool(0.1) {
            // two process leaves under the rate law
            WTerm::op(&par_op(sets.choose(&mut rng).unwrap()), vec![WTerm::pvar("x1"), WTerm::pvar(pvars.choose(&mut rng).unwrap())])
        } else {
            finite_wterm(&mut rng, 3, &sets)
        };
        let env: BTreeMap<String, Fun> = ["phi1", "phi2", "phi3"]
            .iter()
            .map(|v| {
                let f = WeightFunction::from_pairs(
                    m,
                    pvars.iter().filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>().into_iter().map(|x| (Term::var(x), Weight::rat(rng.gen_range(1..=8), 4))),
                );
                (v.to_string(), f)
            })
            .collect();
        let sigma: BTreeMap<String, String> =
            pvars.iter().map(|x| (x.to_string(), pvars.choose(&mut rng).unwrap().to_string())).collect();
        let ok = naturality_probe(m, &spec.interp, &psi, &env, &sigma).map_err(|e| format!("sample {k}: {e}"))?;
        ensure(ok, || format!("sample {k}: {} not natural under {sigma:?}", psi.format(m)))?;
    }
    Ok(format!("{samples} samples"))
}

// W-GSOS specifications

/// A random term; each leaf variable is used at most once, so targets are
/// linear and terms grow by a bounded amount per step.
fn random_term(rng: &mut ChaCha8Rng, sig: &[(String, usize)], leaves: &mut Vec<String>, depth: usize) -> Term {
    let constants: Vec<&(String, usize)> = sig.iter().filter(|(_, a)| *a == 0).collect();
    if depth == 0 || rng.gen_bool(0.35) {
        if !leaves.is_empty() && rng.gen_bool(0.7) {
            let i = rng.gen_range(0..leaves.len());
            return Term::var(&leaves.swap_remove(i));
        }
        return Term::constant(&constants.choose(rng).unwrap().0);
    }
    let (op, arity) = sig.choose(rng).unwrap();
    Term::app(op, (0..*arity).map(|_| random_term(rng, sig, leaves, depth - 1)).collect())
}

fn random_wgsos(rng: &mut ChaCha8Rng) -> WgsosSpec {
    let monoid = random_monoid(rng);
    let mut ops: Vec<(String, usize)> = vec![("k".into(), 0)];
    for name in ["f", "g"].iter().take(rng.gen_range(1..=2)) {
        ops.push((name.to_string(), rng.gen_range(1..=2)));
    }
    let sig: Signature = ops.iter().map(|(n, a)| (n.as_str(), *a)).collect();
    let labels = ["a", "b"];
    let nonzero = |rng: &mut ChaCha8Rng| loop {
        let w = random_weight(rng, &monoid);
        if !monoid.is_zero(&w) {
            return w;
        }
    };
    let mut rules = Vec::new();
    for (op, arity) in &ops {
        let args: Vec<String> = (1..=*arity).map(|i| format!("x{i}")).collect();
        for c in labels {
            for _ in 0..rng.gen_range(0..=2) {
                let mut weights = Vec::new();
                let mut candidates = Vec::new();
                for i in 0..*arity {
                    for a in labels {
                        if !rng.gen_bool(0.4) {
                            continue;
                        }
                        let w = if rng.gen_bool(0.8) { nonzero(rng) } else { monoid.zero() };
                        if !monoid.is_zero(&w) {
                            for _ in 0..rng.gen_range(0..=1) + usize::from(rng.gen_bool(0.1)) {
                                let k = candidates.len() + 1;
                                candidates.push(TransPremise { arg: i, label: a.into(), u: format!("u{k}"), y: format!("y{k}") });
                            }
                        }
                        weights.push(WeightPremise { arg: i, label: a.into(), weight: w });
                    }
                }
                let mut leaves = args.clone();
                leaves.extend(candidates.iter().map(|t| t.y.clone()));
                let target = random_term(rng, &ops, &mut leaves, 2);
                let used = target.vars();
                let transitions: Vec<TransPremise> = candidates.into_iter().filter(|t| used.contains(&t.y)).collect();
                let coeff = if transitions.is_empty() || rng.gen_bool(0.4) { Some(nonzero(rng)) } else { None };
                rules.push(WgsosRule { op: op.clone(), args: args.clone(), label: c.into(), weights, transitions, coeff, target });
            }
        }
    }
    WgsosSpec { monoid, labels: labels.iter().map(|s| s.to_string()).collect(), sig, rules }
}

fn c9() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let count = 80;
    let (mut states, mut truncated, mut rules) = (0, 0, 0);
    for k in 0..count {
        let spec = random_wgsos(&mut rng);
        let problems = spec.validate();
        ensure(problems.is_empty(), || format!("spec {k}: {problems:?}"))?;
        ensure(spec.monoid.is_positive(), || "non-positive monoid".into())?;
        let wf = translate_wgsos(&spec).map_err(|e| format!("spec {k}: {e}"))?;
        rules += wf.rules.len();
        let ops: Vec<(String, usize)> = spec.sig.iter().map(|(n, a)| (n.to_string(), a)).collect();
        let roots: BTreeSet<Term> = (0..rng.gen_range(1..=2)).map(|_| random_term(&mut rng, &ops, &mut Vec::new(), 2)).collect();
        let u = induce(&wf, &roots, 200).map_err(|e| format!("spec {k}: {e}"))?;
        if u.is_fully_explored() {
            ensure(u.is_functional().unwrap(), || format!("spec {k}: induced system not functional"))?;
        }
        let direct = wgsos_semantics(&spec, &roots, 200).map_err(|e| e.to_string())?;
        let induced = if u.is_fully_explored() {
            u.to_wlts().unwrap()
        } else {
            truncated += 1;
            explored_wlts(&u).unwrap()
        };
        ensure(induced == direct, || {
            let src: Vec<String> = spec.rules.iter().map(|r| r.format(&spec.monoid)).collect();
            format!("spec {k} differs from its direct semantics:\n{}", src.join("\n"))
        })?;
        states += u.states().len();
    }
    Ok(format!("{count} specs ({rules} compiled rules), {states} states, {truncated} fragments cut at 200"))
}

fn small_tables() -> Vec<Monoid> {
    let table = |name: &str, elems: &[&str], sums: &[(&str, &str, &str)]| {
        Monoid::table(TableMonoid::new(name, elems, elems[0], sums).unwrap())
    };
    let max3 = table("max3", &["0", "1", "2"], &[("1", "1", "1"), ("1", "2", "2"), ("2", "2", "2")]);
    let sat3 = table("sat3", &["0", "1", "2"], &[("1", "1", "2"), ("1", "2", "2"), ("2", "2", "2")]);
    let z3 = table("z3", &["0", "1", "2"], &[("1", "1", "2"), ("1", "2", "0"), ("2", "2", "1")]);
    // 0 < e < t, where t absorbs and e is idempotent, plus a group part
    let mixed = table("mixed", &["0", "e", "t"], &[("e", "e", "e"), ("e", "t", "t"), ("t", "t", "t")]);
    let bool_and_z2 = table(
        "bz2",
        &["0", "1", "t", "u"],
        &[("1", "1", "0"), ("1", "t", "u"), ("1", "u", "t"), ("t", "t", "t"), ("t", "u", "u"), ("u", "u", "t")],
    );
    vec![Monoid::BoolOr, four_element_monoid(), z2_monoid(), max3, sat3, z3, mixed, bool_and_z2]
}

fn c10() -> Result<String, String> {
    let m4 = four_element_monoid();
    ensure(m4.is_positive() && !m4.is_refinement(), || "M4 must be positive and not refinement".into())?;
    let nat = Monoid::NatPlus;
    ensure(enumerate_clubs(&nat).unwrap() == vec![Club::Empty, Club::NonZero], || "nat-plus clubs".into())?;
    // no other candidate passes: thresholds and finite sets
    for k in 2..6u64 {
        ensure(!is_club(&nat, &Club::AtLeast(Weight::nat(k))).unwrap(), || format!("atleast({k}) accepted"))?;
    }
    for s in [vec![1u64], vec![1, 2], vec![2, 3, 4]] {
        let c = Club::Elements(s.iter().map(|n| Weight::nat(*n)).collect());
        ensure(!is_club(&nat, &c).unwrap(), || format!("{s:?} accepted"))?;
    }
    let mut clubs_checked = 0;
    let tables = small_tables();
    for m in &tables {
        let elems = m.elements().unwrap();
        let clubs = enumerate_clubs(m).unwrap();
        // brute force over all subsets agrees with the enumeration
        let mut brute = BTreeSet::new();
        for mask in 0u32..(1 << elems.len()) {
            let set: BTreeSet<Weight> = elems.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, w)| w.clone()).collect();
            let c = if set.is_empty() { Club::Empty } else { Club::Elements(set.clone()) };
            if is_club(m, &c).unwrap() {
                brute.insert(set);
            }
        }
        let listed: BTreeSet<BTreeSet<Weight>> = clubs
            .iter()
            .map(|c| elems.iter().filter(|w| c.contains(m, w)).cloned().collect())
            .collect();
        ensure(listed == brute, || format!("{}: enumeration differs from brute force", m.name()))?;
        for c in &clubs {
            ensure(!c.contains(m, &m.zero()), || format!("{}: 0 in {}", m.name(), c.format(m)))?;
            for v in &elems {
                for w in &elems {
                    let sum = m.add(v, w).unwrap();
                    ensure(c.contains(m, &sum) == (c.contains(m, v) || c.contains(m, w)), || {
                        format!("{}: biconditional fails for {} in {}", m.name(), m.format_weight(&sum), c.format(m))
                    })?;
                }
            }
            clubs_checked += 1;
        }
        if m.is_positive() {
            let nz = Club::Elements(elems.iter().filter(|w| !m.is_zero(w)).cloned().collect());
            ensure(is_club(m, &nz).unwrap(), || format!("{}: nonzero set is not a club", m.name()))?;
        }
    }
    Ok(format!("M4 positive and not refinement; nat-plus clubs {{}}, nonzero; {clubs_checked} clubs over {} tables", tables.len()))
}
