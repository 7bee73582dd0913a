//! Bisimulation: the lifting of relations to weight functions, the
//! forth/back check, largest bisimulations by partition refinement,
//! quotients, the weighted and Segala variants, and M-functions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Debug, Display};

use thiserror::Error;

use crate::monoid::{Monoid, Weight};
use crate::system::{Label, SystemError, Ultras, Wlts};
use crate::weightfn::WeightFunction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BisimError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("relation mentions unexplored boundary state {0}")]
    OnBoundary(String),
    #[error("relation mentions unknown state {0}")]
    UnknownState(String),
    #[error("partition is not stable: block containing {0} is split by label `{1}`")]
    NotStable(String, String),
    #[error("partition does not cover state {0}")]
    Uncovered(String),
    #[error("label `{0}` has both stuck and terminal states")]
    MixedTermination(String),
    #[error("input is not a Segala system")]
    NotSegala,
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// A finite relation between two state spaces.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation<A: Ord, B: Ord> {
    pairs: BTreeSet<(A, B)>,
}

impl<A: Ord, B: Ord> Default for Relation<A, B> {
    fn default() -> Self {
        Relation { pairs: BTreeSet::new() }
    }
}

impl<A: Ord + Clone, B: Ord + Clone> FromIterator<(A, B)> for Relation<A, B> {
    fn from_iter<I: IntoIterator<Item = (A, B)>>(iter: I) -> Self {
        Relation { pairs: iter.into_iter().collect() }
    }
}

impl<A: Ord + Clone, B: Ord + Clone> Relation<A, B> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: A, b: B) -> bool {
        self.pairs.insert((a, b))
    }

    pub fn contains(&self, a: &A, b: &B) -> bool {
        self.pairs.contains(&(a.clone(), b.clone()))
    }

    pub fn pairs(&self) -> &BTreeSet<(A, B)> {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &(A, B)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        self.pairs.union(&other.pairs).cloned().collect()
    }
}

impl<A: Ord + Clone> Relation<A, A> {
    pub fn identity<'a>(xs: impl IntoIterator<Item = &'a A>) -> Self
    where
        A: 'a,
    {
        xs.into_iter().map(|x| (x.clone(), x.clone())).collect()
    }
}

/// A pair of state sets `(C, D)`, one from each side.
pub type ClosedPair<A, B> = (BTreeSet<A>, BTreeSet<B>);

/// The minimal non-empty pairs of the subset closure of `r` that touch the
/// relation: connected components of its bipartite graph, sorted.
pub fn closed_pairs<A, B>(r: &Relation<A, B>) -> Vec<ClosedPair<A, B>>
where
    A: Ord + Clone,
    B: Ord + Clone,
{
    let mut left: BTreeMap<&A, Vec<&B>> = BTreeMap::new();
    let mut right: BTreeMap<&B, Vec<&A>> = BTreeMap::new();
    for (a, b) in r.iter() {
        left.entry(a).or_default().push(b);
        right.entry(b).or_default().push(a);
    }
    let mut seen_left: BTreeSet<&A> = BTreeSet::new();
    let mut out = Vec::new();
    for start in left.keys() {
        if seen_left.contains(start) {
            continue;
        }
        let mut cl = BTreeSet::new();
        let mut cr = BTreeSet::new();
        let mut stack = vec![*start];
        seen_left.insert(start);
        while let Some(a) = stack.pop() {
            cl.insert(a.clone());
            for b in &left[a] {
                if cr.insert((*b).clone()) {
                    for a2 in &right[b] {
                        if seen_left.insert(a2) {
                            stack.push(a2);
                        }
                    }
                }
            }
        }
        out.push((cl, cr));
    }
    out.sort();
    out
}

/// Every pair `(C, D)` with `C ⊆ xs`, `D ⊆ ys`, closed under `r` in both
/// directions, found by enumerating all subsets. Exponential; an
/// independent reference for [`closed_pairs`].
pub fn enumerate_closed_pairs<A, B>(
    xs: &BTreeSet<A>,
    ys: &BTreeSet<B>,
    r: &Relation<A, B>,
) -> Result<Vec<ClosedPair<A, B>>, BisimError>
where
    A: Ord + Clone,
    B: Ord + Clone,
{
    const MAX_POINTS: usize = 20;
    if xs.len() + ys.len() > MAX_POINTS {
        return Err(BisimError::TooLarge(format!(
            "closed-pair enumeration over {} points (limit {MAX_POINTS})",
            xs.len() + ys.len()
        )));
    }
    let xv: Vec<&A> = xs.iter().collect();
    let yv: Vec<&B> = ys.iter().collect();
    let mut out = Vec::new();
    for cm in 0u32..(1 << xv.len()) {
        let c: BTreeSet<A> = (0..xv.len()).filter(|i| cm >> i & 1 == 1).map(|i| xv[i].clone()).collect();
        for dm in 0u32..(1 << yv.len()) {
            let d: BTreeSet<B> =
                (0..yv.len()).filter(|j| dm >> j & 1 == 1).map(|j| yv[j].clone()).collect();
            if r.iter().all(|(a, b)| c.contains(a) == d.contains(b)) {
                out.push((c.clone(), d));
            }
        }
    }
    Ok(out)
}

/// Precomputed components of a relation, for repeated liftings.
struct Lifting<'r, A: Ord, B: Ord> {
    left: BTreeMap<&'r A, usize>,
    right: BTreeMap<&'r B, usize>,
}

impl<'r, A: Ord + Clone, B: Ord + Clone> Lifting<'r, A, B> {
    fn new(r: &'r Relation<A, B>) -> Self {
        let comps = closed_pairs(r);
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for (a, b) in r.iter() {
            left.insert(a, usize::MAX);
            right.insert(b, usize::MAX);
        }
        for (i, (cl, cr)) in comps.iter().enumerate() {
            for a in cl {
                *left.get_mut(a).expect("component vertex") = i;
            }
            for b in cr {
                *right.get_mut(b).expect("component vertex") = i;
            }
        }
        Lifting { left, right }
    }

    /// Component sums; `None` if the function weighs an unrelated point.
    fn vector<S: Ord + Clone>(
        m: &Monoid,
        index: &BTreeMap<&S, usize>,
        f: &WeightFunction<S>,
    ) -> Option<BTreeMap<usize, Weight>> {
        let mut acc: BTreeMap<usize, Weight> = BTreeMap::new();
        for (s, w) in f.iter() {
            let c = *index.get(s)?;
            let e = acc.entry(c).or_insert_with(|| m.zero());
            *e = m.plus(e, w);
        }
        acc.retain(|_, w| !m.is_zero(w));
        Some(acc)
    }

    fn related(&self, m: &Monoid, phi: &WeightFunction<A>, psi: &WeightFunction<B>) -> bool {
        match (Self::vector(m, &self.left, phi), Self::vector(m, &self.right, psi)) {
            (Some(v), Some(w)) => v == w,
            _ => false,
        }
    }
}

/// `(phi, psi)` lies in the lifting of `r`: equal weight on every closed
/// pair. Support points outside the relation must carry no weight.
pub fn lift_relation<A, B>(
    m: &Monoid,
    r: &Relation<A, B>,
    phi: &WeightFunction<A>,
    psi: &WeightFunction<B>,
) -> bool
where
    A: Ord + Clone,
    B: Ord + Clone,
{
    Lifting::new(r).related(m, phi, psi)
}

fn check_compatible<S, T>(u1: &Ultras<S>, u2: &Ultras<T>) -> Result<(), BisimError>
where
    S: Ord + Clone + Debug,
    T: Ord + Clone + Debug,
{
    if u1.monoid() != u2.monoid() {
        return Err(SystemError::MonoidMismatch(u1.monoid().name().into(), u2.monoid().name().into()).into());
    }
    if u1.labels() != u2.labels() {
        return Err(SystemError::LabelMismatch.into());
    }
    Ok(())
}

fn check_state<S: Ord + Clone + Debug>(u: &Ultras<S>, s: &S) -> Result<(), BisimError> {
    if u.boundary().contains(s) {
        Err(BisimError::OnBoundary(format!("{s:?}")))
    } else if !u.states().contains(s) {
        Err(BisimError::UnknownState(format!("{s:?}")))
    } else {
        Ok(())
    }
}

/// Forth and back conditions for every related pair and label, with
/// `related` deciding the lifted relation on weight functions.
fn forth_back<S, T>(
    u1: &Ultras<S>,
    u2: &Ultras<T>,
    r: &Relation<S, T>,
    related: impl Fn(&WeightFunction<S>, &WeightFunction<T>) -> bool,
) -> bool
where
    S: Ord + Clone + Debug,
    T: Ord + Clone + Debug,
{
    for (x, y) in r.iter() {
        for a in u1.labels() {
            let forth = u1
                .transitions(x, a)
                .all(|phi| u2.transitions(y, a).any(|psi| related(phi, psi)));
            let back = u2
                .transitions(y, a)
                .all(|psi| u1.transitions(x, a).any(|phi| related(phi, psi)));
            if !forth || !back {
                return false;
            }
        }
    }
    true
}

/// Whether `r` is a bisimulation between `u1` and `u2`.
pub fn is_bisimulation<S, T>(u1: &Ultras<S>, u2: &Ultras<T>, r: &Relation<S, T>) -> Result<bool, BisimError>
where
    S: Ord + Clone + Debug,
    T: Ord + Clone + Debug,
{
    check_compatible(u1, u2)?;
    for (x, y) in r.iter() {
        check_state(u1, x)?;
        check_state(u2, y)?;
    }
    let lifting = Lifting::new(r);
    let m = u1.monoid();
    Ok(forth_back(u1, u2, r, |phi, psi| lifting.related(m, phi, psi)))
}

/// A state of the disjoint union of two systems.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side<A, B> {
    Left(A),
    Right(B),
}

impl<A: Display, B: Display> Display for Side<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left(a) => write!(f, "1:{a}"),
            Side::Right(b) => write!(f, "2:{b}"),
        }
    }
}

/// Disjoint blocks, each sorted, ordered by least element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition<T: Ord> {
    blocks: Vec<BTreeSet<T>>,
    index: BTreeMap<T, usize>,
}

impl<T: Ord + Clone> Partition<T> {
    /// Builds a partition from blocks; empty blocks are dropped and
    /// overlapping blocks rejected.
    pub fn new(blocks: impl IntoIterator<Item = BTreeSet<T>>) -> Option<Self> {
        let mut blocks: Vec<BTreeSet<T>> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
        blocks.sort_by(|a, b| a.first().cmp(&b.first()));
        let mut index = BTreeMap::new();
        for (i, b) in blocks.iter().enumerate() {
            for x in b {
                if index.insert(x.clone(), i).is_some() {
                    return None;
                }
            }
        }
        Some(Partition { blocks, index })
    }

    pub fn discrete<'a>(xs: impl IntoIterator<Item = &'a T>) -> Self
    where
        T: 'a,
    {
        Partition::new(xs.into_iter().map(|x| BTreeSet::from([x.clone()]))).expect("singletons are disjoint")
    }

    pub fn blocks(&self) -> &[BTreeSet<T>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, x: &T) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn same_block(&self, x: &T, y: &T) -> bool {
        match (self.block_of(x), self.block_of(y)) {
            (Some(i), Some(j)) => i == j,
            _ => false,
        }
    }

    /// The equivalence relation induced on the covered elements.
    pub fn relation(&self) -> Relation<T, T> {
        self.blocks
            .iter()
            .flat_map(|b| b.iter().flat_map(move |x| b.iter().map(move |y| (x.clone(), y.clone()))))
            .collect()
    }
}

impl<A: Ord + Clone, B: Ord + Clone> Partition<Side<A, B>> {
    /// Pairs `(x, y)` of left and right states sharing a block.
    pub fn cross_relation(&self) -> Relation<A, B> {
        let mut r = Relation::new();
        for b in &self.blocks {
            for l in b {
                if let Side::Left(x) = l {
                    for rr in b {
                        if let Side::Right(y) = rr {
                            r.insert(x.clone(), y.clone());
                        }
                    }
                }
            }
        }
        r
    }
}

impl<T: Ord + Clone + Display> Partition<T> {
    /// One line per block: `{a, b}`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let items: Vec<String> = b.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{{{}}}\n", items.join(", ")));
        }
        out
    }
}

/// Class-indexed weights with zero entries dropped.
pub type ClassVector = BTreeMap<usize, Weight>;

fn class_vector<S: Ord + Clone>(m: &Monoid, block_of: &BTreeMap<S, usize>, rho: &WeightFunction<S>) -> ClassVector {
    let mut acc: ClassVector = BTreeMap::new();
    for (s, w) in rho.iter() {
        let e = acc.entry(block_of[s]).or_insert_with(|| m.zero());
        *e = m.plus(e, w);
    }
    acc.retain(|_, w| !m.is_zero(w));
    acc
}

/// Coarsest stable partition of a fully explored system. Exact for
/// positive monoids, where class sums vanish only on weightless classes.
pub fn bisimilarity<S: Ord + Clone + Debug>(u: &Ultras<S>) -> Result<Partition<S>, BisimError> {
    if !u.is_fully_explored() {
        return Err(SystemError::Unexplored(u.boundary().len()).into());
    }
    let m = u.monoid();
    let states: Vec<&S> = u.states().iter().collect();
    let mut block_of: BTreeMap<S, usize> = states.iter().map(|s| ((*s).clone(), 0)).collect();
    let mut count = usize::from(!states.is_empty());
    loop {
        type Signature = (usize, Vec<BTreeSet<ClassVector>>);
        let mut ids: BTreeMap<Signature, usize> = BTreeMap::new();
        let mut next: BTreeMap<S, usize> = BTreeMap::new();
        for s in &states {
            let sig: Signature = (
                block_of[*s],
                u.labels()
                    .iter()
                    .map(|a| u.transitions(s, a).map(|rho| class_vector(m, &block_of, rho)).collect())
                    .collect(),
            );
            let fresh = ids.len();
            let id = *ids.entry(sig).or_insert(fresh);
            next.insert((*s).clone(), id);
        }
        let done = ids.len() == count;
        count = ids.len();
        block_of = next;
        if done {
            break;
        }
    }
    let mut blocks: Vec<BTreeSet<S>> = vec![BTreeSet::new(); count];
    for (s, b) in block_of {
        blocks[b].insert(s);
    }
    Ok(Partition::new(blocks).expect("refinement yields disjoint blocks"))
}

/// The disjoint union of two systems over the same monoid and labels.
pub fn disjoint_union<S, T>(u1: &Ultras<S>, u2: &Ultras<T>) -> Result<Ultras<Side<S, T>>, BisimError>
where
    S: Ord + Clone + Debug,
    T: Ord + Clone + Debug,
{
    check_compatible(u1, u2)?;
    let m = u1.monoid();
    let mut u = Ultras::new(m.clone(), u1.labels().iter().cloned());
    for s in u1.states() {
        u.add_state(Side::Left(s.clone()));
    }
    for t in u2.states() {
        u.add_state(Side::Right(t.clone()));
    }
    for s in u1.boundary() {
        u.mark_boundary(Side::Left(s.clone()))?;
    }
    for t in u2.boundary() {
        u.mark_boundary(Side::Right(t.clone()))?;
    }
    for (s, a, rho) in u1.iter_transitions() {
        u.add_transition(Side::Left(s.clone()), a, rho.map(m, |x| Side::Left(x.clone())))?;
    }
    for (t, a, rho) in u2.iter_transitions() {
        u.add_transition(Side::Right(t.clone()), a, rho.map(m, |y| Side::Right(y.clone())))?;
    }
    Ok(u)
}

/// Coarsest stable partition of the disjoint union of `u1` and `u2`.
pub fn largest_bisimulation<S, T>(u1: &Ultras<S>, u2: &Ultras<T>) -> Result<Partition<Side<S, T>>, BisimError>
where
    S: Ord + Clone + Debug,
    T: Ord + Clone + Debug,
{
    bisimilarity(&disjoint_union(u1, u2)?)
}

/// A quotient system together with the class projection (each state maps
/// to the least element of its block).
#[derive(Clone, Debug)]
pub struct Quotient<S: Ord> {
    pub system: Ultras<S>,
    pub projection: BTreeMap<S, S>,
}

/// Collapses each block of a stable partition to its least element.
pub fn quotient<S: Ord + Clone + Debug>(u: &Ultras<S>, p: &Partition<S>) -> Result<Quotient<S>, BisimError> {
    if !u.is_fully_explored() {
        return Err(SystemError::Unexplored(u.boundary().len()).into());
    }
    let mut projection = BTreeMap::new();
    for s in u.states() {
        let b = p.block_of(s).ok_or_else(|| BisimError::Uncovered(format!("{s:?}")))?;
        let rep = p.blocks()[b].first().expect("non-empty block").clone();
        projection.insert(s.clone(), rep);
    }
    let m = u.monoid();
    let image = |s: &S, a: &str| -> BTreeSet<WeightFunction<S>> {
        u.transitions(s, a).map(|rho| rho.map(m, |t| projection[t].clone())).collect()
    };
    let mut q = Ultras::new(m.clone(), u.labels().iter().cloned());
    for block in p.blocks() {
        let members: Vec<&S> = block.iter().filter(|s| u.states().contains(*s)).collect();
        let Some(rep) = members.first() else { continue };
        q.add_state((*rep).clone());
        for a in u.labels() {
            let expected = image(rep, a);
            for other in &members[1..] {
                if image(other, a) != expected {
                    return Err(BisimError::NotStable(format!("{rep:?}"), a.clone()));
                }
            }
            for rho in expected {
                q.add_transition((*rep).clone(), a, rho)?;
            }
        }
    }
    Ok(Quotient { system: q, projection })
}

/// Weighted-LTS bisimulation: for related `x, y`, every label and every
/// closed pair `(C, D)`, the weight `x` sends into `C` equals the weight
/// `y` sends into `D`. Closed pairs are enumerated directly.
pub fn weighted_bisim_check<S, T>(w1: &Wlts<S>, w2: &Wlts<T>, r: &Relation<S, T>) -> Result<bool, BisimError>
where
    S: Ord + Clone + Debug,
    T: Ord + Clone + Debug,
{
    if w1.monoid() != w2.monoid() {
        return Err(SystemError::MonoidMismatch(w1.monoid().name().into(), w2.monoid().name().into()).into());
    }
    if w1.labels() != w2.labels() {
        return Err(SystemError::LabelMismatch.into());
    }
    for (x, y) in r.iter() {
        if !w1.states().contains(x) {
            return Err(BisimError::UnknownState(format!("{x:?}")));
        }
        if !w2.states().contains(y) {
            return Err(BisimError::UnknownState(format!("{y:?}")));
        }
    }
    if r.is_empty() {
        return Ok(true);
    }
    let m = w1.monoid();
    let closed = enumerate_closed_pairs(w1.states(), w2.states(), r)?;
    for (x, y) in r.iter() {
        for a in w1.labels() {
            let phi = w1.row(x, a);
            let psi = w2.row(y, a);
            for (c, d) in &closed {
                if phi.restrict_weight(m, c) != psi.restrict_weight(m, d) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Strong probabilistic bisimulation on Segala systems, with closed pairs
/// enumerated directly.
pub fn segala_bisim_check<S, T>(u1: &Ultras<S>, u2: &Ultras<T>, r: &Relation<S, T>) -> Result<bool, BisimError>
where
    S: Ord + Clone + Debug,
    T: Ord + Clone + Debug,
{
    check_compatible(u1, u2)?;
    if !u1.check_segala().map_err(|_| BisimError::NotSegala)? || !u2.check_segala().map_err(|_| BisimError::NotSegala)? {
        return Err(BisimError::NotSegala);
    }
    for (x, y) in r.iter() {
        check_state(u1, x)?;
        check_state(u2, y)?;
    }
    if r.is_empty() {
        return Ok(true);
    }
    let xs: BTreeSet<S> = u1.states().union(u1.boundary()).cloned().collect();
    let ys: BTreeSet<T> = u2.states().union(u2.boundary()).cloned().collect();
    let closed = enumerate_closed_pairs(&xs, &ys, r)?;
    let m = u1.monoid();
    Ok(forth_back(u1, u2, r, |phi, psi| {
        closed
            .iter()
            .all(|(c, d)| phi.restrict_weight(m, c) == psi.restrict_weight(m, d))
    }))
}

/// Values of an M-function: sets of class-weight vectors. The base point
/// is the set holding only the empty vector.
pub type MValue = BTreeSet<ClassVector>;

pub fn m_bottom() -> MValue {
    BTreeSet::from([ClassVector::new()])
}

/// An M-function tabulated on unions of the classes of a partition; a
/// class set is a bitmask over the classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MFunction<S: Ord> {
    classes: Vec<BTreeSet<S>>,
    table: BTreeMap<(S, Label, u32), MValue>,
}

const MAX_CLASSES: usize = 12;

impl<S: Ord + Clone + Debug> MFunction<S> {
    pub fn classes(&self) -> &[BTreeSet<S>] {
        &self.classes
    }

    pub fn get(&self, x: &S, a: &str, mask: u32) -> Option<&MValue> {
        self.table.get(&(x.clone(), a.to_string(), mask))
    }

    pub fn set(&mut self, x: S, a: &str, mask: u32, v: MValue) {
        self.table.insert((x, a.to_string(), mask), v);
    }

    /// The union of the classes selected by `mask`.
    pub fn class_set(&self, mask: u32) -> BTreeSet<S> {
        (0..self.classes.len())
            .filter(|i| mask >> i & 1 == 1)
            .flat_map(|i| self.classes[i].iter().cloned())
            .collect()
    }

    fn full_mask(&self) -> u32 {
        (1u32 << self.classes.len()) - 1
    }
}

fn termination_kinds<S: Ord + Clone + Debug>(u: &Ultras<S>) -> Result<(), BisimError> {
    for a in u.labels() {
        let stuck = u.states().iter().any(|x| u.is_stuck(x, a));
        let terminal = u.states().iter().any(|x| u.is_terminal(x, a));
        if stuck && terminal {
            return Err(BisimError::MixedTermination(a.clone()));
        }
    }
    Ok(())
}

/// Tabulates `M(x, a, C) = {[rho] | x -a-> rho, <rho|C> != 0} ∪ {[0]}` where
/// `[rho]` is the class-weight vector of `rho` over the blocks of `p`.
pub fn m_function_from_bisim<S: Ord + Clone + Debug>(u: &Ultras<S>, p: &Partition<S>) -> Result<MFunction<S>, BisimError> {
    if !u.is_fully_explored() {
        return Err(SystemError::Unexplored(u.boundary().len()).into());
    }
    termination_kinds(u)?;
    if p.len() > MAX_CLASSES {
        return Err(BisimError::TooLarge(format!("{} classes (limit {MAX_CLASSES})", p.len())));
    }
    let mut block_of = BTreeMap::new();
    for s in u.states() {
        let b = p.block_of(s).ok_or_else(|| BisimError::Uncovered(format!("{s:?}")))?;
        block_of.insert(s.clone(), b);
    }
    let stable = p.blocks().iter().all(|b| {
        let members: Vec<&S> = b.iter().filter(|s| u.states().contains(*s)).collect();
        u.labels().iter().all(|a| {
            let sig = |s: &S| -> BTreeSet<ClassVector> {
                u.transitions(s, a).map(|rho| class_vector(u.monoid(), &block_of, rho)).collect()
            };
            members.windows(2).all(|w| sig(w[0]) == sig(w[1]))
        })
    });
    if !stable {
        return Err(BisimError::NotStable(format!("{:?}", p.blocks()), "*".into()));
    }
    let m = u.monoid();
    let mut f = MFunction { classes: p.blocks().to_vec(), table: BTreeMap::new() };
    for x in u.states() {
        for a in u.labels() {
            let vectors: Vec<ClassVector> =
                u.transitions(x, a).map(|rho| class_vector(m, &block_of, rho)).collect();
            for mask in 0..=f.full_mask() {
                let mut v = m_bottom();
                for vec in &vectors {
                    let sum = m.sum(vec.iter().filter(|(c, _)| mask >> **c & 1 == 1).map(|(_, w)| w));
                    if !m.is_zero(&sum) {
                        v.insert(vec.clone());
                    }
                }
                f.set(x.clone(), a, mask, v);
            }
        }
    }
    Ok(f)
}

/// Checks the termination clause and the class-union clause on every
/// tabulated triple. Missing entries fail validation.
pub fn validate_m_function<S: Ord + Clone + Debug>(f: &MFunction<S>, u: &Ultras<S>) -> Result<bool, BisimError> {
    let k = f.classes.len();
    if k > MAX_CLASSES {
        return Err(BisimError::TooLarge(format!("{k} classes (limit {MAX_CLASSES})")));
    }
    let m = u.monoid();
    let full = f.full_mask();
    let bottom = m_bottom();
    for x in u.states() {
        for a in u.labels() {
            for mask in 0..=full {
                let Some(v) = f.get(x, a, mask) else { return Ok(false) };
                let c = f.class_set(mask);
                let silent = u.transitions(x, a).all(|rho| m.is_zero(&rho.restrict_weight(m, &c)));
                if silent && *v != bottom {
                    return Ok(false);
                }
            }
        }
    }
    // Union clause: states agreeing on C1 and on C2 must agree on C1 ∪ C2.
    for a in u.labels() {
        for c1 in 0..=full {
            for c2 in c1..=full {
                let mut groups: BTreeMap<(&MValue, &MValue), &MValue> = BTreeMap::new();
                for x in u.states() {
                    let key = (f.get(x, a, c1).expect("checked"), f.get(x, a, c2).expect("checked"));
                    let joined = f.get(x, a, c1 | c2).expect("checked");
                    if let Some(prev) = groups.insert(key, joined) {
                        if prev != joined {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Equal M-values on every single class for all related pairs.
pub fn is_m_bisimulation<S: Ord + Clone + Debug>(f: &MFunction<S>, u: &Ultras<S>, p: &Partition<S>) -> bool {
    for block in p.blocks() {
        let members: Vec<&S> = block.iter().filter(|s| u.states().contains(*s)).collect();
        for pair in members.windows(2) {
            for a in u.labels() {
                for i in 0..f.classes.len() {
                    if f.get(pair[0], a, 1 << i) != f.get(pair[1], a, 1 << i) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Largest number of states [`brute_force_bisimilarity`] accepts.
pub const BRUTE_FORCE_MAX_STATES: usize = 9;

/// The union of all equivalence relations on the states of `u` that pass
/// [`is_bisimulation`], found by enumerating every set partition. An
/// independent reference for [`bisimilarity`].
pub fn brute_force_bisimilarity<S: Ord + Clone + Debug>(u: &Ultras<S>) -> Result<Relation<S, S>, BisimError> {
    let states: Vec<&S> = u.states().iter().collect();
    let n = states.len();
    if n > BRUTE_FORCE_MAX_STATES {
        return Err(BisimError::TooLarge(format!("{n} states (limit {BRUTE_FORCE_MAX_STATES})")));
    }
    let mut union = Relation::new();
    // restricted growth strings: block[i] <= 1 + max(block[..i])
    let mut block = vec![0usize; n];
    loop {
        let mut r = Relation::new();
        for i in 0..n {
            for j in 0..n {
                if block[i] == block[j] {
                    r.insert(states[i].clone(), states[j].clone());
                }
            }
        }
        if is_bisimulation(u, u, &r)? {
            union = union.union(&r);
        }
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok(union);
            }
            i -= 1;
            let max_before = block[..i].iter().copied().max().unwrap_or(0);
            if block[i] <= max_before {
                block[i] += 1;
                for b in &mut block[i + 1..] {
                    *b = 0;
                }
                break;
            }
        }
    }
}
