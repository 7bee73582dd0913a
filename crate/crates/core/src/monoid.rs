//! Commutative monoids of weights.
//!
//! A [`Monoid`] is either one of a handful of symbolic built-ins (booleans
//! under disjunction, naturals under addition or maximum, non-negative
//! rationals with or without `+inf`) or an explicit finite addition table.
//! All arithmetic is exact.
//!
//! The module also hosts the structural predicates used by the rule format
//! and the bisimulation theory: clubs, positivity and the refinement
//! property.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Largest carrier accepted for explicit tables.
pub const MAX_TABLE_SIZE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoidError {
    #[error("weight `{0}` is not in the carrier of monoid {1}")]
    NotInCarrier(String, String),
    #[error("cannot parse weight `{0}` for monoid {1}")]
    BadWeight(String, String),
    #[error("invalid monoid table: {0}")]
    InvalidTable(String),
    #[error("monoid {0} has no multiplication")]
    NoMultiplication(String),
    #[error("operation unsupported for monoid {monoid}: {reason}")]
    Unsupported { monoid: String, reason: String },
}

/// A weight. Which variants are legal depends on the monoid.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weight {
    Bool(bool),
    Nat(BigUint),
    Rat(BigRational),
    /// `+inf`, only in [`Monoid::RatPlusInf`]. Absorbing for addition.
    Infinity,
    /// Index into the carrier of a table monoid.
    Elem(u16),
}

impl Weight {
    pub fn nat(n: u64) -> Self {
        Weight::Nat(BigUint::from(n))
    }

    pub fn rat(numer: i64, denom: i64) -> Self {
        Weight::Rat(BigRational::new(numer.into(), denom.into()))
    }

    pub fn int(n: i64) -> Self {
        Weight::rat(n, 1)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Weight::Rat(q) => Some(q),
            _ => None,
        }
    }
}

/// Finite commutative monoid given by its addition table.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct TableMonoid {
    name: String,
    elems: Vec<String>,
    unit: u16,
    add: Vec<Vec<u16>>,
}

impl TableMonoid {
    /// Builds a table from sums `(x, y, x + y)`.
    ///
    /// Sums with the unit and the symmetric entry of each listed sum are
    /// implied. The resulting operation must be total, associative and
    /// commutative; every law is checked exhaustively.
    pub fn new<S: AsRef<str>>(
        name: &str,
        elems: &[S],
        unit: &str,
        sums: &[(S, S, S)],
    ) -> Result<Self, MonoidError> {
        let elems: Vec<String> = elems.iter().map(|e| e.as_ref().to_string()).collect();
        let n = elems.len();
        if n == 0 || n > MAX_TABLE_SIZE {
            return Err(MonoidError::InvalidTable(format!(
                "carrier size {n} outside 1..={MAX_TABLE_SIZE}"
            )));
        }
        let distinct: BTreeSet<&String> = elems.iter().collect();
        if distinct.len() != n {
            return Err(MonoidError::InvalidTable("duplicate element names".into()));
        }
        let index = |s: &str| -> Result<u16, MonoidError> {
            elems
                .iter()
                .position(|e| e == s)
                .map(|i| i as u16)
                .ok_or_else(|| MonoidError::InvalidTable(format!("unknown element `{s}`")))
        };
        let unit = index(unit)?;
        let mut table: Vec<Vec<Option<u16>>> = vec![vec![None; n]; n];
        for (x, row) in table.iter_mut().enumerate() {
            row[unit as usize] = Some(x as u16);
        }
        for (x, cell) in table[unit as usize].iter_mut().enumerate() {
            *cell = Some(x as u16);
        }
        for (x, y, z) in sums {
            let (x, y, z) = (index(x.as_ref())?, index(y.as_ref())?, index(z.as_ref())?);
            for (a, b) in [(x, y), (y, x)] {
                match table[a as usize][b as usize] {
                    Some(prev) if prev != z => {
                        return Err(MonoidError::InvalidTable(format!(
                            "conflicting sums for {} + {}",
                            elems[a as usize], elems[b as usize]
                        )))
                    }
                    _ => table[a as usize][b as usize] = Some(z),
                }
            }
        }
        let mut add = vec![vec![0u16; n]; n];
        for x in 0..n {
            for y in 0..n {
                add[x][y] = table[x][y].ok_or_else(|| {
                    MonoidError::InvalidTable(format!(
                        "missing sum {} + {}",
                        elems[x], elems[y]
                    ))
                })?;
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let l = add[add[x][y] as usize][z];
                    let r = add[x][add[y][z] as usize];
                    if l != r {
                        return Err(MonoidError::InvalidTable(format!(
                            "not associative at ({}, {}, {})",
                            elems[x], elems[y], elems[z]
                        )));
                    }
                }
            }
        }
        Ok(TableMonoid {
            name: name.to_string(),
            elems,
            unit,
            add,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn elements(&self) -> &[String] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    fn sum(&self, x: u16, y: u16) -> u16 {
        self.add[x as usize][y as usize]
    }

    /// `name { elems: ...; unit: ...; add: x y -> z, ... }`, listing each
    /// non-unit sum once.
    pub fn declaration(&self) -> String {
        let mut sums = Vec::new();
        for x in 0..self.elems.len() as u16 {
            for y in x..self.elems.len() as u16 {
                if x != self.unit && y != self.unit {
                    let e = |i: u16| self.elems[i as usize].as_str();
                    sums.push(format!("{} {} -> {}", e(x), e(y), e(self.sum(x, y))));
                }
            }
        }
        format!(
            "{} {{ elems: {}; unit: {}; add: {} }}",
            self.name,
            self.elems.join(" "),
            self.elems[self.unit as usize],
            sums.join(", ")
        )
    }

    /// Parses the output of [`TableMonoid::declaration`]. Newlines and
    /// `#` comments are allowed.
    pub fn parse_declaration(text: &str) -> Result<Self, MonoidError> {
        let bad = |m: &str| MonoidError::InvalidTable(m.to_string());
        let text: String = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .collect::<Vec<_>>()
            .join(" ");
        let open = text.find('{').ok_or_else(|| bad("expected `{`"))?;
        let close = text.rfind('}').ok_or_else(|| bad("expected `}`"))?;
        if close < open || !text[close + 1..].trim().is_empty() {
            return Err(bad("trailing text after `}`"));
        }
        let name = text[..open].trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(bad("expected a single monoid name before `{`"));
        }
        let (mut elems, mut unit, mut sums) = (None, None, Vec::new());
        for field in text[open + 1..close].split(';') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let (key, value) = field.split_once(':').ok_or_else(|| bad(&format!("expected `key: value`, got `{field}`")))?;
            match key.trim() {
                "elems" => elems = Some(value.split_whitespace().map(str::to_string).collect::<Vec<_>>()),
                "unit" => unit = Some(value.trim().to_string()),
                "add" => {
                    for entry in value.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                        let (lhs, z) = entry.split_once("->").ok_or_else(|| bad(&format!("expected `x y -> z`, got `{entry}`")))?;
                        let xy: Vec<&str> = lhs.split_whitespace().collect();
                        if xy.len() != 2 || z.split_whitespace().count() != 1 {
                            return Err(bad(&format!("expected `x y -> z`, got `{entry}`")));
                        }
                        sums.push((xy[0].to_string(), xy[1].to_string(), z.trim().to_string()));
                    }
                }
                other => return Err(bad(&format!("unknown field `{other}`"))),
            }
        }
        let elems = elems.ok_or_else(|| bad("missing `elems`"))?;
        let unit = unit.ok_or_else(|| bad("missing `unit`"))?;
        TableMonoid::new(name, &elems, &unit, &sums)
    }
}

/// A commutative monoid of weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Monoid {
    /// `({tt, ff}, or, ff)`
    BoolOr,
    /// `(N, +, 0)`
    NatPlus,
    /// `(N, max, 0)`
    NatMax,
    /// `(Q>=0, +, 0)`
    RatPlus,
    /// `(Q>=0 + {inf}, +, 0)` with `inf` absorbing.
    RatPlusInf,
    Table(Arc<TableMonoid>),
}

impl fmt::Display for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Monoid {
    pub fn table(t: TableMonoid) -> Self {
        Monoid::Table(Arc::new(t))
    }

    /// Looks up a built-in by name.
    pub fn builtin(name: &str) -> Option<Self> {
        Some(match name {
            "bool-or" => Monoid::BoolOr,
            "nat-plus" => Monoid::NatPlus,
            "nat-max" => Monoid::NatMax,
            "rat-plus" => Monoid::RatPlus,
            "rat-plus-inf" => Monoid::RatPlusInf,
            _ => return None,
        })
    }

    /// A built-in name, or a table declaration.
    pub fn declaration(&self) -> String {
        match self {
            Monoid::Table(t) => t.declaration(),
            other => other.name().to_string(),
        }
    }

    /// Inverse of [`Monoid::declaration`].
    pub fn parse_declaration(text: &str) -> Result<Self, MonoidError> {
        let t = text.trim();
        if t.contains('{') {
            return Ok(Monoid::table(TableMonoid::parse_declaration(t)?));
        }
        Monoid::builtin(t).ok_or_else(|| MonoidError::InvalidTable(format!("unknown monoid `{t}`")))
    }

    pub fn name(&self) -> &str {
        match self {
            Monoid::BoolOr => "bool-or",
            Monoid::NatPlus => "nat-plus",
            Monoid::NatMax => "nat-max",
            Monoid::RatPlus => "rat-plus",
            Monoid::RatPlusInf => "rat-plus-inf",
            Monoid::Table(t) => &t.name,
        }
    }

    pub fn zero(&self) -> Weight {
        match self {
            Monoid::BoolOr => Weight::Bool(false),
            Monoid::NatPlus | Monoid::NatMax => Weight::Nat(BigUint::zero()),
            Monoid::RatPlus | Monoid::RatPlusInf => Weight::Rat(BigRational::zero()),
            Monoid::Table(t) => Weight::Elem(t.unit),
        }
    }

    pub fn is_zero(&self, w: &Weight) -> bool {
        *w == self.zero()
    }

    pub fn contains(&self, w: &Weight) -> bool {
        match (self, w) {
            (Monoid::BoolOr, Weight::Bool(_)) => true,
            (Monoid::NatPlus | Monoid::NatMax, Weight::Nat(_)) => true,
            (Monoid::RatPlus | Monoid::RatPlusInf, Weight::Rat(q)) => !q.is_negative(),
            (Monoid::RatPlusInf, Weight::Infinity) => true,
            (Monoid::Table(t), Weight::Elem(i)) => (*i as usize) < t.len(),
            _ => false,
        }
    }

    fn check(&self, w: &Weight) -> Result<(), MonoidError> {
        if self.contains(w) {
            Ok(())
        } else {
            Err(MonoidError::NotInCarrier(format!("{w:?}"), self.name().into()))
        }
    }

    pub fn add(&self, a: &Weight, b: &Weight) -> Result<Weight, MonoidError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.plus(a, b))
    }

    /// Addition on values already known to lie in the carrier.
    pub(crate) fn plus(&self, a: &Weight, b: &Weight) -> Weight {
        match (a, b) {
            (Weight::Bool(x), Weight::Bool(y)) => Weight::Bool(*x || *y),
            (Weight::Nat(x), Weight::Nat(y)) => match self {
                Monoid::NatMax => Weight::Nat(x.max(y).clone()),
                _ => Weight::Nat(x + y),
            },
            (Weight::Infinity, _) | (_, Weight::Infinity) => Weight::Infinity,
            (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x + y),
            (Weight::Elem(x), Weight::Elem(y)) => match self {
                Monoid::Table(t) => Weight::Elem(t.sum(*x, *y)),
                _ => unreachable!("table element outside a table monoid"),
            },
            _ => panic!("mixed weight kinds {a:?} + {b:?} in {}", self.name()),
        }
    }

    /// Sum of an arbitrary finite family; the unit for an empty one.
    pub fn sum<'a, I: IntoIterator<Item = &'a Weight>>(&self, ws: I) -> Weight {
        ws.into_iter()
            .fold(self.zero(), |acc, w| self.plus(&acc, w))
    }

    /// Multiplicative unit, when the monoid carries a multiplication that
    /// distributes over addition and is absorbed by zero.
    pub fn one(&self) -> Option<Weight> {
        match self {
            Monoid::BoolOr => Some(Weight::Bool(true)),
            Monoid::NatPlus => Some(Weight::nat(1)),
            Monoid::RatPlus | Monoid::RatPlusInf => Some(Weight::int(1)),
            Monoid::NatMax | Monoid::Table(_) => None,
        }
    }

    pub fn has_multiplication(&self) -> bool {
        self.one().is_some()
    }

    /// Product, with `0 * inf = 0`.
    pub fn mul(&self, a: &Weight, b: &Weight) -> Result<Weight, MonoidError> {
        if !self.has_multiplication() {
            return Err(MonoidError::NoMultiplication(self.name().into()));
        }
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (Weight::Bool(x), Weight::Bool(y)) => Weight::Bool(*x && *y),
            (Weight::Nat(x), Weight::Nat(y)) => Weight::Nat(x * y),
            (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x * y),
            (Weight::Infinity, Weight::Rat(q)) | (Weight::Rat(q), Weight::Infinity) => {
                if q.is_zero() {
                    Weight::Rat(BigRational::zero())
                } else {
                    Weight::Infinity
                }
            }
            (Weight::Infinity, Weight::Infinity) => Weight::Infinity,
            _ => unreachable!(),
        })
    }

    /// Carrier of a finite monoid, in declaration order.
    pub fn elements(&self) -> Option<Vec<Weight>> {
        match self {
            Monoid::BoolOr => Some(vec![Weight::Bool(false), Weight::Bool(true)]),
            Monoid::Table(t) => Some((0..t.len() as u16).map(Weight::Elem).collect()),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.elements().is_some()
    }

    pub fn parse_weight(&self, s: &str) -> Result<Weight, MonoidError> {
        let s = s.trim();
        let bad = || MonoidError::BadWeight(s.to_string(), self.name().into());
        match self {
            Monoid::BoolOr => match s {
                "tt" | "true" => Ok(Weight::Bool(true)),
                "ff" | "false" => Ok(Weight::Bool(false)),
                _ => Err(bad()),
            },
            Monoid::NatPlus | Monoid::NatMax => {
                s.parse::<BigUint>().map(Weight::Nat).map_err(|_| bad())
            }
            Monoid::RatPlus | Monoid::RatPlusInf => {
                if s == "inf" {
                    return if *self == Monoid::RatPlusInf {
                        Ok(Weight::Infinity)
                    } else {
                        Err(bad())
                    };
                }
                let q = parse_rational(s).ok_or_else(bad)?;
                if q.is_negative() {
                    return Err(bad());
                }
                Ok(Weight::Rat(q))
            }
            Monoid::Table(t) => t
                .elems
                .iter()
                .position(|e| e == s)
                .map(|i| Weight::Elem(i as u16))
                .ok_or_else(bad),
        }
    }

    pub fn format_weight(&self, w: &Weight) -> String {
        match w {
            Weight::Bool(true) => "tt".into(),
            Weight::Bool(false) => "ff".into(),
            Weight::Nat(n) => n.to_string(),
            Weight::Rat(q) => format_rational(q),
            Weight::Infinity => "inf".into(),
            Weight::Elem(i) => match self {
                Monoid::Table(t) => t
                    .elems
                    .get(*i as usize)
                    .cloned()
                    .unwrap_or_else(|| format!("#{i}")),
                _ => format!("#{i}"),
            },
        }
    }

    /// No two non-zero elements sum to zero.
    pub fn is_positive(&self) -> bool {
        match self.elements() {
            Some(elems) => {
                let zero = self.zero();
                elems.iter().all(|x| {
                    elems
                        .iter()
                        .all(|y| !(self.plus(x, y) == zero && (*x != zero || *y != zero)))
                })
            }
            None => true,
        }
    }

    /// Every equation `r1 + r2 = c1 + c2` admits a 2x2 matrix whose rows sum
    /// to `r` and whose columns sum to `c`.
    ///
    /// Finite monoids are checked exhaustively; the infinite built-ins are
    /// all refinement monoids.
    pub fn is_refinement(&self) -> bool {
        let Some(elems) = self.elements() else {
            return true;
        };
        let n = elems.len();
        // decompositions[z] = all (a, b) with a + b = z
        let mut decompositions: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let idx = |w: &Weight| elems.iter().position(|e| e == w).expect("closed");
        let mut sum = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                let z = idx(&self.plus(&elems[a], &elems[b]));
                sum[a][b] = z;
                decompositions[z].push((a, b));
            }
        }
        for z in 0..n {
            let pairs = &decompositions[z];
            for &(r1, r2) in pairs {
                for &(c1, c2) in pairs {
                    let found = decompositions[r1].iter().any(|&(m11, m12)| {
                        decompositions[r2]
                            .iter()
                            .any(|&(m21, m22)| sum[m11][m21] == c1 && sum[m12][m22] == c2)
                    });
                    if !found {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Parses `p`, `p/q` or a finite decimal `d.ddd` as an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: num_bigint::BigInt = n.trim().parse().ok()?;
        let d: num_bigint::BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = i.starts_with('-');
        let i: num_bigint::BigInt = if i.is_empty() || i == "-" {
            num_bigint::BigInt::zero()
        } else {
            i.parse().ok()?
        };
        let f_num: num_bigint::BigInt = f.parse().ok()?;
        let scale = num_bigint::BigInt::from(10u32).pow(f.len() as u32);
        let frac = BigRational::new(f_num, scale);
        let whole = BigRational::from_integer(i.abs());
        let v = whole + frac;
        return Some(if neg { -v } else { v });
    }
    let n: num_bigint::BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A club: a monoid ideal whose complement is a submonoid.
///
/// Equivalently, membership is a monoid homomorphism into `bool-or`:
/// `v + w` is in the club iff `v` or `w` is, and `0` never is.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Club {
    Empty,
    /// Every non-zero weight.
    NonZero,
    /// Weights `>= k` in the naturals or rationals.
    AtLeast(Weight),
    /// An explicit finite set of weights.
    Elements(BTreeSet<Weight>),
}

impl Club {
    /// Membership test. Does not check that `self` is a club.
    pub fn contains(&self, m: &Monoid, w: &Weight) -> bool {
        match self {
            Club::Empty => false,
            Club::NonZero => !m.is_zero(w),
            Club::AtLeast(k) => match (k, w) {
                (_, Weight::Infinity) => true,
                (Weight::Nat(k), Weight::Nat(v)) => v >= k,
                (Weight::Rat(k), Weight::Rat(v)) => v >= k,
                _ => false,
            },
            Club::Elements(s) => s.contains(w),
        }
    }

    /// The explicit member set over a finite carrier.
    fn members(&self, m: &Monoid, elems: &[Weight]) -> BTreeSet<Weight> {
        elems
            .iter()
            .filter(|w| self.contains(m, w))
            .cloned()
            .collect()
    }

    /// Inverse of [`Club::format`].
    pub fn parse(m: &Monoid, text: &str) -> Result<Club, MonoidError> {
        let t = text.trim();
        if t == "nonzero" {
            return Ok(Club::NonZero);
        }
        if let Some(k) = t.strip_prefix("atleast(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Club::AtLeast(m.parse_weight(k)?));
        }
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| MonoidError::BadWeight(t.to_string(), "club syntax".into()))?;
        let elems = inner
            .split(',')
            .map(str::trim)
            .filter(|e| !e.is_empty())
            .map(|e| m.parse_weight(e))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(if elems.is_empty() { Club::Empty } else { Club::Elements(elems) })
    }

    pub fn format(&self, m: &Monoid) -> String {
        match self {
            Club::Empty => "{}".into(),
            Club::NonZero => "nonzero".into(),
            Club::AtLeast(k) => format!("atleast({})", m.format_weight(k)),
            Club::Elements(s) => {
                let parts: Vec<String> = s.iter().map(|w| m.format_weight(w)).collect();
                format!("{{{}}}", parts.join(","))
            }
        }
    }
}

/// Decides whether `c` is a club of `m`.
///
/// Finite carriers are checked by brute force. For the infinite built-ins
/// the answer is symbolic.
pub fn is_club(m: &Monoid, c: &Club) -> Result<bool, MonoidError> {
    if let Club::Elements(s) = c {
        for w in s {
            m.check(w)?;
        }
    }
    if let Club::AtLeast(k) = c {
        match (m, k) {
            (Monoid::NatPlus | Monoid::NatMax, Weight::Nat(_))
            | (Monoid::RatPlus | Monoid::RatPlusInf, Weight::Rat(_)) => {}
            _ => {
                return Err(MonoidError::Unsupported {
                    monoid: m.name().into(),
                    reason: "threshold clubs need an ordered carrier".into(),
                })
            }
        }
    }
    if let Some(elems) = m.elements() {
        let members = c.members(m, &elems);
        return Ok(is_club_brute_force(m, &elems, &members));
    }
    let zero = m.zero();
    Ok(match c {
        Club::Empty => true,
        Club::NonZero => m.is_positive(),
        Club::AtLeast(k) => match m {
            Monoid::NatMax => *k != zero,
            // Only `>= 1` is additively closed from below in N; no rational
            // threshold has a complement closed under addition.
            Monoid::NatPlus => *k == Weight::nat(1),
            _ => false,
        },
        Club::Elements(s) => {
            if s.is_empty() {
                true
            } else {
                // A non-empty ideal of an infinite built-in is infinite,
                // except `{inf}` which absorbs everything.
                *m == Monoid::RatPlusInf && s.len() == 1 && s.contains(&Weight::Infinity)
            }
        }
    })
}

fn is_club_brute_force(m: &Monoid, elems: &[Weight], members: &BTreeSet<Weight>) -> bool {
    if members.contains(&m.zero()) {
        return false;
    }
    for v in elems {
        for w in elems {
            let s = m.plus(v, w);
            let lhs = members.contains(&s);
            let rhs = members.contains(v) || members.contains(w);
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// All clubs of `m`.
///
/// Finite carriers are searched exhaustively (club membership is a
/// homomorphism into `bool-or`, found by backtracking). Infinite built-ins
/// get their symbolic answer; `nat-max` has infinitely many clubs and is
/// rejected.
pub fn enumerate_clubs(m: &Monoid) -> Result<Vec<Club>, MonoidError> {
    match m {
        Monoid::NatPlus | Monoid::RatPlus => Ok(vec![Club::Empty, Club::NonZero]),
        Monoid::RatPlusInf => Ok(vec![
            Club::Empty,
            Club::Elements(BTreeSet::from([Weight::Infinity])),
            Club::NonZero,
        ]),
        Monoid::NatMax => Err(MonoidError::Unsupported {
            monoid: m.name().into(),
            reason: "infinitely many clubs (every `atleast(k)` with k >= 1)".into(),
        }),
        Monoid::BoolOr | Monoid::Table(_) => {
            let elems = m.elements().expect("finite");
            let zero_idx = elems.iter().position(|e| *e == m.zero()).expect("unit");
            let n = elems.len();
            let idx = |w: &Weight| elems.iter().position(|e| e == w).expect("closed");
            let sum: Vec<Vec<usize>> = (0..n)
                .map(|a| (0..n).map(|b| idx(&m.plus(&elems[a], &elems[b]))).collect())
                .collect();
            let mut assign: Vec<Option<bool>> = vec![None; n];
            assign[zero_idx] = Some(false);
            let mut found = Vec::new();
            search_homomorphisms(&sum, &mut assign, 0, &mut found);
            let mut clubs: Vec<Club> = found
                .into_iter()
                .map(|bits| {
                    let set: BTreeSet<Weight> = bits
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| **b)
                        .map(|(i, _)| elems[i].clone())
                        .collect();
                    if set.is_empty() {
                        Club::Empty
                    } else {
                        Club::Elements(set)
                    }
                })
                .collect();
            clubs.sort_by_key(club_order);
            Ok(clubs)
        }
    }
}

fn club_order(c: &Club) -> (usize, Vec<Weight>) {
    match c {
        Club::Elements(s) => (s.len(), s.iter().cloned().collect()),
        _ => (0, Vec::new()),
    }
}

fn search_homomorphisms(
    sum: &[Vec<usize>],
    assign: &mut Vec<Option<bool>>,
    next: usize,
    out: &mut Vec<Vec<bool>>,
) {
    let n = assign.len();
    // every pair whose operands and sum are all assigned must satisfy the law
    let consistent = |assign: &Vec<Option<bool>>| {
        for a in 0..n {
            let Some(va) = assign[a] else { continue };
            for b in a..n {
                let Some(vb) = assign[b] else { continue };
                if let Some(vs) = assign[sum[a][b]] {
                    if vs != (va || vb) {
                        return false;
                    }
                }
            }
        }
        true
    };
    if next == n {
        out.push(assign.iter().map(|v| v.expect("assigned")).collect());
        return;
    }
    if assign[next].is_some() {
        search_homomorphisms(sum, assign, next + 1, out);
        return;
    }
    for choice in [false, true] {
        assign[next] = Some(choice);
        if consistent(assign) {
            search_homomorphisms(sum, assign, next + 1, out);
        }
    }
    assign[next] = None;
}

/// `({0,a,b,1}, +, 0)` with `x + y = 1` whenever both are non-zero: the
/// standard positive monoid that is not a refinement monoid.
pub fn four_element_monoid() -> Monoid {
    let elems = ["0", "a", "b", "1"];
    let nz = ["a", "b", "1"];
    let mut sums = Vec::new();
    for x in nz {
        for y in nz {
            sums.push((x, y, "1"));
        }
    }
    Monoid::table(TableMonoid::new("m4", &elems, "0", &sums).expect("valid table"))
}

/// The group `Z2` as a table monoid.
pub fn z2_monoid() -> Monoid {
    Monoid::table(
        TableMonoid::new("z2", &["0", "1"], "0", &[("1", "1", "0")]).expect("valid table"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bool_table() -> Monoid {
        Monoid::table(
            TableMonoid::new("b", &["ff", "tt"], "ff", &[("tt", "tt", "tt")]).unwrap(),
        )
    }

    /// Independent brute force over all subsets of a finite carrier.
    fn clubs_by_subsets(m: &Monoid) -> Vec<BTreeSet<Weight>> {
        let elems = m.elements().unwrap();
        let mut out = Vec::new();
        for mask in 0u64..(1 << elems.len()) {
            let c: BTreeSet<Weight> = (0..elems.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| elems[i].clone())
                .collect();
            let ideal = c
                .iter()
                .all(|v| elems.iter().all(|w| c.contains(&m.plus(v, w))));
            let comp: Vec<&Weight> = elems.iter().filter(|w| !c.contains(*w)).collect();
            let sub = comp.contains(&&m.zero())
                && comp
                    .iter()
                    .all(|v| comp.iter().all(|w| !c.contains(&m.plus(v, w))));
            if ideal && sub {
                out.push(c);
            }
        }
        out.sort();
        out
    }

    fn as_sets(m: &Monoid, clubs: &[Club]) -> Vec<BTreeSet<Weight>> {
        let elems = m.elements().unwrap();
        let mut v: Vec<_> = clubs.iter().map(|c| c.members(m, &elems)).collect();
        v.sort();
        v
    }

    #[test]
    fn addition_examples() {
        let m = Monoid::BoolOr;
        assert_eq!(
            m.add(&Weight::Bool(true), &Weight::Bool(false)).unwrap(),
            Weight::Bool(true)
        );
        assert_eq!(
            Monoid::NatPlus.add(&Weight::nat(2), &Weight::nat(3)).unwrap(),
            Weight::nat(5)
        );
        assert_eq!(
            Monoid::RatPlusInf
                .add(&Weight::Infinity, &Weight::int(3))
                .unwrap(),
            Weight::Infinity
        );
        assert_eq!(
            Monoid::NatMax.add(&Weight::nat(2), &Weight::nat(7)).unwrap(),
            Weight::nat(7)
        );
    }

    #[test]
    fn addition_rejects_foreign_elements() {
        assert!(Monoid::RatPlus.add(&Weight::Infinity, &Weight::int(1)).is_err());
        assert!(Monoid::NatPlus.add(&Weight::Bool(true), &Weight::nat(1)).is_err());
        let m4 = four_element_monoid();
        assert!(m4.add(&Weight::Elem(9), &Weight::Elem(0)).is_err());
    }

    #[test]
    fn table_constructor_rejects_non_associative() {
        // x+x = y, y+y = x, x+y = x breaks associativity: (x+x)+y = y+y = x,
        // x+(x+y) = x+x = y
        let r = TableMonoid::new(
            "bad",
            &["0", "x", "y"],
            "0",
            &[("x", "x", "y"), ("y", "y", "x"), ("x", "y", "x")],
        );
        assert!(matches!(r, Err(MonoidError::InvalidTable(_))));
        let missing = TableMonoid::new("partial", &["0", "x", "y"], "0", &[("x", "x", "y")]);
        assert!(missing.is_err());
    }

    #[test]
    fn club_examples() {
        assert!(is_club(&Monoid::NatPlus, &Club::NonZero).unwrap());
        assert!(is_club(&Monoid::NatPlus, &Club::Empty).unwrap());
        assert!(!is_club(&Monoid::NatPlus, &Club::AtLeast(Weight::nat(2))).unwrap());
        assert!(is_club(&Monoid::NatMax, &Club::AtLeast(Weight::nat(3))).unwrap());
        let tt = Club::Elements(BTreeSet::from([Weight::Bool(true)]));
        assert!(is_club(&Monoid::BoolOr, &tt).unwrap());
        let with_zero = Club::Elements(BTreeSet::from([Weight::Bool(false)]));
        assert!(!is_club(&Monoid::BoolOr, &with_zero).unwrap());
        let bad = Club::Elements(BTreeSet::from([Weight::nat(1)]));
        assert!(is_club(&Monoid::BoolOr, &bad).is_err());
    }

    #[test]
    fn enumerated_clubs_match_brute_force() {
        let m4 = four_element_monoid();
        for m in [Monoid::BoolOr, bool_table(), m4.clone(), z2_monoid()] {
            let found = enumerate_clubs(&m).unwrap();
            assert_eq!(as_sets(&m, &found), clubs_by_subsets(&m), "monoid {m}");
        }
        let m4_clubs = enumerate_clubs(&m4).unwrap();
        let abc: BTreeSet<Weight> = [1, 2, 3].into_iter().map(Weight::Elem).collect();
        assert_eq!(m4_clubs, vec![Club::Empty, Club::Elements(abc)]);
        assert_eq!(enumerate_clubs(&z2_monoid()).unwrap(), vec![Club::Empty]);
        assert_eq!(
            enumerate_clubs(&Monoid::NatPlus).unwrap(),
            vec![Club::Empty, Club::NonZero]
        );
        assert!(enumerate_clubs(&Monoid::NatMax).is_err());
    }

    #[test]
    fn positivity_and_refinement() {
        let m4 = four_element_monoid();
        assert!(m4.is_positive());
        assert!(!m4.is_refinement());
        assert!(!z2_monoid().is_positive());
        assert!(Monoid::NatPlus.is_positive());
        assert!(Monoid::NatPlus.is_refinement());
        assert!(Monoid::BoolOr.is_refinement());
        assert!(bool_table().is_refinement());
    }

    #[test]
    fn declarations_round_trip() {
        for m in [four_element_monoid(), z2_monoid(), Monoid::NatPlus, Monoid::RatPlusInf] {
            assert_eq!(Monoid::parse_declaration(&m.declaration()).unwrap(), m);
        }
        let m4 = "m4 {  # the four-element monoid\n elems: 0 a b 1;\n unit: 0;\n add: a a -> 1, a b -> 1, a 1 -> 1,\n b b -> 1, b 1 -> 1, 1 1 -> 1 }";
        assert_eq!(Monoid::parse_declaration(m4).unwrap(), four_element_monoid());
        assert!(Monoid::parse_declaration("m { elems: 0 a; unit: 0 }").is_err());
        assert!(Monoid::parse_declaration("reals").is_err());
    }

    #[test]
    fn weights_round_trip_through_text() {
        let m = Monoid::RatPlusInf;
        for s in ["0", "3", "1/2", "inf"] {
            let w = m.parse_weight(s).unwrap();
            assert_eq!(m.format_weight(&w), s);
        }
        assert_eq!(m.parse_weight("0.25").unwrap(), Weight::rat(1, 4));
        assert!(m.parse_weight("-1").is_err());
        assert!(Monoid::RatPlus.parse_weight("inf").is_err());
    }
}
