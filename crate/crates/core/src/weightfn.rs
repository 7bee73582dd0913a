//! Finitely supported weight functions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use thiserror::Error;

use crate::monoid::{is_club, Club, Monoid, MonoidError, Weight};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightFnError {
    #[error("map undefined on support element {0}")]
    UndefinedOnSupport(String),
    #[error("not a club of {0}: {1}")]
    InvalidClub(String, String),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

/// A finitely supported map from states to weights.
///
/// Entries are exactly the support: a zero weight is never stored, so
/// structural equality is extensional equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightFunction<S: Ord> {
    entries: BTreeMap<S, Weight>,
}

impl<S: Ord> Default for WeightFunction<S> {
    fn default() -> Self {
        WeightFunction {
            entries: BTreeMap::new(),
        }
    }
}

impl<S: Ord + Clone> WeightFunction<S> {
    /// The constantly zero function.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn point(m: &Monoid, s: S, w: Weight) -> Self {
        Self::from_pairs(m, [(s, w)])
    }

    /// Sums repeated keys and drops zeros.
    pub fn from_pairs<I: IntoIterator<Item = (S, Weight)>>(m: &Monoid, pairs: I) -> Self {
        let mut entries: BTreeMap<S, Weight> = BTreeMap::new();
        for (s, w) in pairs {
            match entries.get_mut(&s) {
                Some(v) => *v = m.plus(v, &w),
                None => {
                    entries.insert(s, w);
                }
            }
        }
        entries.retain(|_, w| !m.is_zero(w));
        WeightFunction { entries }
    }

    /// Like [`WeightFunction::from_pairs`] but rejects weights outside the carrier.
    pub fn try_from_pairs<I: IntoIterator<Item = (S, Weight)>>(
        m: &Monoid,
        pairs: I,
    ) -> Result<Self, MonoidError> {
        let pairs: Vec<(S, Weight)> = pairs.into_iter().collect();
        for (_, w) in &pairs {
            if !m.contains(w) {
                return Err(MonoidError::NotInCarrier(format!("{w:?}"), m.name().into()));
            }
        }
        Ok(Self::from_pairs(m, pairs))
    }

    pub fn get(&self, s: &S) -> Option<&Weight> {
        self.entries.get(s)
    }

    /// Weight of `s`, the unit if outside the support.
    pub fn weight(&self, m: &Monoid, s: &S) -> Weight {
        self.entries.get(s).cloned().unwrap_or_else(|| m.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &Weight)> {
        self.entries.iter()
    }

    pub fn support(&self) -> BTreeSet<S> {
        self.entries.keys().cloned().collect()
    }

    pub fn support_iter(&self) -> impl Iterator<Item = &S> {
        self.entries.keys()
    }

    /// Sum of all weights.
    pub fn total_weight(&self, m: &Monoid) -> Weight {
        m.sum(self.entries.values())
    }

    /// Total weight of the restriction to `c`.
    pub fn restrict_weight(&self, m: &Monoid, c: &BTreeSet<S>) -> Weight {
        m.sum(
            self.entries
                .iter()
                .filter(|(s, _)| c.contains(*s))
                .map(|(_, w)| w),
        )
    }

    /// Total weight of the restriction to the states satisfying `pred`.
    pub fn restrict_weight_by(&self, m: &Monoid, pred: impl Fn(&S) -> bool) -> Weight {
        m.sum(self.entries.iter().filter(|(s, _)| pred(s)).map(|(_, w)| w))
    }

    /// The action of a map on this function: weights of each preimage are
    /// summed, zero sums disappear.
    pub fn pushforward<T: Ord + Clone, F>(&self, m: &Monoid, f: F) -> Result<WeightFunction<T>, WeightFnError>
    where
        F: Fn(&S) -> Option<T>,
        S: std::fmt::Debug,
    {
        let mut pairs = Vec::with_capacity(self.entries.len());
        for (s, w) in &self.entries {
            let t = f(s).ok_or_else(|| WeightFnError::UndefinedOnSupport(format!("{s:?}")))?;
            pairs.push((t, w.clone()));
        }
        Ok(WeightFunction::from_pairs(m, pairs))
    }

    /// Pushforward along a total map.
    pub fn map<T: Ord + Clone>(&self, m: &Monoid, f: impl Fn(&S) -> T) -> WeightFunction<T> {
        WeightFunction::from_pairs(m, self.entries.iter().map(|(s, w)| (f(s), w.clone())))
    }

    /// Pointwise sum.
    pub fn add(&self, m: &Monoid, other: &Self) -> Self {
        WeightFunction::from_pairs(
            m,
            self.entries
                .iter()
                .chain(other.entries.iter())
                .map(|(s, w)| (s.clone(), w.clone())),
        )
    }

    /// States whose weight lies in the club `c`.
    pub fn select_by_club(&self, m: &Monoid, c: &Club) -> Result<BTreeSet<S>, WeightFnError> {
        if !is_club(m, c)? {
            return Err(WeightFnError::InvalidClub(m.name().into(), c.format(m)));
        }
        Ok(self.select_unchecked(m, c))
    }

    pub(crate) fn select_unchecked(&self, m: &Monoid, c: &Club) -> BTreeSet<S> {
        self.entries
            .iter()
            .filter(|(_, w)| c.contains(m, w))
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// `{s: w, ...}` with keys in order.
    pub fn format_with(&self, m: &Monoid, key: impl Fn(&S) -> String) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(s, w)| format!("{}: {}", key(s), m.format_weight(w)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl<S: Ord + Clone + Display> WeightFunction<S> {
    pub fn format(&self, m: &Monoid) -> String {
        self.format_with(m, |s| s.to_string())
    }
}
