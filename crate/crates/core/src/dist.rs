//! Finite discrete probability distributions with exact rational weights.

use num::{BigRational, One, Zero};

/// Exact probability value.
pub type Prob = BigRational;

pub fn prob(num: i64, den: i64) -> Prob {
    BigRational::new(num.into(), den.into())
}

/// A finite distribution: positive weights summing to exactly one, support
/// sorted for canonical equality and hashing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dist<S> {
    entries: Vec<(S, Prob)>,
}

impl<S: Ord> Dist<S> {
    /// The point distribution on `s`.
    pub fn point(s: S) -> Self {
        Dist { entries: vec![(s, Prob::one())] }
    }

    /// Uniform distribution over the given states; equal states merge.
    pub fn uniform<I: IntoIterator<Item = S>>(items: I) -> Self {
        let items: Vec<S> = items.into_iter().collect();
        assert!(!items.is_empty(), "uniform distribution needs support");
        let w = BigRational::new(1.into(), (items.len() as i64).into());
        Dist::from_weighted(items.into_iter().map(|s| (s, w.clone())))
    }

    /// Builds from (state, weight) pairs, merging equal states. Weights must
    /// be positive and sum to one.
    pub fn from_weighted<I: IntoIterator<Item = (S, Prob)>>(items: I) -> Self {
        let mut entries: Vec<(S, Prob)> = items.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(S, Prob)> = Vec::with_capacity(entries.len());
        for (s, w) in entries {
            match merged.last_mut() {
                Some((last, lw)) if *last == s => *lw += w,
                _ => merged.push((s, w)),
            }
        }
        let d = Dist { entries: merged };
        debug_assert!(d.is_normalized());
        d
    }

    pub fn map<T: Ord, F: FnMut(&S) -> T>(&self, mut f: F) -> Dist<T> {
        Dist::from_weighted(self.entries.iter().map(|(s, w)| (f(s), w.clone())))
    }

    pub fn support(&self) -> impl Iterator<Item = &S> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(S, Prob)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Probability assigned to `s` (zero when outside the support).
    pub fn mass(&self, s: &S) -> Prob {
        self.entries
            .binary_search_by(|(e, _)| e.cmp(s))
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_else(|_| Prob::zero())
    }

    pub fn is_point(&self) -> bool {
        self.entries.len() == 1
    }

    pub fn is_normalized(&self) -> bool {
        self.entries.iter().all(|(_, w)| *w > Prob::zero())
            && self
                .entries
                .iter()
                .fold(Prob::zero(), |acc, (_, w)| acc + w)
                .is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_merges_and_normalizes() {
        let d = Dist::uniform([1, 2, 2, 3]);
        assert_eq!(d.len(), 3);
        assert_eq!(d.mass(&2), prob(1, 2));
        assert!(d.is_normalized());
    }

    #[test]
    fn map_merges_targets() {
        let d = Dist::uniform([0, 1, 2, 3]);
        let e = d.map(|x| x % 2);
        assert_eq!(e.len(), 2);
        assert_eq!(e.mass(&0), prob(1, 2));
        assert!(e.is_normalized());
    }

    #[test]
    fn point_mass() {
        let d = Dist::point("a");
        assert!(d.is_point());
        assert_eq!(d.mass(&"a"), Prob::one());
        assert_eq!(d.mass(&"b"), Prob::zero());
    }
}
