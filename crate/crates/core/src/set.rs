//! Dense bitset subsets of a finite ground set `{0, …, x-1}`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};
use smallvec::SmallVec;

const WORD_BITS: usize = 64;

type Words = SmallVec<[u64; 2]>;

fn words_for(universe: usize) -> usize {
    universe.div_ceil(WORD_BITS)
}

/// A subset of the ground set `{0, …, universe-1}` stored as a fixed-width bit vector.
///
/// Iteration is always ascending. The total order is lexicographic on the ascending
/// element lists, so `{0,1} < {0,1,2} < {0,2} < {1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    universe: usize,
    words: Words,
}

impl ElementSet {
    pub fn empty(universe: usize) -> Self {
        let mut words = Words::new();
        words.resize(words_for(universe), 0);
        ElementSet { universe, words }
    }

    /// The whole ground set.
    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for (i, w) in s.words.iter_mut().enumerate() {
            let lo = i * WORD_BITS;
            let hi = (lo + WORD_BITS).min(universe);
            let count = hi - lo;
            *w = if count == WORD_BITS {
                u64::MAX
            } else {
                (1u64 << count) - 1
            };
        }
        s
    }

    /// Builds a set from arbitrary-order elements.
    ///
    /// Returns the offending element on an out-of-range index or a repeat.
    pub fn from_elements<I>(universe: usize, elements: I) -> Result<Self, ElementError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut s = Self::empty(universe);
        for e in elements {
            if e >= universe {
                return Err(ElementError::OutOfRange {
                    element: e,
                    universe,
                });
            }
            if s.contains(e) {
                return Err(ElementError::Duplicate { element: e });
            }
            s.insert(e);
        }
        Ok(s)
    }

    /// Set of a `u64` bitmask; bits at or above `universe` are rejected.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(
            universe >= 64 || mask >> universe == 0,
            "mask exceeds universe"
        );
        let mut s = Self::empty(universe);
        if !s.words.is_empty() {
            s.words[0] = mask;
        }
        s
    }

    /// Low 64 bits as a mask. Only meaningful when `universe <= 64`.
    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.universe <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn insert(&mut self, e: usize) {
        assert!(
            e < self.universe,
            "element {e} outside ground set of size {}",
            self.universe
        );
        self.words[e / WORD_BITS] |= 1u64 << (e % WORD_BITS);
    }

    pub fn remove(&mut self, e: usize) {
        if e < self.universe {
            self.words[e / WORD_BITS] &= !(1u64 << (e % WORD_BITS));
        }
    }

    pub fn contains(&self, e: usize) -> bool {
        e < self.universe && self.words[e / WORD_BITS] >> (e % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn check_universe(&self, other: &Self) {
        assert_eq!(
            self.universe, other.universe,
            "sets over different ground sets"
        );
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        self.check_universe(other);
        let words = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        ElementSet {
            universe: self.universe,
            words,
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    /// `|self ∩ other|` without allocating.
    pub fn intersection_len(&self, other: &Self) -> usize {
        self.check_universe(other);
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(&a, &b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self \ other|` without allocating.
    pub fn difference_len(&self, other: &Self) -> usize {
        self.check_universe(other);
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(&a, &b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check_universe(other);
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.check_universe(other);
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(&a, &b)| a & b == 0)
    }

    /// All `k`-element subsets, in canonical order.
    pub fn subsets_of_size(&self, k: usize) -> impl Iterator<Item = ElementSet> + '_ {
        use itertools::Itertools;
        let universe = self.universe;
        self.to_vec().into_iter().combinations(k).map(move |c| {
            let mut s = ElementSet::empty(universe);
            for e in c {
                s.insert(e);
            }
            s
        })
    }
}

impl Ord for ElementSet {
    fn cmp(&self, other: &Self) -> Ordering {
        // The first element where the sets differ decides: the set holding it is
        // smaller unless the other set has nothing beyond it (a proper prefix).
        self.check_universe(other);
        let n = self.words.len();
        for i in 0..n {
            let diff = self.words[i] ^ other.words[i];
            if diff == 0 {
                continue;
            }
            let bit = diff.trailing_zeros();
            let (holder, rest) = if self.words[i] >> bit & 1 == 1 {
                (Ordering::Less, other)
            } else {
                (Ordering::Greater, self)
            };
            let above_in_word = if bit == 63 {
                0
            } else {
                rest.words[i] >> (bit + 1)
            };
            let rest_has_more = above_in_word != 0 || rest.words[i + 1..].iter().any(|&w| w != 0);
            return if rest_has_more {
                holder
            } else {
                holder.reverse()
            };
        }
        Ordering::Equal
    }
}

impl PartialOrd for ElementSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

// Serialized as the ascending element list; the ground size lives on the family.
impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElementError {
    #[error("element {element} is outside the ground set {{0..{universe}}}")]
    OutOfRange { element: usize, universe: usize },
    #[error("element {element} appears more than once")]
    Duplicate { element: usize },
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(universe: usize, elems: &[usize]) -> ElementSet {
        ElementSet::from_elements(universe, elems.iter().copied()).unwrap()
    }

    #[test]
    fn rejects_bad_elements() {
        assert_eq!(
            ElementSet::from_elements(3, [0, 3]),
            Err(ElementError::OutOfRange {
                element: 3,
                universe: 3
            })
        );
        assert_eq!(
            ElementSet::from_elements(5, [1, 1, 2]),
            Err(ElementError::Duplicate { element: 1 })
        );
    }

    #[test]
    fn ordering_is_lexicographic_on_element_lists() {
        let mut v = [set(8, &[1]),
            set(8, &[0, 2]),
            set(8, &[0, 1, 2]),
            set(8, &[]),
            set(8, &[0, 1])];
        v.sort();
        let lists: Vec<_> = v.iter().map(|s| s.to_vec()).collect();
        assert_eq!(
            lists,
            vec![vec![], vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![1]]
        );
    }

    #[test]
    fn multiword_sets() {
        let a = set(130, &[0, 64, 129]);
        let b = set(130, &[64, 100]);
        assert_eq!(a.intersection(&b).to_vec(), vec![64]);
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(ElementSet::full(130).len(), 130);
        assert!(set(130, &[0, 129]) < set(130, &[1]));
    }

    fn arb_list() -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::btree_set(0usize..140, 0..8).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn ord_matches_vec_ord(a in arb_list(), b in arb_list()) {
            let sa = set(140, &a);
            let sb = set(140, &b);
            prop_assert_eq!(sa.cmp(&sb), a.cmp(&b));
        }

        #[test]
        fn set_ops_match_btreeset(a in arb_list(), b in arb_list()) {
            use std::collections::BTreeSet;
            let (ba, bb): (BTreeSet<_>, BTreeSet<_>) = (a.iter().copied().collect(), b.iter().copied().collect());
            let (sa, sb) = (set(140, &a), set(140, &b));
            prop_assert_eq!(sa.intersection(&sb).to_vec(), ba.intersection(&bb).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference(&sb).to_vec(), ba.difference(&bb).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.intersection_len(&sb), ba.intersection(&bb).count());
            prop_assert_eq!(sa.is_subset(&sb), ba.is_subset(&bb));
            prop_assert_eq!(sa.is_disjoint(&sb), ba.is_disjoint(&bb));
        }
    }
}
