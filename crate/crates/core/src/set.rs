//! Fixed-universe bit sets used for attribute and object sets.
//!
//! A set carries the size of its universe; binary operations require both
//! operands to share it. Members are dense indices `0..universe`.

use std::cmp::Ordering;
use std::fmt;
use std::marker::PhantomData;

use smallvec::SmallVec;

const WORD: usize = 64;

/// Marker for sets of attribute indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attr {}

/// Marker for sets of object indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obj {}

pub type AttributeSet = IndexSet<Attr>;
pub type ObjectSet = IndexSet<Obj>;

/// Subset of `0..universe`, stored as packed 64-bit words.
///
/// Up to 128 members live inline without a heap allocation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexSet<K> {
    universe: usize,
    words: SmallVec<[u64; 2]>,
    _kind: PhantomData<K>,
}

fn word_count(universe: usize) -> usize {
    universe.div_ceil(WORD)
}

impl<K: Clone + Eq> IndexSet<K> {
    pub fn empty(universe: usize) -> Self {
        IndexSet {
            universe,
            words: SmallVec::from_elem(0, word_count(universe)),
            _kind: PhantomData,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.trim();
        s
    }

    /// Builds a set from member indices.
    ///
    /// Panics if a member is outside the universe.
    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, members: I) -> Self {
        let mut s = Self::empty(universe);
        for i in members {
            s.insert(i);
        }
        s
    }

    /// The set whose bit pattern is `mask`; requires `universe <= 64`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= WORD, "mask sets need a universe of at most 64");
        let mut s = Self::empty(universe);
        if universe > 0 {
            s.words[0] = mask;
            s.trim();
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) -> bool {
        assert!(
            i < self.universe,
            "index {i} outside universe of size {}",
            self.universe
        );
        let (w, b) = (i / WORD, i % WORD);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !was
    }

    pub fn remove(&mut self, i: usize) -> bool {
        if i >= self.universe {
            return false;
        }
        let (w, b) = (i / WORD, i % WORD);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        was
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    fn check_universe(&self, other: &Self) {
        assert_eq!(
            self.universe, other.universe,
            "set operation across different universes"
        );
    }

    pub fn union_with(&mut self, other: &Self) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Self) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &Self) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        for w in s.words.iter_mut() {
            *w = !*w;
        }
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check_universe(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_proper_subset(&self, other: &Self) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Members below `bound`.
    pub fn prefix(&self, bound: usize) -> Self {
        let mut s = self.clone();
        for (w, word) in s.words.iter_mut().enumerate() {
            let lo = w * WORD;
            if bound <= lo {
                *word = 0;
            } else if bound < lo + WORD {
                *word &= (1u64 << (bound - lo)) - 1;
            }
        }
        s
    }

    pub fn min(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn trim(&mut self) {
        let rem = self.universe % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// Ascending iterator over members.
pub struct Iter<'a> {
    words: &'a [u64],
    word: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word * WORD + bit);
            }
            self.word += 1;
            self.current = *self.words.get(self.word)?;
        }
    }
}

impl<'a, K: Clone + Eq> IntoIterator for &'a IndexSet<K> {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

/// Lexicographic on the ascending member sequence, so `{1,3} < {2}` and
/// `{1} < {1,3}`.
impl<K: Clone + Eq> Ord for IndexSet<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter()
            .cmp(other.iter())
            .then(self.universe.cmp(&other.universe))
    }
}

impl<K: Clone + Eq> PartialOrd for IndexSet<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: Clone + Eq> fmt::Debug for IndexSet<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
