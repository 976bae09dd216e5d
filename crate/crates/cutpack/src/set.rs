//! Compact vertex sets.
//!
//! Cuts are subsets of `0..n` stored as bitsets. All operations assert
//! matching universes; the derived `Ord` gives a deterministic (if
//! arbitrary) total order used for reproducible tie-breaking.

/// A subset of the vertices `0..n` of one graph.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    n: u32,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            n: n as u32,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn singleton(n: usize, v: usize) -> Self {
        let mut s = Self::empty(n);
        s.insert(v);
        s
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut s = Self::empty(n);
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.n as usize
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.n as usize);
        self.words[v / 64] |= 1u64 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        assert!(v < self.n as usize);
        self.words[v / 64] &= !(1u64 << (v % 64));
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n as usize && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Nonempty and not the whole vertex set: defines a proper partition.
    pub fn is_proper(&self) -> bool {
        !self.is_empty() && self.len() < self.n as usize
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.n, other.n, "vertex sets over different graphs");
        VertexSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_strict_subset(&self, other: &Self) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n);
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & b == 0)
    }

    /// True iff intersection and both differences are nonempty.
    pub fn crosses(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n);
        let mut inter = false;
        let mut only_a = false;
        let mut only_b = false;
        for (&a, &b) in self.words.iter().zip(&other.words) {
            inter |= a & b != 0;
            only_a |= a & !b != 0;
            only_b |= b & !a != 0;
        }
        inter && only_a && only_b
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.n as usize;
        (0..n).filter(move |&v| self.contains(v))
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = VertexSet::from_iter(5, [0, 1]);
        let b = VertexSet::from_iter(5, [1, 2]);
        assert!(a.crosses(&b));
        assert_eq!(a.union(&b), VertexSet::from_iter(5, [0, 1, 2]));
        assert_eq!(a.intersect(&b), VertexSet::singleton(5, 1));
        assert_eq!(a.difference(&b), VertexSet::singleton(5, 0));
        assert!(VertexSet::singleton(5, 0).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert!(a.is_proper());
        assert!(!VertexSet::full(5).is_proper());
        assert!(!VertexSet::empty(5).is_proper());
    }

    #[test]
    fn nested_and_disjoint_do_not_cross() {
        let a = VertexSet::singleton(4, 0);
        let ab = VertexSet::from_iter(4, [0, 1]);
        let c = VertexSet::singleton(4, 2);
        assert!(!a.crosses(&ab));
        assert!(!a.crosses(&c));
        assert!(!a.crosses(&a));
    }
}
