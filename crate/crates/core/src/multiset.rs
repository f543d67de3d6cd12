use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A multiset stored as symbol -> positive count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiSet<T: Ord> {
    entries: BTreeMap<T, usize>,
}

impl<T: Ord> Default for MultiSet<T> {
    fn default() -> Self {
        MultiSet {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: Ord + Clone> MultiSet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: T) {
        *self.entries.entry(item).or_insert(0) += 1;
    }

    pub fn insert_n(&mut self, item: T, n: usize) {
        if n > 0 {
            *self.entries.entry(item).or_insert(0) += n;
        }
    }

    /// Removes one copy; returns false if the item was absent.
    pub fn remove(&mut self, item: &T) -> bool {
        match self.entries.get_mut(item) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.entries.remove(item);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, item: &T) -> usize {
        self.entries.get(item).copied().unwrap_or(0)
    }

    /// |M|: total number of copies.
    pub fn len(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// δ(M): the distinct symbols.
    pub fn distinct(&self) -> impl Iterator<Item = &T> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, usize)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    /// Sum of counts (additive union).
    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.insert_n(k.clone(), c);
        }
        out
    }

    /// Union with max-count semantics.
    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            let e = out.entries.entry(k.clone()).or_insert(0);
            *e = (*e).max(c);
        }
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.iter().all(|(k, c)| other.count(k) >= c)
    }

    pub fn first(&self) -> Option<&T> {
        self.entries.keys().next()
    }
}

impl<T: Ord + Clone> FromIterator<T> for MultiSet<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = MultiSet::new();
        for x in iter {
            m.insert(x);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_union() {
        let a: MultiSet<char> = "aab".chars().collect();
        let b: MultiSet<char> = "abbc".chars().collect();
        assert_eq!(a.len(), 3);
        assert_eq!(a.distinct().count(), 2);
        let u = a.union(&b);
        assert_eq!(u.count(&'a'), 2);
        assert_eq!(u.count(&'b'), 2);
        assert_eq!(u.count(&'c'), 1);
        assert!(a.is_subset(&u) && b.is_subset(&u));
        assert_eq!(a.sum(&b).len(), 7);
    }

    #[test]
    fn remove_drops_zero_counts() {
        let mut a: MultiSet<char> = "ab".chars().collect();
        assert!(a.remove(&'a'));
        assert!(!a.remove(&'a'));
        assert_eq!(a.distinct().collect::<Vec<_>>(), vec![&'b']);
    }
}
