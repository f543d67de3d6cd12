use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use treedist::labeling::{partition_label, RootedBuilder, RootedLabeledTree, Symbol};

/// Random rooted tree over the given leaf symbols; groups of one to three
/// roots are joined repeatedly, so single-child nodes occur.
pub fn random_rooted(rng: &mut ChaCha8Rng, symbols: &[Symbol]) -> RootedLabeledTree {
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut sym: Vec<Option<Symbol>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for &s in symbols {
        parent.push(None);
        sym.push(Some(s));
        roots.push(parent.len() - 1);
    }
    while roots.len() > 1 || sym[roots[0]].is_some() {
        roots.shuffle(rng);
        let k = rng.gen_range(1..=3).min(roots.len());
        let p = parent.len();
        parent.push(None);
        sym.push(None);
        for c in roots.drain(..k) {
            parent[c] = Some(p);
        }
        roots.push(p);
    }
    // builder ids must match, so add in index order with parents patched
    let mut b = RootedBuilder::new();
    for (p, s) in parent.iter().zip(&sym) {
        b.add(*p, *s);
    }
    b.build().unwrap()
}

/// Leaf symbol counts below every node.
pub fn below(t: &RootedLabeledTree) -> Vec<BTreeMap<Symbol, usize>> {
    let mut out = vec![BTreeMap::new(); t.len()];
    for &v in t.preorder().iter().rev() {
        if let Some(s) = t.symbol(v) {
            *out[v].entry(s).or_insert(0) += 1;
        }
        if let Some(p) = t.parent(v) {
            let mine = out[v].clone();
            for (s, c) in mine {
                *out[p].entry(s).or_insert(0) += c;
            }
        }
    }
    out
}

/// Panics unless equal labels mark exactly the nodes with equal multisets.
pub fn check_valid(r: &RootedLabeledTree, rp: &RootedLabeledTree) {
    let p = partition_label(r, rp).unwrap();
    let mut nodes = Vec::new();
    for (side, t) in [r, rp].into_iter().enumerate() {
        let sets = below(t);
        for v in 0..t.len() {
            if !t.is_leaf(v) {
                let l = p.label(side, v).unwrap();
                assert!(l >= 1 && l as usize <= p.distinct_labels());
                nodes.push((l, sets[v].clone()));
            }
        }
    }
    for (la, sa) in &nodes {
        for (lb, sb) in &nodes {
            assert_eq!(la == lb, sa == sb);
        }
    }
    let distinct: BTreeSet<_> = nodes.iter().map(|(_, s)| s.clone()).collect();
    assert_eq!(distinct.len(), p.distinct_labels());
}

