//! Ground truth for small instances: tree enumeration, random trees and
//! exact unweighted STT distance by breadth-first search.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canon::{canonical_key, CanonicalTreeKey};
use crate::error::{Error, Result};
use crate::stt::{apply_op, SttOperation};
use crate::tree::{Phylogeny, Tree};
use crate::weight::Weight;

pub fn leaf_name(i: usize) -> String {
    format!("t{i}")
}

fn star3(weighted: bool) -> Tree {
    let mut t = Tree::new(weighted);
    let c = t.add_internal();
    for i in 0..3 {
        let l = t.add_leaf(leaf_name(i));
        t.add_edge(c, l, Weight::one());
    }
    t
}

/// Every tree on leaves `t0..t{n-1}` with internal degrees in `[3, d]`,
/// one per isomorphism class.
pub fn enumerate_trees(n: usize, d: usize) -> Vec<Phylogeny> {
    assert!((3..=10).contains(&n) && d >= 3);
    let mut level = vec![star3(false)];
    for k in 3..n {
        let mut next = Vec::new();
        for t in &level {
            for (a, b) in t.edges() {
                let mut c = t.clone();
                c.remove_edge(a, b).unwrap();
                let x = c.add_internal();
                c.add_edge(a, x, Weight::one());
                c.add_edge(x, b, Weight::one());
                let l = c.add_leaf(leaf_name(k));
                c.add_edge(x, l, Weight::one());
                next.push(c);
            }
            for v in t.internal_nodes() {
                if t.degree(v) < d {
                    let mut c = t.clone();
                    let l = c.add_leaf(leaf_name(k));
                    c.add_edge(v, l, Weight::one());
                    next.push(c);
                }
            }
        }
        level = next;
    }
    level
        .into_iter()
        .map(|t| Phylogeny::new(t.compacted().0, d).expect("enumerated tree is valid"))
        .collect()
}

/// Seeded random phylogeny: leaves attach to uniform random edges, then
/// random internal edges are contracted while degrees stay within `d`.
/// Weights come from `{1, 1/2, 2}`.
pub fn random_phylogeny(n: usize, d: usize, weighted: bool, seed: u64) -> Phylogeny {
    assert!(n >= 3 && d >= 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = star3(weighted);
    let mut edges = t.edges();
    for k in 3..n {
        let i = rng.gen_range(0..edges.len());
        let (a, b) = edges.swap_remove(i);
        t.remove_edge(a, b).unwrap();
        let x = t.add_internal();
        let l = t.add_leaf(leaf_name(k));
        t.add_edge(a, x, Weight::one());
        t.add_edge(x, b, Weight::one());
        t.add_edge(x, l, Weight::one());
        edges.extend([(a, x), (x, b), (x, l)]);
    }
    if d > 3 {
        let mut internal: Vec<(usize, usize)> =
            t.edges().into_iter().filter(|&(a, b)| !t.is_pendant(a, b)).collect();
        internal.shuffle(&mut rng);
        let want = rng.gen_range(0..=internal.len());
        let mut done = 0;
        for (a, b) in internal {
            if done == want {
                break;
            }
            if t.is_alive(a) && t.is_alive(b) && t.has_edge(a, b) && t.degree(a) + t.degree(b) - 2 <= d {
                t.contract_edge(a, b).unwrap();
                done += 1;
            }
        }
    }
    if weighted {
        let pool = [Weight::one(), Weight::ratio(1, 2), Weight::from_integer(2)];
        for (a, b) in t.edges() {
            let w = pool.choose(&mut rng).unwrap().clone();
            t.set_weight(a, b, w).unwrap();
        }
    }
    Phylogeny::new(t.compacted().0, d).expect("generated tree is valid")
}

/// All operations of cost 1: move a subtree from `u` to an adjacent
/// internal node, or onto the middle of another edge at `u`.
pub fn unit_moves(tree: &Tree) -> Vec<SttOperation> {
    let mut out = Vec::new();
    for u in tree.internal_nodes() {
        for s in tree.neighbors(u) {
            for y in tree.neighbors(u) {
                if y == s {
                    continue;
                }
                if !tree.is_leaf(y) {
                    out.push(SttOperation::to_node(u, s, y));
                }
                out.push(SttOperation::to_edge(u, s, u, y, Weight::one()));
            }
        }
    }
    out
}

pub fn neighbors(tree: &Tree) -> Vec<Tree> {
    unit_moves(tree)
        .into_iter()
        .map(|op| {
            let mut t = tree.clone();
            apply_op(&mut t, &op).expect("unit move is valid");
            t.compacted().0
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    Exact(u32),
    Exceeded,
}

pub const DEFAULT_BUDGET: u32 = 20;

/// Breadth-first search over unit moves; intermediate trees may have any
/// degree. Gives up once every tree within `budget` has been seen.
pub fn exact_stt_distance(t: &Tree, tp: &Tree, budget: u32) -> Result<Distance> {
    if t.is_weighted() || tp.is_weighted() {
        return Err(Error::Unsupported("exact distance is defined for unweighted trees only"));
    }
    if t.leaf_labels() != tp.leaf_labels() {
        return Err(Error::LabelMismatch("leaf label sets differ".into()));
    }
    let goal = canonical_key(tp);
    let mut found = None;
    search(t, budget, |key, d| {
        if *key == goal {
            found = Some(d);
            false
        } else {
            true
        }
    });
    Ok(found.map_or(Distance::Exceeded, Distance::Exact))
}

/// Distances from `t` to every tree within `budget`.
pub fn distances_from(t: &Tree, budget: u32) -> HashMap<CanonicalTreeKey, u32> {
    let mut out = HashMap::new();
    search(t, budget, |key, d| {
        out.insert(key.clone(), d);
        true
    });
    out
}

fn search(t: &Tree, budget: u32, mut visit: impl FnMut(&CanonicalTreeKey, u32) -> bool) {
    let start = t.compacted().0;
    let mut seen: HashMap<CanonicalTreeKey, u32> = HashMap::new();
    let key = canonical_key(&start);
    seen.insert(key.clone(), 0);
    if !visit(&key, 0) {
        return;
    }
    let mut queue = VecDeque::from([(start, 0u32)]);
    while let Some((tree, d)) = queue.pop_front() {
        if d == budget {
            continue;
        }
        for next in neighbors(&tree) {
            let k = canonical_key(&next);
            if seen.contains_key(&k) {
                continue;
            }
            seen.insert(k.clone(), d + 1);
            if !visit(&k, d + 1) {
                return;
            }
            queue.push_back((next, d + 1));
        }
    }
}
