#![allow(dead_code)]

pub mod rooted;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use treedist::stt::{apply_op, SttOperation};
use treedist::{NodeId, Tree, Weight};

pub fn weight_pool() -> Vec<Weight> {
    vec![
        Weight::one(),
        Weight::ratio(1, 2),
        Weight::from_integer(2),
        Weight::ratio(3, 2),
    ]
}

/// A uniformly chosen valid operation, or `None` when the tree has no
/// internal node with somewhere to go.
pub fn random_op(tree: &Tree, rng: &mut ChaCha8Rng) -> Option<SttOperation> {
    let internal: Vec<NodeId> = tree.internal_nodes().collect();
    for _ in 0..50 {
        let &u = internal.choose(rng)?;
        let nb: Vec<NodeId> = tree.neighbors(u).collect();
        let &s = nb.choose(rng)?;
        let inside: HashSet<NodeId> = tree.side(u, s).into_iter().collect();
        let nodes: Vec<NodeId> = tree
            .internal_nodes()
            .filter(|&t| t != u && !inside.contains(&t))
            .collect();
        let edges: Vec<(NodeId, NodeId)> = tree
            .edges()
            .into_iter()
            .filter(|&(v, w)| !inside.contains(&v) && !inside.contains(&w))
            .collect();
        if nodes.is_empty() && edges.is_empty() {
            continue;
        }
        let to_node = !nodes.is_empty() && (edges.is_empty() || rng.gen_bool(0.4));
        if to_node {
            return Some(SttOperation::to_node(u, s, *nodes.choose(rng).unwrap()));
        }
        let &(v, w) = edges.choose(rng).unwrap();
        let total = tree.weight(v, w).unwrap().clone();
        let mut splits = vec![Weight::zero(), total.clone()];
        splits.extend(weight_pool().into_iter().filter(|w| *w < total));
        let split = splits.choose(rng).unwrap().clone();
        return Some(SttOperation::to_edge(u, s, v, w, split));
    }
    None
}

/// A second tree with the same leaf labels, internal degree multiset and
/// edge weight multiset: `t` with a few subtrees moved off degree-3 nodes
/// onto edges, some labels swapped, and the weights of the changed edges
/// redistributed.
pub fn multiset_preserving_partner(t: &Tree, rng: &mut ChaCha8Rng) -> Tree {
    let mut tp = t.clone();
    let moves = rng.gen_range(0..4);
    for _ in 0..moves {
        for _ in 0..20 {
            let Some(op) = random_op(&tp, rng) else { break };
            if tp.degree(op.anchor) != 3 || !op.is_restricted() {
                continue;
            }
            let mut c = tp.clone();
            if apply_op(&mut c, &op).is_ok() {
                tp = c;
                break;
            }
        }
    }
    let mut labels: Vec<NodeId> = tp.leaves().collect();
    let swaps = rng.gen_range(0..3);
    for _ in 0..swaps {
        labels.shuffle(rng);
        if let [a, b, ..] = labels[..] {
            swap_labels(&mut tp, a, b);
        }
    }
    if t.is_weighted() {
        let mut spare: Vec<Weight> = Vec::new();
        let mut kept: HashSet<(NodeId, NodeId)> = HashSet::new();
        for (a, b) in t.edges() {
            if tp.has_edge(a, b) && rng.gen_bool(0.85) {
                kept.insert((a, b));
                tp.set_weight(a, b, t.weight(a, b).unwrap().clone()).unwrap();
            } else {
                spare.push(t.weight(a, b).unwrap().clone());
            }
        }
        spare.shuffle(rng);
        for (a, b) in tp.edges() {
            if !kept.contains(&(a, b)) {
                tp.set_weight(a, b, spare.pop().unwrap()).unwrap();
            }
        }
    }
    tp.compacted().0
}

fn swap_labels(t: &mut Tree, a: NodeId, b: NodeId) {
    let (pa, pb) = (t.neighbors(a).next().unwrap(), t.neighbors(b).next().unwrap());
    if pa == pb {
        return;
    }
    let (wa, wb) = (t.remove_edge(a, pa).unwrap(), t.remove_edge(b, pb).unwrap());
    t.add_edge(b, pa, wa);
    t.add_edge(a, pb, wb);
}
