//! Degree-3 representations of weighted phylogenies and simulation of STT
//! operations on them by zero-overhead restricted operations.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::canon::is_isomorphic;
use crate::error::{Error, Result};
use crate::stt::{apply_op, ScriptTag, SttOperation, SttScript, Target};
use crate::tree::{NodeId, Tree};
use crate::weight::Weight;

/// A degree-3 tree obtained from `X` by splitting every node of degree
/// `k > 3` into a path of `k - 2` nodes joined by zero-weight edges.
#[derive(Clone, Debug)]
pub struct Degree3Representation {
    pub tree: Tree,
    /// Zero-cost restricted script turning `X` into `tree`.
    pub script: SttScript,
    cluster_of: HashMap<NodeId, NodeId>,
}

impl Degree3Representation {
    /// The node of `X` that representation node `v` belongs to.
    pub fn cluster(&self, v: NodeId) -> Option<NodeId> {
        self.cluster_of.get(&v).copied()
    }

    /// Representation nodes per node of `X`.
    pub fn members(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut m: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (&v, &c) in &self.cluster_of {
            m.entry(c).or_default().push(v);
        }
        for v in m.values_mut() {
            v.sort_unstable();
        }
        m
    }

    /// The representation edge standing for edge `(a, b)` of `X`, oriented
    /// from `a`'s cluster.
    pub fn image(&self, a: NodeId, b: NodeId) -> Option<(NodeId, NodeId)> {
        let members = self.members();
        for &x in members.get(&a)? {
            for y in self.tree.neighbors(x) {
                if self.cluster(y) == Some(b) {
                    return Some((x, y));
                }
            }
        }
        None
    }
}

/// Neighbors of `u` ordered by the least leaf label on their side.
fn ordered_neighbors(x: &Tree, least_below: &[Option<&str>], parent: &HashMap<NodeId, NodeId>, u: NodeId) -> Vec<NodeId> {
    let mut nb: Vec<NodeId> = x.neighbors(u).collect();
    nb.sort_by_key(|&y| {
        if parent.get(&u) == Some(&y) {
            (0, None)
        } else {
            (1, least_below[y])
        }
    });
    nb
}

pub fn degree3_representation(x: &Tree) -> Result<Degree3Representation> {
    degree3_representation_by(x, |_, _| {})
}

/// As [`degree3_representation`], with `order` free to permute the
/// canonical neighbor order `e_0, .., e_{k-1}` of each high-degree node.
pub fn degree3_representation_by(
    x: &Tree,
    mut order: impl FnMut(NodeId, &mut Vec<NodeId>),
) -> Result<Degree3Representation> {
    if !x.is_weighted() {
        return Err(Error::Unsupported("degree-3 representations need a weighted tree"));
    }
    let least = x
        .leaves()
        .min_by(|&a, &b| x.label(a).cmp(&x.label(b)))
        .ok_or(Error::EmptyLabelSet)?;
    let walk = x.preorder(least);
    let mut least_below: Vec<Option<&str>> = vec![None; x.capacity()];
    let mut parent = HashMap::new();
    for &(v, p) in walk.iter().rev() {
        if let Some(l) = x.label(v) {
            least_below[v] = Some(l);
        }
        if let Some(p) = p {
            parent.insert(v, p);
            if least_below[p].is_none() || least_below[v] < least_below[p] {
                least_below[p] = least_below[v];
            }
        }
    }
    let mut tree = x.clone();
    let mut script = SttScript::new(ScriptTag::Representation);
    let mut cluster_of: HashMap<NodeId, NodeId> = x.node_ids().map(|v| (v, v)).collect();
    let mut nodes: Vec<NodeId> = x.internal_nodes().filter(|&u| x.degree(u) > 3).collect();
    nodes.sort_unstable();
    for u in nodes {
        let mut e = ordered_neighbors(x, &least_below, &parent, u);
        order(u, &mut e);
        let k = e.len();
        // earlier splits may have moved the far end of an edge onto a new node
        let current = |tree: &Tree, cl: &HashMap<NodeId, NodeId>, c: NodeId| {
            tree.neighbors(u).find(|y| cl[y] == c).unwrap()
        };
        let v = current(&tree, &cluster_of, e[0]);
        let mut prev = u;
        for &ei in &e[1..=k - 3] {
            let op = SttOperation::to_edge(u, current(&tree, &cluster_of, ei), prev, v, Weight::zero());
            let a = script.apply(&mut tree, op)?;
            cluster_of.insert(a.attach, u);
            prev = a.attach;
        }
    }
    debug_assert!(script.total().is_zero());
    Ok(Degree3Representation {
        tree,
        script,
        cluster_of,
    })
}

fn split_key(t: &Tree, a: NodeId, b: NodeId, least: &str) -> Vec<String> {
    let side = t.side_labels(a, b);
    if side.first().map(String::as_str) == Some(least) {
        t.side_labels(b, a)
    } else {
        side
    }
}

/// Checks that `rep` is a degree-3 representation of `x`: all internal
/// degrees are 3, every edge split of `x` occurs with its weight, the
/// remaining edges weigh 0, number `Σ(k-3)`, and form paths.
pub fn is_representation(x: &Tree, rep: &Tree) -> bool {
    if x.leaf_labels() != rep.leaf_labels() || rep.internal_nodes().any(|v| rep.degree(v) != 3) {
        return false;
    }
    let Some(least) = x.leaves().filter_map(|v| x.label(v)).min() else {
        return false;
    };
    let mut splits: HashMap<Vec<String>, Weight> = HashMap::new();
    for (a, b) in x.edges() {
        splits.insert(split_key(x, a, b, least), x.weight(a, b).unwrap().clone());
    }
    let extra_expected: usize = x.internal_nodes().map(|v| x.degree(v).saturating_sub(3)).sum();
    let mut extra = 0;
    let mut extra_deg: HashMap<NodeId, usize> = HashMap::new();
    for (a, b) in rep.edges() {
        let w = rep.weight(a, b).unwrap();
        match splits.remove(&split_key(rep, a, b, least)) {
            Some(xw) if xw == *w => {}
            Some(_) => return false,
            None if w.is_zero() => {
                extra += 1;
                *extra_deg.entry(a).or_insert(0) += 1;
                *extra_deg.entry(b).or_insert(0) += 1;
            }
            None => return false,
        }
    }
    splits.is_empty() && extra == extra_expected && extra_deg.values().all(|&d| d <= 2)
}

/// Result of simulating one operation of `X` on a representation.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub script: SttScript,
    /// `X` after the operation.
    pub x: Tree,
    /// The representation after the simulated script.
    pub rep: Degree3Representation,
}

/// Simulates `op` on `x` by restricted operations on `rep` of equal total
/// cost. Edge targets map to the image edge; a degree-3 target node to a
/// zero split of one of its edges; a higher-degree target node to a zero
/// split of one of its cluster's internal edges.
pub fn simulate_on_representation(x: &Tree, op: &SttOperation, rep: &Degree3Representation) -> Result<Simulation> {
    let mut xt = x.clone();
    let mut r = rep.clone();
    let (a_anchor, a_sub) = r
        .image(op.anchor, op.subtree)
        .ok_or_else(|| Error::InvalidOperation("detached edge has no image".into()))?;
    let target = match &op.target {
        Target::Edge { v, w, split } => {
            let (iv, iw) = r
                .image(*v, *w)
                .ok_or_else(|| Error::InvalidOperation("target edge has no image".into()))?;
            Target::Edge {
                v: iv,
                w: iw,
                split: split.clone(),
            }
        }
        Target::Node(t) => {
            let members = r.members();
            let ms = members.get(t).ok_or(Error::UnknownNode(*t))?;
            if ms.len() == 1 {
                let tv = ms[0];
                let nb = r.tree.neighbors(tv).min().unwrap();
                Target::Edge {
                    v: tv,
                    w: nb,
                    split: Weight::zero(),
                }
            } else {
                let (y1, y2) = ms
                    .iter()
                    .flat_map(|&y| r.tree.neighbors(y).map(move |z| (y, z)))
                    .find(|&(y, z)| y < z && r.cluster(z) == Some(*t))
                    .ok_or_else(|| Error::Internal("cluster without internal edge".into()))?;
                Target::Edge {
                    v: y1,
                    w: y2,
                    split: Weight::zero(),
                }
            }
        }
    };
    let xa = apply_op(&mut xt, op)?;
    let mut script = SttScript::new(ScriptTag::Simulation);
    let ra = script.apply(
        &mut r.tree,
        SttOperation {
            anchor: a_anchor,
            subtree: a_sub,
            target,
            reuse_id: None,
        },
    )?;
    if ra.created {
        let c = match &op.target {
            Target::Node(t) => *t,
            Target::Edge { .. } => xa.attach,
        };
        r.cluster_of.insert(ra.attach, c);
    }
    if ra.merged.is_some() {
        r.cluster_of.remove(&a_anchor);
    }
    if xa.merged.is_some() && r.members().contains_key(&op.anchor) {
        return Err(Error::Internal("suppressed node still has representatives".into()));
    }
    if script.total() != xa.cost {
        return Err(Error::Internal(format!(
            "simulation cost {} differs from {}",
            script.total(),
            xa.cost
        )));
    }
    r.script = SttScript::new(ScriptTag::Representation);
    Ok(Simulation { script, x: xt, rep: r })
}

/// Ports of cluster `c` in path order, grouped by path node.
fn caterpillar(rep: &Degree3Representation, c: NodeId, members: &[NodeId]) -> Vec<Vec<NodeId>> {
    let inside = |v: NodeId| rep.cluster(v) == Some(c);
    let start = members
        .iter()
        .copied()
        .find(|&m| rep.tree.neighbors(m).filter(|&y| inside(y)).count() <= 1)
        .unwrap();
    let mut groups = Vec::new();
    let mut prev = None;
    let mut at = Some(start);
    while let Some(v) = at {
        let mut ports: Vec<NodeId> = rep
            .tree
            .neighbors(v)
            .filter(|&y| !inside(y))
            .map(|y| rep.cluster(y).unwrap())
            .collect();
        ports.sort_unstable();
        groups.push(ports);
        let next = rep.tree.neighbors(v).find(|&y| inside(y) && Some(y) != prev);
        prev = Some(v);
        at = next;
    }
    groups
}

fn same_caterpillar(a: &[Vec<NodeId>], b: &[Vec<NodeId>]) -> bool {
    a == b || a.iter().rev().eq(b.iter())
}

/// A zero-cost restricted script turning `a`'s tree into a tree isomorphic
/// to `b`'s, for two representations of the same tree.
pub fn rep_equivalence_check(a: &Degree3Representation, b: &Degree3Representation) -> Result<SttScript> {
    let (ma, mb) = (a.members(), b.members());
    let sizes = |m: &BTreeMap<NodeId, Vec<NodeId>>| m.iter().map(|(&c, v)| (c, v.len())).collect::<Vec<_>>();
    if sizes(&ma) != sizes(&mb) || a.tree.leaf_labels() != b.tree.leaf_labels() {
        return Err(Error::InvalidInstance("representations of different trees".into()));
    }
    let mut cur = a.clone();
    let mut script = SttScript::new(ScriptTag::Representation);
    for (&c, members) in &mb {
        if members.len() < 2 {
            continue;
        }
        let want = caterpillar(b, c, members);
        let have = caterpillar(&cur, c, &cur.members()[&c]);
        let mut wp: Vec<NodeId> = want.iter().flatten().copied().collect();
        let mut hp: Vec<NodeId> = have.iter().flatten().copied().collect();
        wp.sort_unstable();
        hp.sort_unstable();
        if wp != hp {
            return Err(Error::InvalidInstance("representations of different trees".into()));
        }
        if same_caterpillar(&have, &want) {
            continue;
        }
        let order: Vec<NodeId> = want.iter().flatten().copied().collect();
        let k = order.len();
        let first = order[0];
        // port edges are identified by their outer endpoint, which is fixed
        let (_, p1_out) = cur.image(c, first).unwrap();
        for &q in order[1..k - 1].iter().rev() {
            let (anchor, out) = cur.image(c, q).unwrap();
            let (near, _) = cur.image(c, first).unwrap();
            let op = SttOperation::to_edge(anchor, out, near, p1_out, Weight::zero());
            let applied = script.apply(&mut cur.tree, op)?;
            cur.cluster_of.insert(applied.attach, c);
            if applied.merged.is_some() {
                cur.cluster_of.remove(&anchor);
            }
        }
    }
    if !script.total().is_zero() || !script.only_restricted() {
        return Err(Error::Internal("equivalence script is not zero-cost restricted".into()));
    }
    if is_isomorphic(&cur.tree, &b.tree).is_none() {
        return Err(Error::Internal("equivalence script missed the target".into()));
    }
    Ok(script)
}

/// Nodes of `X` whose degree exceeds 3.
pub fn high_degree_nodes(x: &Tree) -> HashSet<NodeId> {
    x.internal_nodes().filter(|&v| x.degree(v) > 3).collect()
}
