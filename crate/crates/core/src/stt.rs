//! Subtree transfer operations and scripts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{NodeId, Tree};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    /// A new node `x` on edge `(v, w)` with `w(v, x) = split`. The split is
    /// ignored on unweighted trees.
    Edge { v: NodeId, w: NodeId, split: Weight },
    /// An existing internal node.
    Node(NodeId),
}

/// Detach the subtree hanging off `anchor` through neighbor `subtree` and
/// reattach it at `target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SttOperation {
    pub anchor: NodeId,
    pub subtree: NodeId,
    pub target: Target,
    /// Id for the node created on a target edge; fresh when `None`.
    pub reuse_id: Option<NodeId>,
}

impl SttOperation {
    pub fn to_node(anchor: NodeId, subtree: NodeId, t: NodeId) -> Self {
        SttOperation {
            anchor,
            subtree,
            target: Target::Node(t),
            reuse_id: None,
        }
    }

    pub fn to_edge(anchor: NodeId, subtree: NodeId, v: NodeId, w: NodeId, split: Weight) -> Self {
        SttOperation {
            anchor,
            subtree,
            target: Target::Edge { v, w, split },
            reuse_id: None,
        }
    }

    /// Restricted operations always target an edge.
    pub fn is_restricted(&self) -> bool {
        matches!(self.target, Target::Edge { .. })
    }
}

/// What an applied operation did, enough to undo it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    /// Node the subtree now hangs from.
    pub attach: NodeId,
    /// Whether `attach` was created on a target edge.
    pub created: bool,
    /// The anchor was suppressed: its former neighbors and `w(p1, anchor)`.
    pub merged: Option<(NodeId, NodeId, Weight)>,
    pub cost: Weight,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidOperation(msg.into()))
}

fn path_weight(tree: &Tree, path: &[NodeId]) -> Weight {
    path.windows(2)
        .map(|p| tree.weight(p[0], p[1]).unwrap().clone())
        .sum()
}

/// Checks `op` against `tree` and returns its cost: the length (edges, or
/// weight on weighted trees) of the path from the anchor to the attachment
/// point once the subtree is removed. A new node on an edge counts as one
/// edge further than the nearer endpoint; on weighted trees the split part
/// on the anchor's side is added instead.
pub fn cost_of(tree: &Tree, op: &SttOperation) -> Result<Weight> {
    let (u, s) = (op.anchor, op.subtree);
    if !tree.is_alive(u) || !tree.is_alive(s) {
        return Err(Error::UnknownNode(if tree.is_alive(u) { s } else { u }));
    }
    if !tree.has_edge(u, s) {
        return Err(Error::UnknownEdge(u, s));
    }
    if tree.is_leaf(u) {
        return invalid("the anchor must be an internal node");
    }
    let through_s = |path: &[NodeId]| path.len() > 1 && path[1] == s;
    match &op.target {
        Target::Node(t) => {
            let t = *t;
            if !tree.is_alive(t) {
                return Err(Error::UnknownNode(t));
            }
            if t == u {
                return invalid("target node equals the anchor");
            }
            if tree.is_leaf(t) {
                return invalid("target node is a leaf");
            }
            let path = tree.path(u, t).unwrap();
            if through_s(&path) {
                return invalid("target lies inside the detached subtree");
            }
            Ok(if tree.is_weighted() {
                path_weight(tree, &path)
            } else {
                Weight::from_integer(path.len() as i64 - 1)
            })
        }
        Target::Edge { v, w, split } => {
            let (v, w) = (*v, *w);
            let total = tree.weight(v, w).ok_or(Error::UnknownEdge(v, w))?.clone();
            let pv = tree.path(u, v).unwrap();
            let pw = tree.path(u, w).unwrap();
            if through_s(&pv) || through_s(&pw) || (u == v && w == s) || (u == w && v == s) {
                return invalid("target lies inside the detached subtree");
            }
            if tree.is_weighted() && (split.is_negative() || *split > total) {
                return Err(Error::InvalidWeight(format!("split {split} outside [0, {total}]")));
            }
            if !tree.is_weighted() {
                let near = pv.len().min(pw.len()) as i64 - 1;
                return Ok(Weight::from_integer(near + 1));
            }
            Ok(if pv.len() <= pw.len() {
                path_weight(tree, &pv) + split.clone()
            } else {
                path_weight(tree, &pw) + (total - split.clone())
            })
        }
    }
}

/// Applies `op` in place. The tree is left unchanged on error.
pub fn apply_op(tree: &mut Tree, op: &SttOperation) -> Result<Applied> {
    let cost = cost_of(tree, op)?;
    if let Some(id) = op.reuse_id {
        if tree.is_alive(id) {
            return invalid(format!("node id {id} is in use"));
        }
    }
    let (u, s) = (op.anchor, op.subtree);
    let we = tree.remove_edge(u, s)?;
    let (attach, created) = match &op.target {
        Target::Node(t) => (*t, false),
        Target::Edge { v, w, split } => {
            let total = tree.remove_edge(*v, *w)?;
            let x = match op.reuse_id {
                Some(id) => tree.revive(id)?,
                None => tree.add_internal(),
            };
            tree.add_edge(*v, x, split.clone());
            tree.add_edge(x, *w, total - split.clone());
            (x, true)
        }
    };
    tree.add_edge(attach, s, we);
    let mut merged = None;
    if tree.label(u).is_none() && tree.degree(u) == 2 {
        let nb: Vec<(NodeId, Weight)> = tree.incident(u).map(|(p, w)| (p, w.clone())).collect();
        let ((p1, w1), p2) = (nb[0].clone(), nb[1].0);
        tree.suppress(u)?;
        merged = Some((p1, p2, w1));
    }
    Ok(Applied {
        attach,
        created,
        merged,
        cost,
    })
}

/// The operation undoing `op`, given how it was applied. It costs the same.
pub fn reverse_op(op: &SttOperation, applied: &Applied) -> SttOperation {
    match &applied.merged {
        None => SttOperation::to_node(applied.attach, op.subtree, op.anchor),
        Some((p1, p2, w1)) => SttOperation {
            anchor: applied.attach,
            subtree: op.subtree,
            target: Target::Edge {
                v: *p1,
                w: *p2,
                split: w1.clone(),
            },
            reuse_id: Some(op.anchor),
        },
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptTag {
    #[default]
    Forward,
    Reversed,
    Simulation,
    Representation,
    Approximation,
    Gadget,
    Oracle,
}

/// A sequence of operations with the cost of each as recorded when it was
/// applied.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SttScript {
    pub tag: ScriptTag,
    pub ops: Vec<SttOperation>,
    pub costs: Vec<Weight>,
}

impl SttScript {
    pub fn new(tag: ScriptTag) -> Self {
        SttScript {
            tag,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn total(&self) -> Weight {
        self.costs.iter().sum()
    }

    /// Applies `op` to `tree` and records it.
    pub fn apply(&mut self, tree: &mut Tree, op: SttOperation) -> Result<Applied> {
        let a = apply_op(tree, &op)?;
        self.ops.push(op);
        self.costs.push(a.cost.clone());
        Ok(a)
    }

    pub fn extend(&mut self, other: SttScript) {
        self.ops.extend(other.ops);
        self.costs.extend(other.costs);
    }

    pub fn only_restricted(&self) -> bool {
        self.ops.iter().all(SttOperation::is_restricted)
    }
}

/// Replays `script` on a copy of `tree`, checking each recorded cost.
pub fn replay(tree: &Tree, script: &SttScript) -> Result<(Tree, Weight)> {
    let mut t = tree.clone();
    let mut total = Weight::zero();
    for (i, op) in script.ops.iter().enumerate() {
        let a = apply_op(&mut t, op)?;
        if let Some(c) = script.costs.get(i) {
            if *c != a.cost {
                return Err(Error::Internal(format!(
                    "operation {i} recorded cost {c} but costs {}",
                    a.cost
                )));
            }
        }
        total = total + a.cost;
    }
    Ok((t, total))
}

/// Reverses `script`, which must replay from `start`. The result replays
/// from the end tree back to a tree with the ids and shape of `start`.
pub fn reverse_script(start: &Tree, script: &SttScript) -> Result<SttScript> {
    let mut t = start.clone();
    let mut rev = Vec::with_capacity(script.len());
    for op in &script.ops {
        let a = apply_op(&mut t, op)?;
        rev.push((reverse_op(op, &a), a.cost));
    }
    rev.reverse();
    let (ops, costs) = rev.into_iter().unzip();
    Ok(SttScript {
        tag: ScriptTag::Reversed,
        ops,
        costs,
    })
}

/// Splits an operation of cost `k` on an unweighted tree into `k`
/// operations of cost 1 along the path to the target.
pub fn unit_steps(tree: &Tree, op: &SttOperation) -> Result<Vec<SttOperation>> {
    if tree.is_weighted() {
        return Err(Error::Unsupported("unit steps apply to unweighted trees"));
    }
    cost_of(tree, op)?;
    let (u, s) = (op.anchor, op.subtree);
    let (dest, last) = match &op.target {
        Target::Node(t) => (*t, None),
        Target::Edge { v, w, .. } => {
            let (pv, pw) = (tree.path(u, *v).unwrap(), tree.path(u, *w).unwrap());
            if pv.len() <= pw.len() {
                (*v, Some(*w))
            } else {
                (*w, Some(*v))
            }
        }
    };
    let path = tree.path(u, dest).unwrap();
    let mut t = tree.clone();
    let mut out = Vec::new();
    let mut at = u;
    for &next in &path[1..] {
        let step = SttOperation::to_node(at, s, next);
        let a = apply_op(&mut t, &step)?;
        out.push(step);
        at = a.attach;
    }
    if let Some(far) = last {
        out.push(SttOperation::to_edge(at, s, at, far, Weight::one()));
    }
    Ok(out)
}
