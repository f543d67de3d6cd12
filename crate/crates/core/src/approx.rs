//! Lower bound and (2d-4)-approximation of unweighted STT distance.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::canon::is_isomorphic;
use crate::error::{Error, Result};
use crate::shared::{nonshared_edges, Mode};
use crate::stt::{apply_op, reverse_script, ScriptTag, SttOperation, SttScript, Target};
use crate::tree::{NodeId, Phylogeny, Tree};

/// `max(b, b')` over non-leaf-label-shared edges.
pub fn stt_lower_bound(t: &Tree, tp: &Tree) -> Result<usize> {
    let r = nonshared_edges(t, tp, Mode::LeafLabels)?;
    Ok(r.b().max(r.b_prime()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub cost: u64,
    pub b: usize,
    pub b_prime: usize,
    pub lower_bound: usize,
    pub degree_bound: usize,
    pub ratio_bound: usize,
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub script: SttScript,
    pub certificate: Certificate,
    /// `T` after contracting its non-shared edges.
    pub contracted: Tree,
}

/// Contracts every edge of `edges` (internal edges of `tree`) by moving
/// subtrees onto a group anchor. Returns the contracted tree and the script.
pub fn contract_edges(tree: &Tree, edges: &[(NodeId, NodeId)]) -> Result<(Tree, SttScript)> {
    let mut t = tree.clone();
    let mut script = SttScript::new(ScriptTag::Forward);
    let mut pending: HashSet<(NodeId, NodeId)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if pending.is_empty() {
        return Ok((t, script));
    }
    let least = tree
        .leaves()
        .min_by(|&a, &b| tree.label(a).cmp(&tree.label(b)))
        .unwrap();
    let order: Vec<NodeId> = tree.preorder(least).into_iter().map(|(v, _)| v).collect();
    let key = |a: NodeId, b: NodeId| (a.min(b), a.max(b));
    for &x in &order {
        if tree.is_leaf(x) {
            continue;
        }
        let mut queue: VecDeque<NodeId> = t.neighbors(x).filter(|&y| pending.remove(&key(x, y))).collect();
        while let Some(y) = queue.pop_front() {
            let mut rest: Vec<NodeId> = t.neighbors(y).filter(|&c| c != x).collect();
            rest.sort_unstable();
            let keep = rest.pop().unwrap();
            for c in rest {
                script.apply(&mut t, SttOperation::to_node(y, c, x))?;
                if pending.remove(&key(y, c)) {
                    queue.push_back(c);
                }
            }
            if pending.remove(&key(y, keep)) {
                queue.push_back(keep);
            }
        }
    }
    debug_assert!(pending.is_empty());
    Ok((t, script))
}

/// Translates `script`, which replays from `from`, into node ids of `onto`
/// through the isomorphism `map` from `from` to `onto`.
pub fn rebase(from: &Tree, onto: &Tree, map: &HashMap<NodeId, NodeId>, script: &SttScript) -> Result<SttScript> {
    let mut a = from.clone();
    let mut b = onto.clone();
    let mut map = map.clone();
    let mut out = SttScript::new(script.tag);
    let tr = |m: &HashMap<NodeId, NodeId>, v: NodeId| {
        m.get(&v)
            .copied()
            .ok_or_else(|| Error::Internal(format!("node {v} has no image")))
    };
    for op in &script.ops {
        let target = match &op.target {
            Target::Node(t) => Target::Node(tr(&map, *t)?),
            Target::Edge { v, w, split } => Target::Edge {
                v: tr(&map, *v)?,
                w: tr(&map, *w)?,
                split: split.clone(),
            },
        };
        let moved = SttOperation {
            anchor: tr(&map, op.anchor)?,
            subtree: tr(&map, op.subtree)?,
            target,
            reuse_id: None,
        };
        let ra = apply_op(&mut a, op)?;
        let rb = out.apply(&mut b, moved)?;
        if ra.created {
            map.insert(ra.attach, rb.attach);
        }
    }
    Ok(out)
}

/// Contract the non-leaf-label-shared edges of both trees, then follow the
/// first contraction with the reverse of the second.
pub fn stt_approx(t: &Phylogeny, tp: &Phylogeny) -> Result<Approximation> {
    if t.is_weighted() || tp.is_weighted() {
        return Err(Error::Unsupported("the approximation is for unweighted trees"));
    }
    let report = nonshared_edges(t, tp, Mode::LeafLabels)?;
    let (b, b_prime) = (report.b(), report.b_prime());
    let left: Vec<_> = report.nonshared(0).collect();
    let right: Vec<_> = report.nonshared(1).collect();
    let (ts, sigma1) = contract_edges(t, &left)?;
    let (tps, sigma2) = contract_edges(tp, &right)?;
    let map = is_isomorphic(&tps, &ts)
        .ok_or_else(|| Error::Internal("contracted trees are not isomorphic".into()))?;
    let back = reverse_script(tp, &sigma2)?;
    let back = rebase(&tps, &ts, &map, &back)?;
    let mut script = sigma1;
    script.tag = ScriptTag::Approximation;
    script.extend(back);
    let cost = script.total();
    let cost: u64 = cost
        .numer()
        .try_into()
        .map_err(|_| Error::Internal("non-integral cost".into()))?;
    let d = t.degree_bound().max(tp.degree_bound());
    if cost > ((d - 2) * (b + b_prime)) as u64 {
        return Err(Error::Internal(format!(
            "cost {cost} exceeds (d-2)(b+b') = {}",
            (d - 2) * (b + b_prime)
        )));
    }
    Ok(Approximation {
        script,
        certificate: Certificate {
            cost,
            b,
            b_prime,
            lower_bound: b.max(b_prime),
            degree_bound: d,
            ratio_bound: 2 * d - 4,
        },
        contracted: ts,
    })
}
