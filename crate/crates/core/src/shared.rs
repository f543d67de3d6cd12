//! Shared and non-shared edges of two phylogenies.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::labeling::{partition_label, RootedBuilder, RootedLabeledTree, Symbol};
use crate::multiset::MultiSet;
use crate::tree::{edge_bipartition, NodeId, Tree};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Leaf labels, internal degrees and edge weights.
    Full,
    /// Leaf labels only.
    LeafLabels,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeReport {
    pub u: NodeId,
    pub v: NodeId,
    pub pendant: bool,
    pub shared: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharedEdgeReport {
    pub mode: Mode,
    pub left: Vec<EdgeReport>,
    pub right: Vec<EdgeReport>,
}

impl SharedEdgeReport {
    /// Non-shared edges of the first tree.
    pub fn b(&self) -> usize {
        self.left.iter().filter(|e| !e.shared).count()
    }

    /// Non-shared edges of the second tree.
    pub fn b_prime(&self) -> usize {
        self.right.iter().filter(|e| !e.shared).count()
    }

    pub fn side(&self, side: usize) -> &[EdgeReport] {
        if side == 0 {
            &self.left
        } else {
            &self.right
        }
    }

    pub fn nonshared(&self, side: usize) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.side(side).iter().filter(|e| !e.shared).map(|e| (e.u, e.v))
    }

    pub fn is_shared(&self, side: usize, u: NodeId, v: NodeId) -> Option<bool> {
        self.side(side)
            .iter()
            .find(|e| (e.u, e.v) == (u.min(v), u.max(v)))
            .map(|e| e.shared)
    }
}

/// The rooted trees `R`, `R'` built from `T`, `T'` and, per tree, the node
/// of `R` standing for each edge that the labeling decides.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub trees: [RootedLabeledTree; 2],
    // indexed by the lower endpoint of an internal edge: (upper endpoint, node of R)
    up: [Vec<(NodeId, usize)>; 2],
    pub pendant_midpoints: bool,
}

const NO_EDGE: (NodeId, usize) = (NodeId::MAX, usize::MAX);

impl Reduction {
    /// Node of `R` (side 0) or `R'` (side 1) standing for the internal edge `{u, v}`.
    pub fn edge_node(&self, side: usize, u: NodeId, v: NodeId) -> Option<usize> {
        let up = &self.up[side];
        [(u, v), (v, u)]
            .into_iter()
            .find(|&(a, b)| up.get(a).is_some_and(|e| e.0 == b))
            .map(|(a, _)| up[a].1)
    }

    pub fn edge_nodes(&self, side: usize) -> impl Iterator<Item = usize> + '_ {
        self.up[side].iter().filter(|e| **e != NO_EDGE).map(|e| e.1)
    }
}

fn label_set(t: &Tree) -> Vec<&str> {
    let mut v: Vec<&str> = t.leaves().filter_map(|x| t.label(x)).collect();
    v.sort_unstable();
    v
}

fn check_labels(t: &Tree, tp: &Tree) -> Result<()> {
    let (a, b) = (label_set(t), label_set(tp));
    if a != b {
        let sa: HashSet<&str> = a.iter().copied().collect();
        let sb: HashSet<&str> = b.iter().copied().collect();
        let odd = sa.symmetric_difference(&sb).min().copied().unwrap_or("");
        return Err(Error::LabelMismatch(odd.to_string()));
    }
    Ok(())
}

fn multiset_check<T: Ord + Clone + std::fmt::Display>(
    what: &str,
    a: &MultiSet<T>,
    b: &MultiSet<T>,
) -> Result<()> {
    for x in a.distinct().chain(b.distinct()) {
        let (l, r) = (a.count(x), b.count(x));
        if l != r {
            return Err(Error::MultisetMismatch {
                symbol: format!("{what} {x}"),
                left: l,
                right: r,
            });
        }
    }
    Ok(())
}

fn degrees(t: &Tree) -> MultiSet<usize> {
    t.internal_nodes().map(|v| t.degree(v)).collect()
}

fn weights(t: &Tree) -> MultiSet<Weight> {
    t.edges()
        .into_iter()
        .map(|(a, b)| t.weight(a, b).unwrap().clone())
        .collect()
}

/// Checks the preconditions of the fast classification.
pub fn check_preconditions(t: &Tree, tp: &Tree, mode: Mode) -> Result<()> {
    check_labels(t, tp)?;
    if mode == Mode::Full {
        multiset_check("degree", &degrees(t), &degrees(tp))?;
        multiset_check("weight", &weights(t), &weights(tp))?;
    }
    Ok(())
}

fn all_equal<T: PartialEq>(mut it: impl Iterator<Item = T>) -> bool {
    match it.next() {
        Some(first) => it.all(|x| x == first),
        None => true,
    }
}

pub fn build_reduction(t: &Tree, tp: &Tree, mode: Mode) -> Result<Reduction> {
    check_preconditions(t, tp, mode)?;
    let labels = label_set(t);
    // numbering leaves in preorder keeps the sets merged together close in `R`
    let first_root = t.neighbors(t.find_leaf(labels[0]).unwrap()).next().unwrap();
    let label_sym: HashMap<&str, Symbol> = t
        .preorder(first_root)
        .into_iter()
        .filter_map(|(v, _)| t.label(v))
        .enumerate()
        .map(|(i, l)| (l, i as Symbol))
        .collect();
    let mut next = labels.len() as Symbol;
    let mut degree_sym: BTreeMap<usize, Symbol> = BTreeMap::new();
    let mut weight_sym: BTreeMap<Weight, Symbol> = BTreeMap::new();
    let full = mode == Mode::Full;
    // a symbol shared by every node or edge of both trees carries no
    // information: the split of a uniform symbol follows from the leaf split
    let degree_leaves = full
        && !all_equal([t, tp].into_iter().flat_map(|x| x.internal_nodes().map(move |v| x.degree(v))));
    let edge_midpoints = full
        && !all_equal([t, tp].into_iter().flat_map(|x| {
            x.internal_nodes().flat_map(move |v| x.incident(v).map(|(_, w)| w))
        }));
    let pendant_midpoints = full
        && !all_equal(
            [t, tp]
                .into_iter()
                .flat_map(|x| x.leaves().map(move |l| x.incident(l).next().unwrap().1)),
        );
    let mut trees = Vec::with_capacity(2);
    let mut up_edges: [Vec<(NodeId, usize)>; 2] = Default::default();
    for (side, tree) in [t, tp].into_iter().enumerate() {
        let a = tree.find_leaf(labels[0]).unwrap();
        let root = tree.neighbors(a).next().unwrap();
        let mut b = RootedBuilder::new();
        let mut rid = vec![usize::MAX; tree.capacity()];
        up_edges[side] = vec![NO_EDGE; tree.capacity()];
        for (v, p) in tree.preorder(root) {
            let mut up = p.map(|p| rid[p]);
            let mut mid = None;
            if let Some(p) = p {
                let pendant = tree.is_leaf(v);
                if (edge_midpoints && !pendant) || (pendant_midpoints && pendant) {
                    let w = tree.weight(p, v).unwrap().clone();
                    let sym = *weight_sym.entry(w).or_insert_with(|| {
                        next += 1;
                        next - 1
                    });
                    let s = b.add(up, None);
                    b.add(Some(s), Some(sym));
                    up = Some(s);
                    mid = Some(s);
                }
            }
            rid[v] = match tree.label(v) {
                Some(l) => b.add(up, Some(label_sym[l])),
                None => {
                    let x = b.add(up, None);
                    if degree_leaves {
                        let sym = *degree_sym.entry(tree.degree(v)).or_insert_with(|| {
                            next += 1;
                            next - 1
                        });
                        b.add(Some(x), Some(sym));
                    }
                    x
                }
            };
            if let Some(p) = p {
                if !tree.is_leaf(v) {
                    up_edges[side][v] = (p, mid.unwrap_or(rid[v]));
                }
            }
        }
        trees.push(b.build()?);
    }
    let [r, rp]: [RootedLabeledTree; 2] = trees.try_into().unwrap();
    Ok(Reduction {
        trees: [r, rp],
        up: up_edges,
        pendant_midpoints,
    })
}

fn pendant_weight(t: &Tree, leaf: NodeId) -> &Weight {
    t.incident(leaf).next().unwrap().1
}

/// Classifies every edge of both trees by reduction to partition labeling.
pub fn nonshared_edges(t: &Tree, tp: &Tree, mode: Mode) -> Result<SharedEdgeReport> {
    let red = build_reduction(t, tp, mode)?;
    let rho = partition_label(&red.trees[0], &red.trees[1])?;
    // an edge's label fixes the multisets on either side but not which of
    // its weights the edge itself carries
    let full = mode == Mode::Full;
    let mut present: [HashSet<(u32, Option<&Weight>)>; 2] = Default::default();
    for (side, tree) in [t, tp].into_iter().enumerate() {
        for (u, v) in tree.edges() {
            if let Some(x) = red.edge_node(side, u, v) {
                let w = full.then(|| tree.weight(u, v).unwrap());
                present[side].insert((rho.label(side, x).unwrap(), w));
            }
        }
    }
    let mut sides: [Vec<EdgeReport>; 2] = Default::default();
    for (side, (tree, other)) in [(t, tp), (tp, t)].into_iter().enumerate() {
        let index = other.label_index();
        for (u, v) in tree.edges() {
            let leaf = [u, v].into_iter().find(|&x| tree.is_leaf(x));
            let shared = match leaf {
                Some(_) if mode == Mode::LeafLabels => true,
                Some(x) => {
                    let y = index[tree.label(x).unwrap()];
                    pendant_weight(tree, x) == pendant_weight(other, y)
                }
                None => {
                    let x = red.edge_node(side, u, v).unwrap();
                    let w = full.then(|| tree.weight(u, v).unwrap());
                    present[1 - side].contains(&(rho.label(side, x).unwrap(), w))
                }
            };
            sides[side].push(EdgeReport {
                u,
                v,
                pendant: leaf.is_some(),
                shared,
            });
        }
    }
    let [left, right] = sides;
    Ok(SharedEdgeReport { mode, left, right })
}

/// Quadratic classification by comparing canonical bipartitions of every
/// edge; works on any pair with the same leaf labels.
pub fn nonshared_bruteforce(t: &Tree, tp: &Tree, mode: Mode) -> SharedEdgeReport {
    let mut labels: Vec<&str> = label_set(t);
    labels.extend(label_set(tp));
    labels.sort_unstable();
    labels.dedup();
    let label_id: HashMap<&str, u32> = labels.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
    let mut wset: Vec<&Weight> = Vec::new();
    for tree in [t, tp] {
        for (a, b) in tree.edges() {
            wset.push(tree.weight(a, b).unwrap());
        }
    }
    wset.sort_unstable();
    wset.dedup();
    let weight_id: HashMap<&Weight, u32> = wset.iter().enumerate().map(|(i, &w)| (w, i as u32)).collect();
    let keyer = Keyer {
        label_id: &label_id,
        weight_id: &weight_id,
        degree_slots: t.max_degree().max(tp.max_degree()) + 1,
        mode,
    };
    let digests: [Vec<((NodeId, NodeId), [u8; 16])>; 2] =
        [keyer.all(t), keyer.all(tp)];
    let mut index: [HashMap<[u8; 16], (NodeId, NodeId)>; 2] = Default::default();
    for side in 0..2 {
        for &(e, d) in &digests[side] {
            index[side].insert(d, e);
        }
    }
    let same = |e: (NodeId, NodeId), f: (NodeId, NodeId)| -> bool {
        let (x, y) = (
            edge_bipartition(t, e.0, e.1).unwrap(),
            edge_bipartition(tp, f.0, f.1).unwrap(),
        );
        match mode {
            Mode::LeafLabels => x.label_split == y.label_split,
            Mode::Full => x == y && t.weight(e.0, e.1) == tp.weight(f.0, f.1),
        }
    };
    let mut sides: [Vec<EdgeReport>; 2] = Default::default();
    for side in 0..2 {
        let tree = if side == 0 { t } else { tp };
        for &(e, d) in &digests[side] {
            let shared = index[1 - side].get(&d).is_some_and(|&f| {
                if side == 0 {
                    same(e, f)
                } else {
                    same(f, e)
                }
            });
            sides[side].push(EdgeReport {
                u: e.0,
                v: e.1,
                pendant: tree.is_pendant(e.0, e.1),
                shared,
            });
        }
    }
    let [left, right] = sides;
    SharedEdgeReport { mode, left, right }
}

struct Keyer<'a> {
    label_id: &'a HashMap<&'a str, u32>,
    weight_id: &'a HashMap<&'a Weight, u32>,
    degree_slots: usize,
    mode: Mode,
}

impl Keyer<'_> {
    fn all(&self, tree: &Tree) -> Vec<((NodeId, NodeId), [u8; 16])> {
        let nl = self.label_id.len();
        let total = self.counts(tree, tree.node_ids(), None);
        tree.edges()
            .into_iter()
            .map(|(u, v)| {
                let far = self.counts(tree, tree.side(u, v).into_iter(), Some((u, v)));
                let mut near: Vec<u32> = total.iter().zip(&far).map(|(a, b)| a - b).collect();
                let own = self.weight_id[tree.weight(u, v).unwrap()];
                if self.mode == Mode::Full {
                    near[nl + self.degree_slots + own as usize] -= 1;
                }
                let (first, second) = if far[0] > 0 { (far, near) } else { (near, far) };
                let mut h = Sha256::new();
                for c in first.iter().chain(&second) {
                    h.update(c.to_le_bytes());
                }
                if self.mode == Mode::Full {
                    h.update(own.to_le_bytes());
                }
                ((u, v), h.finalize()[..16].try_into().unwrap())
            })
            .collect()
    }

    /// Counts over a connected node set: leaf labels, internal degrees, and
    /// weights of edges inside the set other than `cut`.
    fn counts(
        &self,
        tree: &Tree,
        nodes: impl Iterator<Item = NodeId>,
        cut: Option<(NodeId, NodeId)>,
    ) -> Vec<u32> {
        let full = self.mode == Mode::Full;
        let nl = self.label_id.len();
        let len = nl + if full { self.degree_slots + self.weight_id.len() } else { 0 };
        let mut c = vec![0u32; len];
        for x in nodes {
            match tree.label(x) {
                Some(l) => c[self.label_id[l] as usize] += 1,
                None if full => c[nl + tree.degree(x)] += 1,
                None => {}
            }
            if full {
                for (y, w) in tree.incident(x) {
                    let is_cut = cut.is_some_and(|(a, b)| (x == a && y == b) || (x == b && y == a));
                    if x < y && !is_cut {
                        c[nl + self.degree_slots + self.weight_id[w] as usize] += 1;
                    }
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;

    fn pair(a: &str, b: &str, weighted: bool) -> (Tree, Tree) {
        (
            parse_newick(a, weighted).unwrap().into_tree(),
            parse_newick(b, weighted).unwrap().into_tree(),
        )
    }

    #[test]
    fn identity_has_no_nonshared() {
        let (t, tp) = pair("((a:1,b:2):3,(c:1,d:1):2,e:5);", "((a:1,b:2):3,(c:1,d:1):2,e:5);", true);
        for mode in [Mode::Full, Mode::LeafLabels] {
            let r = nonshared_edges(&t, &tp, mode).unwrap();
            assert_eq!((r.b(), r.b_prime()), (0, 0));
            assert_eq!(r, nonshared_bruteforce(&t, &tp, mode));
        }
    }

    #[test]
    fn opposing_quartets() {
        let opts = crate::newick::NewickOptions {
            normalize: true,
            ..Default::default()
        };
        let t = crate::newick::parse_newick_with("((a,b),(c,d));", opts).unwrap().into_tree();
        let tp = crate::newick::parse_newick_with("((a,c),(b,d));", opts).unwrap().into_tree();
        let r = nonshared_edges(&t, &tp, Mode::Full).unwrap();
        assert_eq!((r.b(), r.b_prime()), (1, 1));
        assert!(r.left.iter().all(|e| e.shared == e.pendant));
        assert_eq!(r, nonshared_bruteforce(&t, &tp, Mode::Full));
    }

    #[test]
    fn reduction_leaf_count() {
        let (t, tp) = pair("((a,b),(c,d),(e,f));", "((a,c),(b,d),(e,f));", false);
        let red = build_reduction(&t, &tp, Mode::Full).unwrap();
        // uniform degrees and weights add nothing to the labels
        assert_eq!(red.trees[0].leaves().len(), 6);
        assert_eq!(red.trees[1].leaves().len(), 6);
        assert!(!red.pendant_midpoints);
        let (t, tp) = pair("((a,b),(c,d),e,f);", "((a,c),(b,d),e,f);", false);
        let red = build_reduction(&t, &tp, Mode::Full).unwrap();
        // one degree symbol per internal node
        assert_eq!(red.trees[0].leaves().len(), 6 + 3);
        assert_eq!(red.trees[1].leaves().len(), 6 + 3);
    }

    #[test]
    fn degree_and_weight_symbols() {
        let (t, tp) = pair("((a:1,b:1):2,c:1,d:1);", "((a:1,c:1):2,b:1,d:1);", true);
        let red = build_reduction(&t, &tp, Mode::Full).unwrap();
        let syms = red.trees[0].leaf_symbols();
        // 4 labels and the weight symbol of the one internal edge
        assert_eq!(syms.len(), 5);
        assert_eq!(syms.values().filter(|&&c| c == 2).count(), 0);
        let (t2, _) = pair("((a:1,b:1):2,(c:1,d:1):3,e:1);", "((a:1,b:1):2,(c:1,d:1):3,e:1);", true);
        let red2 = build_reduction(&t2, &t2, Mode::Full).unwrap();
        assert_eq!(red2.trees[0].leaf_symbols().len(), 5 + 2);
    }

    #[test]
    fn precondition_errors() {
        let (t, tp) = pair("((a:1,b:1):2,c:1,d:1);", "((a:1,c:1):3,b:1,d:1);", true);
        assert!(matches!(
            nonshared_edges(&t, &tp, Mode::Full),
            Err(Error::MultisetMismatch { .. })
        ));
        assert!(nonshared_edges(&t, &tp, Mode::LeafLabels).is_ok());
        let (t, tp) = pair("(a,b,c);", "(a,b,x);", false);
        assert!(matches!(
            nonshared_edges(&t, &tp, Mode::LeafLabels),
            Err(Error::LabelMismatch(_))
        ));
    }

    #[test]
    fn stars_have_no_internal_edges() {
        let (t, tp) = pair("(a,b,c,d);", "(d,c,b,a);", false);
        let r = nonshared_bruteforce(&t, &tp, Mode::Full);
        assert!(r.left.iter().all(|e| e.pendant && e.shared));
    }

    #[test]
    fn changed_pendant_weight_makes_everything_nonshared() {
        let (t, tp) = pair("((a:1,b:1):1,(c:1,d:1):1,e:1);", "((a:1,b:1):1,(c:1,d:1):1,e:2);", true);
        let r = nonshared_bruteforce(&t, &tp, Mode::Full);
        assert!(r.left.iter().all(|e| !e.shared));
        assert!(r.right.iter().all(|e| !e.shared));
    }

    #[test]
    fn pendant_weights_matter_for_internal_edges() {
        // same topology and weight multisets; pendant weights of a and c swap
        let (t, tp) = pair(
            "((a:2,b:1):1,(c:1,d:1):1,e:1);",
            "((a:1,b:1):1,(c:2,d:1):1,e:1);",
            true,
        );
        let fast = nonshared_edges(&t, &tp, Mode::Full).unwrap();
        assert_eq!(fast, nonshared_bruteforce(&t, &tp, Mode::Full));
        assert!(fast.left.iter().filter(|e| !e.pendant).all(|e| !e.shared));
    }
}
