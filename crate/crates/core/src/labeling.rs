//! Partition labeling of two rooted trees whose leaves carry symbols.
//!
//! Two internal nodes, in the same tree or across the trees, receive equal
//! labels exactly when the multisets of leaf symbols below them are equal.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rmq::Lca;

pub type Symbol = u32;

const NONE: u32 = u32::MAX;

/// A rooted tree with symbols on its leaves. Symbols may repeat; internal
/// nodes may have a single child.
#[derive(Clone, Debug)]
pub struct RootedLabeledTree {
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    symbol: Vec<Symbol>,
    root: usize,
    leaves: Vec<usize>,
    lca: Lca,
}

/// Incremental construction of a [`RootedLabeledTree`].
#[derive(Clone, Debug, Default)]
pub struct RootedBuilder {
    parent: Vec<u32>,
    symbol: Vec<Symbol>,
}

impl RootedBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node; `parent` is `None` for the root.
    pub fn add(&mut self, parent: Option<usize>, symbol: Option<Symbol>) -> usize {
        self.parent.push(parent.map_or(NONE, |p| p as u32));
        self.symbol.push(symbol.unwrap_or(NONE));
        self.parent.len() - 1
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn build(self) -> Result<RootedLabeledTree> {
        RootedLabeledTree::from_parents(self.parent, self.symbol)
    }
}

impl RootedLabeledTree {
    fn from_parents(parent: Vec<u32>, symbol: Vec<Symbol>) -> Result<Self> {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        let mut root = None;
        for (v, &p) in parent.iter().enumerate() {
            if p == NONE {
                if root.replace(v).is_some() {
                    return Err(Error::InvalidTree("more than one root".into()));
                }
            } else if (p as usize) < n {
                children[p as usize].push(v as u32);
            } else {
                return Err(Error::UnknownNode(p as usize));
            }
        }
        let root = root.ok_or_else(|| Error::InvalidTree("no root".into()))?;
        let mut walk = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let p = parent[v];
            walk.push((v, (p != NONE).then_some(p as usize)));
            stack.extend(children[v].iter().rev().map(|&c| c as usize));
        }
        if walk.len() != n {
            return Err(Error::InvalidTree("parent links contain a cycle".into()));
        }
        let mut leaves = Vec::new();
        for &(v, _) in &walk {
            let leaf = children[v].is_empty();
            if leaf != (symbol[v] != NONE) {
                return Err(Error::InvalidTree(format!(
                    "node {v}: symbols belong on leaves exactly"
                )));
            }
            if leaf {
                leaves.push(v);
            }
        }
        let lca = Lca::from_walk(n, &walk);
        Ok(RootedLabeledTree {
            parent,
            children,
            symbol,
            root,
            leaves,
            lca,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[v];
        (p != NONE).then_some(p as usize)
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.children[v].iter().map(|&c| c as usize)
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn symbol(&self, v: usize) -> Option<Symbol> {
        let s = self.symbol[v];
        (s != NONE).then_some(s)
    }

    /// Leaves in preorder.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn preorder(&self) -> &[usize] {
        self.lca.preorder()
    }

    pub fn preorder_rank(&self, v: usize) -> usize {
        self.lca.preorder_rank(v)
    }

    pub fn depth(&self, v: usize) -> usize {
        self.lca.depth(v)
    }

    pub fn lca(&self, u: usize, v: usize) -> usize {
        self.lca.lca(u, v)
    }

    pub fn lca_depth(&self, u: usize, v: usize) -> (usize, usize) {
        self.lca.lca_depth(u, v)
    }

    pub fn leaf_symbols(&self) -> BTreeMap<Symbol, usize> {
        let mut m = BTreeMap::new();
        for &v in &self.leaves {
            *m.entry(self.symbol[v]).or_insert(0) += 1;
        }
        m
    }
}

/// The contraction of a rooted tree onto a set of its leaves: those leaves
/// and their pairwise LCAs. Nodes are listed children first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubtree {
    nodes: Vec<usize>,
    parent: Vec<u32>,
}

impl InducedSubtree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Original node of induced node `i`.
    pub fn original(&self, i: usize) -> usize {
        self.nodes[i]
    }

    pub fn originals(&self) -> &[usize] {
        &self.nodes
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        let p = self.parent[i];
        (p != NONE).then_some(p as usize)
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn leaf_count(&self) -> usize {
        let mut has_child = vec![false; self.len()];
        for i in 0..self.len() {
            if let Some(p) = self.parent(i) {
                has_child[p] = true;
            }
        }
        has_child.iter().filter(|&&c| !c).count()
    }
}

pub fn induced_subtree(r: &RootedLabeledTree, symbols: &[Symbol]) -> Result<InducedSubtree> {
    let keep: std::collections::HashSet<Symbol> = symbols.iter().copied().collect();
    let leaves: Vec<usize> = r
        .leaves()
        .iter()
        .copied()
        .filter(|&v| keep.contains(&r.symbol[v]))
        .collect();
    if leaves.is_empty() {
        return Err(Error::EmptyLabelSet);
    }
    Ok(induce(r, &leaves, &mut 0, &mut InduceScratch::default()))
}

/// Reusable buffers for building induced subtrees.
#[derive(Default)]
struct InduceScratch {
    // (node, depth, push serial)
    stack: Vec<(usize, u32, u32)>,
    up: Vec<u32>,
    slot: Vec<u32>,
}

fn induce(r: &RootedLabeledTree, leaves: &[usize], ops: &mut u64, scratch: &mut InduceScratch) -> InducedSubtree {
    let mut nodes = Vec::with_capacity(2 * leaves.len());
    let mut parent = Vec::with_capacity(2 * leaves.len());
    induce_into(r, leaves, ops, scratch, &mut nodes, &mut parent);
    InducedSubtree { nodes, parent }
}

/// Appends the subtree induced by `leaves` to `nodes` and `parent`, with
/// parents indexed from the first appended node. `leaves` must be distinct
/// leaves in preorder.
fn induce_into(
    r: &RootedLabeledTree,
    leaves: &[usize],
    ops: &mut u64,
    scratch: &mut InduceScratch,
    nodes: &mut Vec<usize>,
    parent: &mut Vec<u32>,
) {
    let InduceScratch { stack, up, slot } = scratch;
    stack.clear();
    up.clear();
    slot.clear();
    let base = nodes.len();
    // a parent is emitted after its children, so refer to it by push serial
    // and translate to positions at the end
    let mut emit = |stack: &mut Vec<(usize, u32, u32)>, slot: &mut Vec<u32>, up_serial: u32| {
        let (x, _, s) = stack.pop().unwrap();
        slot[s as usize] = (nodes.len() - base) as u32;
        nodes.push(x);
        up.push(up_serial);
    };
    for &v in leaves {
        *ops += 1;
        let dv = r.depth(v) as u32;
        let Some(&(top, _, _)) = stack.last() else {
            stack.push((v, dv, slot.len() as u32));
            slot.push(NONE);
            continue;
        };
        let (l, dl) = r.lca_depth(top, v);
        let dl = dl as u32;
        while stack.len() >= 2 && stack[stack.len() - 2].1 >= dl {
            let s = stack[stack.len() - 2].2;
            emit(stack, slot, s);
            *ops += 1;
        }
        if stack.last().unwrap().0 != l {
            let s = slot.len() as u32;
            slot.push(NONE);
            emit(stack, slot, s);
            stack.push((l, dl, s));
        }
        stack.push((v, dv, slot.len() as u32));
        slot.push(NONE);
    }
    while stack.len() >= 2 {
        let s = stack[stack.len() - 2].2;
        emit(stack, slot, s);
        *ops += 1;
    }
    emit(stack, slot, NONE);
    parent.extend(up.iter().map(|&s| if s == NONE { NONE } else { slot[s as usize] }));
}

/// Labels of one pair of induced subtrees `(R_A, R'_A)` for a symbol set
/// `A`; every induced node, leaves included, carries a label.
#[derive(Clone, Debug)]
pub struct SetLabeling {
    symbols: Vec<Symbol>,
    leaves: [Vec<usize>; 2],
    induced: [InducedSubtree; 2],
    labels: [Vec<u32>; 2],
}

impl SetLabeling {
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn induced(&self, side: usize) -> &InducedSubtree {
        &self.induced[side]
    }

    pub fn labels(&self, side: usize) -> &[u32] {
        &self.labels[side]
    }

    fn max_label(&self) -> u32 {
        self.labels.iter().flatten().copied().max().unwrap_or(0)
    }

    fn parts(&self) -> [Part<'_>; 2] {
        [0, 1].map(|side| Part(self.induced[side].originals(), &self.labels[side]))
    }
}

/// Phase 1: label each induced node by its number of `a`-leaves.
pub fn phase1_singleton_labeling(
    ra: InducedSubtree,
    rpa: InducedSubtree,
    a: Symbol,
    leaves: [Vec<usize>; 2],
) -> SetLabeling {
    let labels = [leaf_counts(&ra.parent), leaf_counts(&rpa.parent)];
    SetLabeling {
        symbols: vec![a],
        leaves,
        induced: [ra, rpa],
        labels,
    }
}

struct Labeler<'a> {
    trees: [&'a RootedLabeledTree; 2],
    induce: [InduceScratch; 2],
    below: Vec<(u32, u32)>,
    all: Vec<(u32, u32)>,
    idx: Vec<u32>,
    tmp: Vec<u32>,
    start: Vec<usize>,
    ops: u64,
}

impl<'a> Labeler<'a> {
    fn new(r: &'a RootedLabeledTree, rp: &'a RootedLabeledTree) -> Self {
        Labeler {
            trees: [r, rp],
            induce: Default::default(),
            below: Vec::new(),
            all: Vec::new(),
            idx: Vec::new(),
            tmp: Vec::new(),
            start: Vec::new(),
            ops: 0,
        }
    }

    fn merge(&mut self, a: &SetLabeling, b: &SetLabeling) -> Result<SetLabeling> {
        check_disjoint(&a.symbols, &b.symbols)?;
        let mut leaves: [Vec<usize>; 2] = Default::default();
        let mut induced: Vec<InducedSubtree> = Vec::with_capacity(2);
        for side in 0..2 {
            let t = self.trees[side];
            leaves[side] = merge_by_rank(t, &a.leaves[side], &b.leaves[side]);
            induced.push(induce(t, &leaves[side], &mut self.ops, &mut self.induce[side]));
        }
        let [ir, irp]: [InducedSubtree; 2] = induced.try_into().unwrap();
        let ab = [(ir.originals(), ir.parent.as_slice()), (irp.originals(), irp.parent.as_slice())];
        let split = self.tuples(a.parts(), b.parts(), ab);
        let mut labels: [Vec<u32>; 2] = Default::default();
        let [l0, l1] = &mut labels;
        self.relabel(a.max_label(), b.max_label(), split, [l0, l1]);
        let symbols = merge_sorted(&a.symbols, &b.symbols, |x| x);
        Ok(SetLabeling {
            symbols,
            leaves,
            induced: [ir, irp],
            labels,
        })
    }

    /// Step 1: the `(A, B)` tuple of every node of both `R_{A∪B}` trees,
    /// collected in `all` with those of `R` first. Returns their number.
    fn tuples(&mut self, a: [Part<'_>; 2], b: [Part<'_>; 2], ab: [(&[usize], &[u32]); 2]) -> usize {
        self.all.clear();
        let mut split = 0;
        for side in 0..2 {
            // induced nodes come in postorder, so those of `R_A` and `R_B`
            // are subsequences of those of `R_{A∪B}`
            let (Part(na, la), Part(nb, lb)) = (a[side], b[side]);
            let (mut ia, mut ib) = (0, 0);
            let (nodes, parent) = ab[side];
            self.below.clear();
            self.below.resize(nodes.len(), (0, 0));
            for (i, &x) in nodes.iter().enumerate() {
                self.ops += 1;
                let mut ta = self.below[i].0;
                if na.get(ia) == Some(&x) {
                    ta = la[ia] + 1;
                    ia += 1;
                }
                let mut tb = self.below[i].1;
                if nb.get(ib) == Some(&x) {
                    tb = lb[ib] + 1;
                    ib += 1;
                }
                debug_assert!(ta > 0 || tb > 0, "induced node without leaves");
                let p = parent[i];
                if p != NONE {
                    let below = &mut self.below[p as usize];
                    if ta > 0 {
                        below.0 = ta;
                    }
                    if tb > 0 {
                        below.1 = tb;
                    }
                }
                self.all.push((ta, tb));
            }
            debug_assert_eq!((ia, ib), (na.len(), nb.len()));
            if side == 0 {
                split = self.all.len();
            }
        }
        split
    }

    /// Step 2: sort all tuples of both trees jointly by two counting passes
    /// and number the distinct ones from 1. Labels are appended to `out`;
    /// returns the largest.
    fn relabel(&mut self, max_a: u32, max_b: u32, split: usize, out: [&mut Vec<u32>; 2]) -> u32 {
        let Labeler {
            all, idx, tmp, start, ..
        } = self;
        let n = all.len();
        idx.clear();
        idx.extend(0..n as u32);
        counting_sort(idx, tmp, start, max_b as usize + 2, |i| all[i as usize].1 as usize);
        counting_sort(tmp, idx, start, max_a as usize + 2, |i| all[i as usize].0 as usize);
        self.ops += 2 * n as u64;
        let [left, right] = out;
        let (bl, br) = (left.len(), right.len());
        left.resize(bl + split, 0);
        right.resize(br + n - split, 0);
        let mut next = 0;
        let mut prev = None;
        for &i in self.idx.iter() {
            let t = self.all[i as usize];
            if prev != Some(t) {
                next += 1;
                prev = Some(t);
            }
            let i = i as usize;
            if i < split {
                left[bl + i] = next;
            } else {
                right[br + i - split] = next;
            }
        }
        next
    }

    /// Merges sets `a` and `b` of `cur` into a new set of `next`.
    fn merge_flat(&mut self, cur: &Round, a: &SetSpan, b: &SetSpan, next: &mut Round) -> SetSpan {
        let mut out = SetSpan {
            first: a.first.min(b.first),
            leaves: [(0, 0); 2],
            nodes: [(0, 0); 2],
            max_label: 0,
        };
        for side in 0..2 {
            let t = self.trees[side];
            let l0 = next.leaves[side].len();
            let (la, lb) = (cur.leaf_slice(a, side), cur.leaf_slice(b, side));
            merge_sorted_into(la, lb, |v| t.preorder_rank(v), &mut next.leaves[side]);
            out.leaves[side] = (l0, next.leaves[side].len());
            let n0 = next.nodes[side].len();
            induce_into(
                t,
                &next.leaves[side][l0..],
                &mut self.ops,
                &mut self.induce[side],
                &mut next.nodes[side],
                &mut next.parent[side],
            );
            out.nodes[side] = (n0, next.nodes[side].len());
        }
        let ab = [0, 1].map(|side| {
            let (s, e) = out.nodes[side];
            (&next.nodes[side][s..e], &next.parent[side][s..e])
        });
        let split = self.tuples(cur.parts(a), cur.parts(b), ab);
        let [l0, l1] = &mut next.labels;
        out.max_label = self.relabel(a.max_label, b.max_label, split, [l0, l1]);
        out
    }
}

#[derive(Clone, Copy)]
struct Part<'s>(&'s [usize], &'s [u32]);

/// One set of a [`Round`]: ranges into its buffers.
#[derive(Clone, Copy, Debug)]
struct SetSpan {
    first: Symbol,
    leaves: [(usize, usize); 2],
    nodes: [(usize, usize); 2],
    max_label: u32,
}

impl SetSpan {
    fn occurrences(&self) -> usize {
        self.leaves[0].1 - self.leaves[0].0
    }
}

/// All sets of one round of merging, stored back to back.
#[derive(Default)]
struct Round {
    sets: Vec<SetSpan>,
    leaves: [Vec<usize>; 2],
    nodes: [Vec<usize>; 2],
    parent: [Vec<u32>; 2],
    labels: [Vec<u32>; 2],
}

impl Round {
    fn clear(&mut self) {
        self.sets.clear();
        for side in 0..2 {
            self.leaves[side].clear();
            self.nodes[side].clear();
            self.parent[side].clear();
            self.labels[side].clear();
        }
    }

    fn leaf_slice(&self, s: &SetSpan, side: usize) -> &[usize] {
        &self.leaves[side][s.leaves[side].0..s.leaves[side].1]
    }

    fn parts(&self, s: &SetSpan) -> [Part<'_>; 2] {
        [0, 1].map(|side| {
            let (a, b) = s.nodes[side];
            Part(&self.nodes[side][a..b], &self.labels[side][a..b])
        })
    }

    /// Copies a set unchanged from another round.
    fn carry(&mut self, from: &Round, s: &SetSpan) {
        let mut out = *s;
        for side in 0..2 {
            let (a, b) = s.leaves[side];
            let l0 = self.leaves[side].len();
            self.leaves[side].extend_from_slice(&from.leaves[side][a..b]);
            out.leaves[side] = (l0, self.leaves[side].len());
            let (a, b) = s.nodes[side];
            let n0 = self.nodes[side].len();
            self.nodes[side].extend_from_slice(&from.nodes[side][a..b]);
            self.parent[side].extend_from_slice(&from.parent[side][a..b]);
            self.labels[side].extend_from_slice(&from.labels[side][a..b]);
            out.nodes[side] = (n0, self.nodes[side].len());
        }
        self.sets.push(out);
    }
}

fn check_disjoint(a: &[Symbol], b: &[Symbol]) -> Result<()> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Err(Error::OverlappingSets(a[i])),
        }
    }
    Ok(())
}

/// Merges two preorder-sorted leaf lists.
fn merge_by_rank(t: &RootedLabeledTree, a: &[usize], b: &[usize]) -> Vec<usize> {
    merge_sorted(a, b, |v| t.preorder_rank(v))
}

fn merge_sorted<T: Copy, K: Ord>(a: &[T], b: &[T], key: impl Fn(T) -> K) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    merge_sorted_into(a, b, key, &mut out);
    out
}

fn merge_sorted_into<T: Copy, K: Ord>(a: &[T], b: &[T], key: impl Fn(T) -> K, out: &mut Vec<T>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if key(a[i]) < key(b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Stable counting sort of `items` by `key` into `out`.
fn counting_sort(
    items: &[u32],
    out: &mut Vec<u32>,
    start: &mut Vec<usize>,
    buckets: usize,
    key: impl Fn(u32) -> usize,
) {
    start.clear();
    start.resize(buckets + 1, 0);
    for &x in items {
        start[key(x) + 1] += 1;
    }
    for k in 0..buckets {
        start[k + 1] += start[k];
    }
    out.clear();
    out.resize(items.len(), 0);
    for &x in items {
        let k = key(x);
        out[start[k]] = x;
        start[k] += 1;
    }
}

pub fn merge_relabel(
    r: &RootedLabeledTree,
    rp: &RootedLabeledTree,
    a: &SetLabeling,
    b: &SetLabeling,
) -> Result<SetLabeling> {
    Labeler::new(r, rp).merge(a, b)
}

/// Final labeling of the internal nodes of both trees, dense in `1..=t`.
#[derive(Clone, Debug)]
pub struct PartitionLabeling {
    labels: [Vec<u32>; 2],
    distinct: usize,
    round_ops: Vec<u64>,
}

impl PartitionLabeling {
    /// Label of internal node `v` of tree `side` (0 for `R`, 1 for `R'`).
    pub fn label(&self, side: usize, v: usize) -> Option<u32> {
        let l = self.labels[side][v];
        (l != 0).then_some(l)
    }

    pub fn left(&self, v: usize) -> Option<u32> {
        self.label(0, v)
    }

    pub fn right(&self, v: usize) -> Option<u32> {
        self.label(1, v)
    }

    pub fn distinct_labels(&self) -> usize {
        self.distinct
    }

    /// Operations spent in phase 1 (entry 0) and each pairing round.
    pub fn round_ops(&self) -> &[u64] {
        &self.round_ops
    }

    /// How often each label occurs over both trees, indexed by label.
    pub fn occurrences(&self) -> Vec<u32> {
        let mut c = vec![0u32; self.distinct + 1];
        for &l in self.labels.iter().flatten() {
            if l != 0 {
                c[l as usize] += 1;
            }
        }
        c
    }
}

pub fn partition_label(r: &RootedLabeledTree, rp: &RootedLabeledTree) -> Result<PartitionLabeling> {
    let top = [r, rp]
        .iter()
        .flat_map(|t| t.leaves().iter().map(|&v| t.symbol[v] as usize))
        .max()
        .map_or(0, |m| m + 1);
    let mut by_symbol: Vec<[Vec<usize>; 2]> = vec![Default::default(); top];
    for (side, t) in [r, rp].into_iter().enumerate() {
        for &v in t.leaves() {
            by_symbol[t.symbol[v] as usize][side].push(v);
        }
    }
    if let Some((a, [x, y])) = by_symbol.iter().enumerate().find(|(_, l)| l[0].len() != l[1].len()) {
        return Err(Error::MultisetMismatch {
            symbol: a.to_string(),
            left: x.len(),
            right: y.len(),
        });
    }
    let mut labeler = Labeler::new(r, rp);
    let mut cur = Round::default();
    for (a, leaves) in by_symbol.into_iter().enumerate() {
        if leaves[0].is_empty() {
            continue;
        }
        let mut span = SetSpan {
            first: a as Symbol,
            leaves: [(0, 0); 2],
            nodes: [(0, 0); 2],
            max_label: 0,
        };
        for (side, t) in [r, rp].into_iter().enumerate() {
            let l0 = cur.leaves[side].len();
            cur.leaves[side].extend_from_slice(&leaves[side]);
            span.leaves[side] = (l0, cur.leaves[side].len());
            let n0 = cur.nodes[side].len();
            induce_into(
                t,
                &leaves[side],
                &mut labeler.ops,
                &mut labeler.induce[side],
                &mut cur.nodes[side],
                &mut cur.parent[side],
            );
            span.nodes[side] = (n0, cur.nodes[side].len());
            let labels = leaf_counts(&cur.parent[side][n0..]);
            span.max_label = span.max_label.max(labels.iter().copied().max().unwrap_or(0));
            cur.labels[side].extend(labels);
        }
        cur.sets.push(span);
    }
    if cur.sets.is_empty() {
        return Err(Error::EmptyLabelSet);
    }
    let mut round_ops = vec![labeler.ops];
    let mut next = Round::default();
    while cur.sets.len() > 1 {
        labeler.ops = 0;
        let mut sets = std::mem::take(&mut cur.sets);
        sets.sort_by_key(|s| (s.occurrences(), s.first));
        next.clear();
        for pair in sets.chunks(2) {
            match pair {
                [a, b] => {
                    let span = labeler.merge_flat(&cur, a, b, &mut next);
                    next.sets.push(span);
                }
                [a] => next.carry(&cur, a),
                _ => unreachable!(),
            }
        }
        std::mem::swap(&mut cur, &mut next);
        round_ops.push(labeler.ops);
    }
    let full = cur.sets[0];
    let parts = cur.parts(&full);
    Ok(finish(r, rp, parts, round_ops))
}

/// Labels of a single-symbol induced subtree: the number of leaves below.
fn leaf_counts(parent: &[u32]) -> Vec<u32> {
    let mut c = vec![0u32; parent.len()];
    for i in 0..parent.len() {
        if c[i] == 0 {
            c[i] = 1;
        }
        if parent[i] != NONE {
            c[parent[i] as usize] += c[i];
        }
    }
    c
}

/// Spreads labels onto every internal node (single-child nodes inherit from
/// their child) and densifies those used by internal nodes.
fn finish(
    r: &RootedLabeledTree,
    rp: &RootedLabeledTree,
    full: [Part<'_>; 2],
    round_ops: Vec<u64>,
) -> PartitionLabeling {
    let mut raw: [Vec<u32>; 2] = Default::default();
    for (side, t) in [r, rp].into_iter().enumerate() {
        let mut lab = vec![0u32; t.len()];
        let Part(nodes, labels) = full[side];
        for (&x, &l) in nodes.iter().zip(labels) {
            lab[x] = l;
        }
        for &v in t.preorder().iter().rev() {
            if lab[v] == 0 {
                let c = t.children[v][0] as usize;
                lab[v] = lab[c];
            }
        }
        raw[side] = lab;
    }
    let top = raw.iter().flatten().copied().max().unwrap_or(0) as usize;
    let mut dense = vec![0u32; top + 1];
    for (side, t) in [r, rp].into_iter().enumerate() {
        for v in 0..t.len() {
            if !t.is_leaf(v) {
                dense[raw[side][v] as usize] = 1;
            }
        }
    }
    let mut distinct = 0;
    for x in dense.iter_mut() {
        if *x != 0 {
            distinct += 1;
            *x = distinct;
        }
    }
    let mut labels: [Vec<u32>; 2] = Default::default();
    for (side, t) in [r, rp].into_iter().enumerate() {
        labels[side] = (0..t.len())
            .map(|v| if t.is_leaf(v) { 0 } else { dense[raw[side][v] as usize] })
            .collect();
    }
    PartitionLabeling {
        labels,
        distinct: distinct as usize,
        round_ops,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// root -> (x, u -> (y, z)) with the given leaf symbols
    fn small(syms: [Symbol; 3]) -> RootedLabeledTree {
        let mut b = RootedBuilder::new();
        let root = b.add(None, None);
        b.add(Some(root), Some(syms[0]));
        let u = b.add(Some(root), None);
        b.add(Some(u), Some(syms[1]));
        b.add(Some(u), Some(syms[2]));
        b.build().unwrap()
    }

    #[test]
    fn lca_basics() {
        let t = small([1, 2, 3]);
        assert_eq!(t.lca(3, 4), 2);
        assert_eq!(t.lca(1, 4), 0);
        assert_eq!(t.lca(2, 4), 2);
    }

    #[test]
    fn identical_trees_share_labels() {
        let r = small([1, 2, 2]);
        let p = partition_label(&r, &r.clone()).unwrap();
        assert_eq!(p.left(0), p.right(0));
        assert_eq!(p.left(2), p.right(2));
        assert_ne!(p.left(0), p.left(2));
        assert_eq!(p.distinct_labels(), 2);
    }

    #[test]
    fn different_cherries() {
        let r = small([1, 2, 3]);
        let rp = small([3, 1, 2]);
        let p = partition_label(&r, &rp).unwrap();
        assert_eq!(p.left(0), p.right(0));
        assert_ne!(p.left(2), p.right(2));
        assert_eq!(p.distinct_labels(), 3);
    }

    #[test]
    fn mismatched_multisets() {
        let err = partition_label(&small([1, 2, 2]), &small([1, 1, 2])).unwrap_err();
        assert!(matches!(err, Error::MultisetMismatch { .. }));
    }

    #[test]
    fn singleton_induced() {
        let t = small([1, 2, 3]);
        let i = induced_subtree(&t, &[2]).unwrap();
        assert_eq!(i.originals(), &[3]);
        assert!(matches!(induced_subtree(&t, &[9]), Err(Error::EmptyLabelSet)));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let t = small([1, 2, 3]);
        let one = |a: Symbol| {
            let leaves: Vec<usize> = t.leaves().iter().copied().filter(|&v| t.symbol(v) == Some(a)).collect();
            let i = induce(&t, &leaves, &mut 0, &mut InduceScratch::default());
            phase1_singleton_labeling(i.clone(), i, a, [leaves.clone(), leaves])
        };
        assert!(matches!(
            merge_relabel(&t, &t, &one(1), &one(1)),
            Err(Error::OverlappingSets(1))
        ));
    }
}
