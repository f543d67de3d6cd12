//! Unrooted leaf-labeled trees with exact edge weights.
//!
//! [`Tree`] is the working representation shared by every algorithm: an
//! arena of nodes with symmetric adjacency lists. Node ids stay stable
//! across edits; removed nodes leave tombstones. Leaf labels may repeat
//! in a `Tree`; [`Phylogeny`] is the validated form with distinct labels
//! and internal degrees in `[3, d]`.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiset::MultiSet;
use crate::weight::Weight;

pub type NodeId = usize;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Node {
    alive: bool,
    label: Option<String>,
    adj: Vec<(NodeId, Weight)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    nodes: Vec<Node>,
    weighted: bool,
}

impl Tree {
    pub fn new(weighted: bool) -> Self {
        Tree {
            nodes: Vec::new(),
            weighted,
        }
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    /// Returns a copy with unit weights and the weighted flag set, or the
    /// same tree if it is already weighted.
    pub fn to_weighted(&self) -> Tree {
        let mut t = self.clone();
        t.weighted = true;
        t
    }

    /// Forgets weights: every edge becomes a unit edge.
    pub fn to_unweighted(&self) -> Tree {
        let mut t = self.clone();
        t.weighted = false;
        for n in &mut t.nodes {
            for (_, w) in &mut n.adj {
                *w = Weight::one();
            }
        }
        t
    }

    pub fn add_leaf(&mut self, label: impl Into<String>) -> NodeId {
        self.push_node(Some(label.into()))
    }

    pub fn add_internal(&mut self) -> NodeId {
        self.push_node(None)
    }

    fn push_node(&mut self, label: Option<String>) -> NodeId {
        self.nodes.push(Node {
            alive: true,
            label,
            adj: Vec::new(),
        });
        self.nodes.len() - 1
    }

    /// Revives a tombstoned id (or extends the arena up to it) as an
    /// unlabeled node.
    pub(crate) fn revive(&mut self, id: NodeId) -> Result<NodeId> {
        if id < self.nodes.len() {
            if self.nodes[id].alive {
                return Err(Error::InvalidOperation(format!("node id {id} is in use")));
            }
        } else {
            self.nodes.resize_with(id + 1, Node::default);
        }
        self.nodes[id] = Node {
            alive: true,
            label: None,
            adj: Vec::new(),
        };
        Ok(id)
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId, w: Weight) {
        debug_assert!(a != b && self.is_alive(a) && self.is_alive(b));
        let w = if self.weighted { w } else { Weight::one() };
        self.nodes[a].adj.push((b, w.clone()));
        self.nodes[b].adj.push((a, w));
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> Result<Weight> {
        let ia = self.slot(a, b).ok_or(Error::UnknownEdge(a, b))?;
        let ib = self.slot(b, a).ok_or(Error::UnknownEdge(a, b))?;
        let (_, w) = self.nodes[a].adj.swap_remove(ia);
        self.nodes[b].adj.swap_remove(ib);
        Ok(w)
    }

    pub(crate) fn kill(&mut self, v: NodeId) {
        debug_assert!(self.nodes[v].adj.is_empty());
        self.nodes[v].alive = false;
        self.nodes[v].label = None;
    }

    fn slot(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.nodes.get(a)?.adj.iter().position(|(x, _)| *x == b)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.slot(a, b).is_some()
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<&Weight> {
        self.slot(a, b).map(|i| &self.nodes[a].adj[i].1)
    }

    pub fn set_weight(&mut self, a: NodeId, b: NodeId, w: Weight) -> Result<()> {
        let ia = self.slot(a, b).ok_or(Error::UnknownEdge(a, b))?;
        let ib = self.slot(b, a).ok_or(Error::UnknownEdge(a, b))?;
        self.nodes[a].adj[ia].1 = w.clone();
        self.nodes[b].adj[ib].1 = w;
        Ok(())
    }

    /// Upper bound (exclusive) on node ids, tombstones included.
    pub fn capacity(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_alive(&self, v: NodeId) -> bool {
        self.nodes.get(v).is_some_and(|n| n.alive)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&v| self.nodes[v].alive)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn label(&self, v: NodeId) -> Option<&str> {
        self.nodes.get(v).and_then(|n| n.label.as_deref())
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.label(v).is_some()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.nodes[v].adj.len()
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[v].adj.iter().map(|(x, _)| *x)
    }

    pub fn incident(&self, v: NodeId) -> impl Iterator<Item = (NodeId, &Weight)> + '_ {
        self.nodes[v].adj.iter().map(|(x, w)| (*x, w))
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&v| self.is_leaf(v))
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&v| !self.is_leaf(v))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for v in self.node_ids() {
            for x in self.neighbors(v) {
                if v < x {
                    out.push((v, x));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).map(|n| n.adj.len()).sum::<usize>() / 2
    }

    pub fn is_pendant(&self, a: NodeId, b: NodeId) -> bool {
        self.is_leaf(a) || self.is_leaf(b)
    }

    /// The leaf carrying `label`, if unique labels are in force this is the
    /// only one.
    pub fn find_leaf(&self, label: &str) -> Option<NodeId> {
        self.leaves().find(|&v| self.label(v) == Some(label))
    }

    pub fn label_index(&self) -> HashMap<&str, NodeId> {
        self.leaves().map(|v| (self.label(v).unwrap(), v)).collect()
    }

    pub fn leaf_labels(&self) -> MultiSet<String> {
        self.leaves().map(|v| self.label(v).unwrap().to_string()).collect()
    }

    pub fn total_weight(&self) -> Weight {
        self.edges().iter().map(|&(a, b)| self.weight(a, b).unwrap()).sum()
    }

    /// Nodes on the `b` side of edge `(a, b)` (the component containing `b`
    /// once the edge is removed).
    pub fn side(&self, a: NodeId, b: NodeId) -> Vec<NodeId> {
        let mut out = vec![b];
        let mut stack = vec![(b, a)];
        while let Some((v, p)) = stack.pop() {
            for x in self.neighbors(v) {
                if x != p {
                    out.push(x);
                    stack.push((x, v));
                }
            }
        }
        out
    }

    /// Sorted leaf labels on the `b` side of edge `(a, b)`.
    pub fn side_labels(&self, a: NodeId, b: NodeId) -> Vec<String> {
        let mut v: Vec<String> = self
            .side(a, b)
            .into_iter()
            .filter_map(|x| self.label(x).map(str::to_string))
            .collect();
        v.sort();
        v
    }

    /// Hop-count path from `a` to `b`, both endpoints included.
    pub fn path(&self, a: NodeId, b: NodeId) -> Option<Vec<NodeId>> {
        let parents = self.parents_from(a);
        if !self.is_alive(b) || (a != b && parents.get(&b).is_none()) {
            return None;
        }
        let mut out = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parents[&cur];
            out.push(cur);
        }
        out.reverse();
        Some(out)
    }

    /// BFS parent pointers rooted at `root` (root itself absent).
    pub fn parents_from(&self, root: NodeId) -> HashMap<NodeId, NodeId> {
        let mut parent = HashMap::new();
        let mut stack = vec![root];
        let mut seen = HashSet::from([root]);
        while let Some(v) = stack.pop() {
            for x in self.neighbors(v) {
                if seen.insert(x) {
                    parent.insert(x, v);
                    stack.push(x);
                }
            }
        }
        parent
    }

    /// Nodes in preorder from `root` with their parents.
    pub fn preorder(&self, root: NodeId) -> Vec<(NodeId, Option<NodeId>)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(root, None)];
        while let Some((v, p)) = stack.pop() {
            out.push((v, p));
            for x in self.neighbors(v) {
                if Some(x) != p {
                    stack.push((x, Some(v)));
                }
            }
        }
        out
    }

    /// Connected and acyclic over the live nodes.
    pub fn is_tree(&self) -> bool {
        let Some(start) = self.node_ids().next() else {
            return false;
        };
        let reached = self.preorder(start).len();
        reached == self.node_count() && self.edge_count() + 1 == self.node_count()
    }

    /// Structural checks that hold for every tree the library builds: a
    /// connected acyclic graph whose labeled nodes are exactly its
    /// degree-1 nodes.
    pub fn check(&self) -> Result<()> {
        if !self.is_tree() {
            return Err(Error::InvalidTree("not a connected acyclic graph".into()));
        }
        for v in self.node_ids() {
            match (self.is_leaf(v), self.degree(v)) {
                (true, 1) | (false, 2..) => {}
                (true, d) => {
                    return Err(Error::InvalidTree(format!("leaf {v} has degree {d}")));
                }
                (false, d) => {
                    return Err(Error::InvalidTree(format!(
                        "unlabeled node {v} has degree {d}"
                    )));
                }
            }
            if !self.weighted && self.incident(v).any(|(_, w)| *w != Weight::one()) {
                return Err(Error::InvalidTree("unweighted tree with non-unit edge".into()));
            }
            if self.incident(v).any(|(_, w)| w.is_negative()) {
                return Err(Error::InvalidTree("negative edge weight".into()));
            }
        }
        Ok(())
    }

    pub fn max_degree(&self) -> usize {
        self.internal_nodes().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Removes a degree-2 unlabeled node, joining its edges and adding
    /// their weights.
    pub fn suppress(&mut self, v: NodeId) -> Result<(NodeId, NodeId)> {
        if self.is_leaf(v) || self.degree(v) != 2 {
            return Err(Error::InvalidOperation(format!("node {v} is not a degree-2 node")));
        }
        let (a, wa) = self.nodes[v].adj[0].clone();
        let (b, wb) = self.nodes[v].adj[1].clone();
        self.remove_edge(v, a)?;
        self.remove_edge(v, b)?;
        self.kill(v);
        self.add_edge(a, b, wa + wb);
        Ok((a, b))
    }

    /// Contracts every degree-2 internal node.
    pub fn suppress_all(&mut self) {
        let ids: Vec<NodeId> = self.internal_nodes().collect();
        for v in ids {
            if self.is_alive(v) && self.degree(v) == 2 {
                self.suppress(v).expect("degree checked");
            }
        }
    }

    /// Contracts internal edge `(a, b)`: `b`'s other neighbors move to `a`.
    pub fn contract_edge(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        if self.is_leaf(a) || self.is_leaf(b) {
            return Err(Error::InvalidOperation("cannot contract a pendant edge".into()));
        }
        self.remove_edge(a, b)?;
        let rest: Vec<(NodeId, Weight)> = self.nodes[b].adj.clone();
        for (x, w) in rest {
            self.remove_edge(b, x)?;
            self.add_edge(a, x, w);
        }
        self.kill(b);
        Ok(())
    }

    /// Renumbers live nodes densely, preserving relative order.
    pub fn compacted(&self) -> (Tree, Vec<Option<NodeId>>) {
        let mut map = vec![None; self.nodes.len()];
        let mut t = Tree::new(self.weighted);
        for v in self.node_ids() {
            map[v] = Some(t.push_node(self.nodes[v].label.clone()));
        }
        for (a, b) in self.edges() {
            t.add_edge(map[a].unwrap(), map[b].unwrap(), self.weight(a, b).unwrap().clone());
        }
        (t, map)
    }
}

/// A validated phylogeny: distinct leaf labels, internal degrees in
/// `[3, degree_bound]`, at least three leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phylogeny {
    tree: Tree,
    degree_bound: usize,
}

impl Phylogeny {
    pub fn new(tree: Tree, degree_bound: usize) -> Result<Self> {
        tree.check()?;
        if degree_bound < 3 {
            return Err(Error::InvalidTree("degree bound must be at least 3".into()));
        }
        if tree.leaf_count() < 3 {
            return Err(Error::InvalidTree("a phylogeny needs at least three leaves".into()));
        }
        let mut seen = HashSet::new();
        for v in tree.leaves() {
            let l = tree.label(v).unwrap();
            if !seen.insert(l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        for v in tree.internal_nodes() {
            let d = tree.degree(v);
            if d < 3 {
                return Err(Error::DegreeTooLow { node: v, degree: d });
            }
            if d > degree_bound {
                return Err(Error::DegreeTooHigh {
                    node: v,
                    degree: d,
                    bound: degree_bound,
                });
            }
        }
        Ok(Phylogeny { tree, degree_bound })
    }

    /// Validates with the tightest bound the tree admits.
    pub fn from_tree(tree: Tree) -> Result<Self> {
        let d = tree.max_degree().max(3);
        Phylogeny::new(tree, d)
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn into_tree(self) -> Tree {
        self.tree
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn leaf_count(&self) -> usize {
        self.tree.leaf_count()
    }

    pub fn is_weighted(&self) -> bool {
        self.tree.is_weighted()
    }
}

impl std::ops::Deref for Phylogeny {
    type Target = Tree;
    fn deref(&self) -> &Tree {
        &self.tree
    }
}

/// The three multiset splits induced by removing one edge. Sides are
/// ordered so the side holding the lexicographically least leaf label
/// comes first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeBipartition {
    pub label_split: (MultiSet<String>, MultiSet<String>),
    pub degree_split: (MultiSet<usize>, MultiSet<usize>),
    pub weight_split: (MultiSet<Weight>, MultiSet<Weight>),
}

impl EdgeBipartition {
    pub fn labels_only(&self) -> &(MultiSet<String>, MultiSet<String>) {
        &self.label_split
    }
}

/// Splits of edge `(a, b)`. The edge's own weight lies on neither side.
pub fn edge_bipartition(tree: &Tree, a: NodeId, b: NodeId) -> Result<EdgeBipartition> {
    if !tree.has_edge(a, b) {
        return Err(Error::UnknownEdge(a, b));
    }
    let collect = |from: NodeId, to: NodeId| {
        let mut labels = MultiSet::new();
        let mut degrees = MultiSet::new();
        let mut weights = MultiSet::new();
        let mut stack = vec![(to, from)];
        while let Some((v, p)) = stack.pop() {
            match tree.label(v) {
                Some(l) => labels.insert(l.to_string()),
                None => degrees.insert(tree.degree(v)),
            }
            for (x, w) in tree.incident(v) {
                if x != p {
                    weights.insert(w.clone());
                    stack.push((x, v));
                }
            }
        }
        (labels, degrees, weights)
    };
    let (la, da, wa) = collect(b, a);
    let (lb, db, wb) = collect(a, b);
    let a_first = match (la.first(), lb.first()) {
        (Some(x), Some(y)) => x <= y,
        (Some(_), None) => true,
        _ => false,
    };
    Ok(if a_first {
        EdgeBipartition {
            label_split: (la, lb),
            degree_split: (da, db),
            weight_split: (wa, wb),
        }
    } else {
        EdgeBipartition {
            label_split: (lb, la),
            degree_split: (db, da),
            weight_split: (wb, wa),
        }
    })
}

/// JSON form of a tree: nodes with optional labels plus weighted edges.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TreeJson {
    pub weighted: bool,
    pub degree_bound: Option<usize>,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeJson {
    pub id: NodeId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: Weight,
}

impl Tree {
    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            weighted: self.weighted,
            degree_bound: None,
            nodes: self
                .node_ids()
                .map(|id| NodeJson {
                    id,
                    label: self.label(id).map(str::to_string),
                })
                .collect(),
            edges: self
                .edges()
                .into_iter()
                .map(|(u, v)| EdgeJson {
                    u,
                    v,
                    weight: self.weight(u, v).unwrap().clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<Tree> {
        let mut t = Tree::new(json.weighted);
        let mut ids = BTreeMap::new();
        for n in &json.nodes {
            let id = match &n.label {
                Some(l) => t.add_leaf(l.clone()),
                None => t.add_internal(),
            };
            if ids.insert(n.id, id).is_some() {
                return Err(Error::InvalidTree(format!("duplicate node id {}", n.id)));
            }
        }
        for e in &json.edges {
            let (Some(&u), Some(&v)) = (ids.get(&e.u), ids.get(&e.v)) else {
                return Err(Error::UnknownEdge(e.u, e.v));
            };
            t.add_edge(u, v, e.weight.clone());
        }
        t.check()?;
        Ok(t)
    }
}

impl Phylogeny {
    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            degree_bound: Some(self.degree_bound),
            ..self.tree.to_json()
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<Self> {
        let t = Tree::from_json(json)?;
        match json.degree_bound {
            Some(d) => Phylogeny::new(t, d),
            None => Phylogeny::from_tree(t),
        }
    }
}
