//! Leaf-label-preserving isomorphism and canonical keys.
//!
//! Labels may repeat, so both operations root at the tree center rather
//! than at a leaf.

use std::collections::HashMap;
use std::fmt;

use crate::newick::centers;
use crate::tree::{NodeId, Tree};
use crate::weight::Weight;

type ClassKey = (Option<String>, Vec<(u32, Option<Weight>)>);

#[derive(Default)]
struct Interner {
    ids: HashMap<ClassKey, u32>,
}

impl Interner {
    fn id(&mut self, key: ClassKey) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }
}

struct Rooted {
    class: Vec<u32>,
    children: Vec<Vec<NodeId>>,
}

fn classify(tree: &Tree, root: NodeId, weights: bool, interner: &mut Interner) -> Rooted {
    let mut class = vec![u32::MAX; tree.capacity()];
    let mut children = vec![Vec::new(); tree.capacity()];
    let order = tree.preorder(root);
    for &(v, p) in order.iter().rev() {
        let mut kids: Vec<(u32, Option<Weight>)> = Vec::new();
        for (c, w) in tree.incident(v) {
            if Some(c) != p {
                children[v].push(c);
                kids.push((class[c], weights.then(|| w.clone())));
            }
        }
        kids.sort_unstable();
        class[v] = interner.id((tree.label(v).map(str::to_string), kids));
    }
    Rooted { class, children }
}

/// Returns a witness mapping from nodes of `a` to nodes of `b` when the two
/// trees are isomorphic with equal leaf labels. Weights take part only when
/// both trees are weighted.
pub fn is_isomorphic(a: &Tree, b: &Tree) -> Option<HashMap<NodeId, NodeId>> {
    if a.node_count() != b.node_count() || a.leaf_labels() != b.leaf_labels() {
        return None;
    }
    let weights = a.is_weighted() && b.is_weighted();
    let (ca, cb) = (centers(a), centers(b));
    if ca.len() != cb.len() {
        return None;
    }
    let mut interner = Interner::default();
    let ra = classify(a, ca[0], weights, &mut interner);
    for &root_b in &cb {
        let rb = classify(b, root_b, weights, &mut interner);
        if ra.class[ca[0]] == rb.class[root_b] {
            return Some(matching(a, &ra, ca[0], b, &rb, root_b, weights));
        }
    }
    None
}

fn matching(
    a: &Tree,
    ra: &Rooted,
    root_a: NodeId,
    b: &Tree,
    rb: &Rooted,
    root_b: NodeId,
    weights: bool,
) -> HashMap<NodeId, NodeId> {
    let mut map = HashMap::with_capacity(a.node_count());
    let mut stack = vec![(root_a, root_b)];
    while let Some((x, y)) = stack.pop() {
        map.insert(x, y);
        let key = |t: &Tree, r: &Rooted, p: NodeId, c: NodeId| {
            (r.class[c], weights.then(|| t.weight(p, c).unwrap().clone()))
        };
        let mut xs = ra.children[x].clone();
        let mut ys = rb.children[y].clone();
        xs.sort_by_cached_key(|&c| key(a, ra, x, c));
        ys.sort_by_cached_key(|&c| key(b, rb, y, c));
        stack.extend(xs.into_iter().zip(ys));
    }
    map
}

/// A string that is equal for two trees exactly when they are leaf-label
/// isomorphic. Weights are ignored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalTreeKey(String);

impl CanonicalTreeKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalTreeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn canonical_key(tree: &Tree) -> CanonicalTreeKey {
    let best = centers(tree)
        .into_iter()
        .map(|c| rooted_string(tree, c))
        .min()
        .unwrap_or_default();
    CanonicalTreeKey(best)
}

fn rooted_string(tree: &Tree, root: NodeId) -> String {
    let mut s: Vec<String> = vec![String::new(); tree.capacity()];
    let order = tree.preorder(root);
    for &(v, p) in order.iter().rev() {
        s[v] = match tree.label(v) {
            Some(l) => format!("{l:?}"),
            None => {
                let mut kids: Vec<String> = tree
                    .neighbors(v)
                    .filter(|&c| Some(c) != p)
                    .map(|c| std::mem::take(&mut s[c]))
                    .collect();
                kids.sort_unstable();
                format!("({})", kids.join(","))
            }
        };
    }
    std::mem::take(&mut s[root])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::{parse_newick, parse_tree};

    #[test]
    fn permuted_ids_map() {
        let a = parse_newick("((a,b),(c,d),(e,f));", false).unwrap();
        let b = parse_newick("((f,e),(b,a),(d,c));", false).unwrap();
        let m = is_isomorphic(&a, &b).unwrap();
        for v in a.leaves() {
            assert_eq!(a.label(v), b.label(m[&v]));
        }
        for (x, y) in a.edges() {
            assert!(b.has_edge(m[&x], m[&y]));
        }
        assert_eq!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn opposing_quartets_differ() {
        let a = parse_newick("(a,b,(c,d));", false).unwrap();
        let b = parse_newick("(a,c,(b,d));", false).unwrap();
        assert!(is_isomorphic(&a, &b).is_none());
        assert_ne!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn weights_matter_when_both_weighted() {
        let a = parse_newick("(a:1,b:1,(c:1,d:1):2);", true).unwrap();
        let b = parse_newick("(a:1,b:1,(c:1,d:1):3);", true).unwrap();
        assert!(is_isomorphic(&a, &b).is_none());
        assert!(is_isomorphic(&a.to_unweighted(), &b).is_some());
    }

    #[test]
    fn repeated_labels_bicenter() {
        let a = parse_tree("((x,x),(x,y));", false).unwrap();
        let b = parse_tree("((y,x),(x,x));", false).unwrap();
        assert!(is_isomorphic(&a, &b).is_some());
        assert_eq!(canonical_key(&a), canonical_key(&b));
        let c = parse_tree("((x,y),(y,x));", false).unwrap();
        assert!(is_isomorphic(&a, &c).is_none());
    }
}
