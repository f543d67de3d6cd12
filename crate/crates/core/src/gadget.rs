//! Hardness gadgets built from exact-cover-by-3-sets instances.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::multiset::MultiSet;
use crate::stt::{ScriptTag, SttOperation, SttScript};
use crate::tree::{NodeId, Tree};
use crate::weight::Weight;

/// An X3C instance over ground set `{1, .., 3q}`; subsets are 1-based
/// element triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct X3CInstance {
    q: usize,
    subsets: Vec<[usize; 3]>,
}

impl X3CInstance {
    pub fn new(q: usize, subsets: Vec<[usize; 3]>) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInstance("q must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for (i, c) in subsets.iter().enumerate() {
            let set: BTreeSet<usize> = c.iter().copied().collect();
            if set.len() != 3 {
                return Err(Error::InvalidInstance(format!("subset {} repeats an element", i + 1)));
            }
            if let Some(&e) = set.iter().find(|&&e| e == 0 || e > 3 * q) {
                return Err(Error::InvalidInstance(format!("element {e} outside 1..={}", 3 * q)));
            }
            seen.extend(set);
        }
        if seen.len() != 3 * q {
            return Err(Error::InvalidInstance("subsets do not cover the ground set".into()));
        }
        let mut subsets = subsets;
        for c in &mut subsets {
            c.sort_unstable();
        }
        Ok(X3CInstance { q, subsets })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of subsets.
    pub fn n(&self) -> usize {
        self.subsets.len()
    }

    pub fn subsets(&self) -> &[[usize; 3]] {
        &self.subsets
    }

    /// Whether the given 0-based subset indices form an exact cover.
    pub fn is_exact_cover(&self, cover: &[usize]) -> bool {
        if cover.len() != self.q {
            return false;
        }
        let mut seen = BTreeSet::new();
        for &i in cover {
            let Some(c) = self.subsets.get(i) else {
                return false;
            };
            if !c.iter().all(|&e| seen.insert(e)) {
                return false;
            }
        }
        true
    }
}

impl FromStr for X3CInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let bad = |m: &str| Error::InvalidInstance(m.to_string());
        let head: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty instance"))?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("header must be `q n`"))?;
        let [q, n] = head[..] else {
            return Err(bad("header must be `q n`"));
        };
        let mut subsets = Vec::with_capacity(n);
        for line in lines {
            let v: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(&format!("bad subset line `{line}`")))?;
            let [a, b, c] = v[..] else {
                return Err(bad(&format!("subset line `{line}` needs three elements")));
            };
            subsets.push([a, b, c]);
        }
        if subsets.len() != n {
            return Err(bad(&format!("expected {n} subsets, found {}", subsets.len())));
        }
        X3CInstance::new(q, subsets)
    }
}

impl fmt::Display for X3CInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.q, self.subsets.len())?;
        for c in &self.subsets {
            writeln!(f, "{} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

/// Node ids of one long arm of `T`.
#[derive(Clone, Debug)]
pub struct LongArm {
    /// Path nodes from the hub outwards, `3n²` of them.
    pub path: Vec<NodeId>,
    /// Root of the triple subtree and its inner node.
    pub c: NodeId,
    pub c_inner: NodeId,
}

#[derive(Clone, Debug)]
pub struct GadgetPair {
    pub t: Tree,
    pub t_prime: Tree,
    pub m: NodeId,
    pub n_hub: NodeId,
    pub arms: Vec<LongArm>,
    pub degree_bound: usize,
    pub threshold: u64,
    pub instance: X3CInstance,
}

fn x_label(i: usize) -> String {
    format!("x{i}")
}

fn s_label(i: usize) -> String {
    format!("s{i}")
}

/// Attaches a path of `len` nodes to `from`, node `j` carrying leaf
/// `x_{j mod n²}`, and returns the path.
fn arm(t: &mut Tree, from: NodeId, len: usize, nn: usize) -> Vec<NodeId> {
    let mut path = Vec::with_capacity(len);
    let mut prev = from;
    for j in 0..len {
        let a = t.add_internal();
        t.add_edge(prev, a, Weight::one());
        let x = t.add_leaf(x_label(j % nn));
        t.add_edge(a, x, Weight::one());
        path.push(a);
        prev = a;
    }
    path
}

pub fn build_gadget(inst: &X3CInstance) -> Result<GadgetPair> {
    let (n, q) = (inst.n(), inst.q());
    if n < 2 {
        return Err(Error::InvalidInstance("the gadget needs at least two subsets".into()));
    }
    let nn = n * n;
    let mut t = Tree::new(false);
    let m = t.add_internal();
    let mut arms = Vec::with_capacity(n);
    for c in inst.subsets() {
        let path = arm(&mut t, m, 3 * nn, nn);
        let end = *path.last().unwrap();
        let top = t.add_internal();
        let inner = t.add_internal();
        t.add_edge(end, top, Weight::one());
        let s1 = t.add_leaf(s_label(c[0]));
        t.add_edge(top, s1, Weight::one());
        t.add_edge(top, inner, Weight::one());
        for &e in &c[1..] {
            let s = t.add_leaf(s_label(e));
            t.add_edge(inner, s, Weight::one());
        }
        arms.push(LongArm { path, c: top, c_inner: inner });
    }

    let mut tp = Tree::new(false);
    let hub = tp.add_internal();
    for e in 1..=3 * q {
        let path = arm(&mut tp, hub, nn, nn);
        let s = tp.add_leaf(s_label(e));
        tp.add_edge(*path.last().unwrap(), s, Weight::one());
    }
    for _ in 0..n - q {
        let path = arm(&mut tp, hub, 3 * nn, nn);
        tp.suppress(*path.last().unwrap())?;
    }
    let mut rest: MultiSet<usize> = inst.subsets().iter().flatten().copied().collect();
    for e in 1..=3 * q {
        rest.remove(&e);
    }
    for (e, k) in rest.iter() {
        for _ in 0..k {
            let s = tp.add_leaf(s_label(*e));
            tp.add_edge(hub, s, Weight::one());
        }
    }
    let (tp, ids) = tp.compacted();
    let n_hub = ids[hub].unwrap();

    let degree_bound = 4 * n - q;
    if t.leaf_labels() != tp.leaf_labels() {
        return Err(Error::Internal("gadget trees have different leaf multisets".into()));
    }
    if t.max_degree() > degree_bound || tp.max_degree() > degree_bound {
        return Err(Error::Internal("gadget exceeds its degree bound".into()));
    }
    let n64 = n as u64;
    Ok(GadgetPair {
        t,
        t_prime: tp,
        m,
        n_hub,
        arms,
        degree_bound,
        threshold: 3 * n64.pow(3) + 6 * n64,
        instance: inst.clone(),
    })
}

/// The script of the if-direction for a 0-based exact `cover`: arms in
/// the cover split into three short arms at cost `3n²+6` each, the others
/// shed their triple at the hub at cost `3n²+2` each.
pub fn cover_to_script(pair: &GadgetPair, cover: &[usize]) -> Result<SttScript> {
    if !pair.instance.is_exact_cover(cover) {
        return Err(Error::InvalidInstance("cover is not exact".into()));
    }
    let nn = pair.instance.n().pow(2);
    let m = pair.m;
    let mut tree = pair.t.clone();
    let mut script = SttScript::new(ScriptTag::Gadget);
    let leaf_of = |tree: &Tree, v: NodeId| {
        tree.neighbors(v).find(|&y| tree.is_leaf(y) && tree.label(y).is_some_and(|l| l.starts_with('s'))).unwrap()
    };
    for (i, arm) in pair.arms.iter().enumerate() {
        let (c, ci, p) = (arm.c, arm.c_inner, &arm.path);
        let end = p[3 * nn - 1];
        if cover.contains(&i) {
            let (a_top, b_end, c_top) = (p[nn - 1], p[2 * nn - 1], p[2 * nn]);
            // the inner pair climbs to the top of the last short arm
            script.apply(&mut tree, SttOperation::to_node(c, ci, b_end))?;
            // the last short arm hangs below the pair, one leaf stays behind
            script.apply(&mut tree, SttOperation::to_node(b_end, c_top, ci))?;
            let s2 = leaf_of(&tree, ci);
            script.apply(&mut tree, SttOperation::to_node(ci, s2, b_end))?;
            script.apply(&mut tree, SttOperation::to_node(b_end, ci, a_top))?;
            // the middle short arm joins, the last leaf drops off, then the pair goes to the hub
            script.apply(&mut tree, SttOperation::to_node(a_top, p[nn], ci))?;
            let s3 = leaf_of(&tree, ci);
            script.apply(&mut tree, SttOperation::to_node(ci, s3, a_top))?;
            script.apply(&mut tree, SttOperation::to_node(a_top, ci, m))?;
            script.apply(&mut tree, SttOperation::to_node(ci, p[nn], m))?;
        } else {
            script.apply(&mut tree, SttOperation::to_node(end, c, m))?;
            let s1 = leaf_of(&tree, c);
            script.apply(&mut tree, SttOperation::to_node(c, s1, m))?;
            let s2 = leaf_of(&tree, ci);
            script.apply(&mut tree, SttOperation::to_node(ci, s2, m))?;
        }
    }
    Ok(script)
}

/// `3n³ + 2n + 4q`, the cost of [`cover_to_script`].
pub fn cover_cost(inst: &X3CInstance) -> u64 {
    let (n, q) = (inst.n() as u64, inst.q() as u64);
    3 * n.pow(3) + 2 * n + 4 * q
}

/// Exhaustive search for an exact cover; returns 0-based subset indices.
pub fn x3c_bruteforce(inst: &X3CInstance) -> Option<Vec<usize>> {
    fn go(inst: &X3CInstance, covered: &mut Vec<bool>, chosen: &mut Vec<usize>) -> bool {
        let Some(e) = (1..covered.len()).find(|&e| !covered[e]) else {
            return true;
        };
        for (i, c) in inst.subsets().iter().enumerate() {
            if c.contains(&e) && c.iter().all(|&x| !covered[x]) {
                c.iter().for_each(|&x| covered[x] = true);
                chosen.push(i);
                if go(inst, covered, chosen) {
                    return true;
                }
                chosen.pop();
                c.iter().for_each(|&x| covered[x] = false);
            }
        }
        false
    }
    let mut covered = vec![false; 3 * inst.q() + 1];
    let mut chosen = Vec::new();
    go(inst, &mut covered, &mut chosen).then(|| {
        chosen.sort_unstable();
        chosen
    })
}

/// A random instance with `n ≥ q` subsets containing a planted exact cover,
/// returned with the cover's 0-based indices.
pub fn planted_instance(q: usize, n: usize, seed: u64) -> Result<(X3CInstance, Vec<usize>)> {
    if n < q {
        return Err(Error::InvalidInstance("need at least q subsets".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elems: Vec<usize> = (1..=3 * q).collect();
    elems.shuffle(&mut rng);
    let mut subsets: Vec<([usize; 3], bool)> = elems.chunks(3).map(|c| ([c[0], c[1], c[2]], true)).collect();
    for _ in q..n {
        let mut pick: Vec<usize> = (1..=3 * q).collect();
        pick.shuffle(&mut rng);
        subsets.push(([pick[0], pick[1], pick[2]], false));
    }
    subsets.shuffle(&mut rng);
    let cover = subsets.iter().enumerate().filter(|(_, s)| s.1).map(|(i, _)| i).collect();
    let inst = X3CInstance::new(q, subsets.into_iter().map(|s| s.0).collect())?;
    Ok((inst, cover))
}
