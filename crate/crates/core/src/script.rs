//! Text format for scripts that names edges and nodes by leaf content
//! rather than node ids.
//!
//! ```text
//! DETACH <side> TARGET EDGE <side> SPLIT <p>/<q>
//! DETACH <side> TARGET NODE <node>
//! ```
//!
//! `<side>` is the 16-hex-digit multiset hash of the leaf labels on one
//! side of an edge: for `DETACH` the detached subtree, for `EDGE` the side
//! away from the anchor. `SPLIT` is measured from the endpoint nearer the
//! anchor. `<node>` hashes the sorted side hashes of all branches at an
//! internal node. Lines are resolved one at a time against the tree as it
//! stands after the previous lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::stt::{ScriptTag, SttOperation, SttScript, Target};
use crate::tree::{NodeId, Tree};
use crate::weight::Weight;

fn label_hash(label: &str) -> u64 {
    let d = Sha256::digest(label.as_bytes());
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Side hashes of every directed edge of a tree. `side[(a, b)]` hashes the
/// labels on `b`'s side of edge `(a, b)`.
pub struct SideHashes {
    side: HashMap<(NodeId, NodeId), u64>,
}

impl SideHashes {
    pub fn new(tree: &Tree) -> Self {
        let mut side = HashMap::new();
        let Some(root) = tree.node_ids().next() else {
            return SideHashes { side };
        };
        let walk = tree.preorder(root);
        let mut sub = vec![0u64; tree.capacity()];
        for &(v, p) in walk.iter().rev() {
            if let Some(l) = tree.label(v) {
                sub[v] = sub[v].wrapping_add(label_hash(l));
            }
            if let Some(p) = p {
                sub[p] = sub[p].wrapping_add(sub[v]);
            }
        }
        let total = sub[root];
        for &(v, p) in &walk {
            if let Some(p) = p {
                side.insert((p, v), sub[v]);
                side.insert((v, p), total.wrapping_sub(sub[v]));
            }
        }
        SideHashes { side }
    }

    pub fn side(&self, a: NodeId, b: NodeId) -> Option<u64> {
        self.side.get(&(a, b)).copied()
    }

    pub fn node_key(&self, tree: &Tree, t: NodeId) -> u64 {
        let mut hs: Vec<u64> = tree.neighbors(t).filter_map(|y| self.side(t, y)).collect();
        hs.sort_unstable();
        let mut h = Sha256::new();
        for x in hs {
            h.update(x.to_le_bytes());
        }
        u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
    }

    fn directed(&self) -> HashMap<u64, Option<(NodeId, NodeId)>> {
        let mut m: HashMap<u64, Option<(NodeId, NodeId)>> = HashMap::new();
        for (&e, &h) in &self.side {
            m.entry(h).and_modify(|x| *x = None).or_insert(Some(e));
        }
        m
    }
}

fn hex(h: u64) -> String {
    format!("{h:016x}")
}

/// Renders `script` against its start tree.
pub fn write_script(start: &Tree, script: &SttScript) -> Result<String> {
    let mut tree = start.clone();
    let mut out = String::new();
    for op in &script.ops {
        let hs = SideHashes::new(&tree);
        let det = hs.side(op.anchor, op.subtree).ok_or(Error::UnknownEdge(op.anchor, op.subtree))?;
        write!(out, "DETACH {} TARGET ", hex(det)).unwrap();
        match &op.target {
            Target::Node(t) => writeln!(out, "NODE {}", hex(hs.node_key(&tree, *t))).unwrap(),
            Target::Edge { v, w, split } => {
                let (v, w) = (*v, *w);
                let total = tree.weight(v, w).ok_or(Error::UnknownEdge(v, w))?.clone();
                let dv = tree.path(op.anchor, v).map_or(0, |p| p.len());
                let dw = tree.path(op.anchor, w).map_or(0, |p| p.len());
                let (near, far, split) = if dv <= dw {
                    (v, w, split.clone())
                } else {
                    (w, v, total - split.clone())
                };
                let split = if tree.is_weighted() { split } else { Weight::zero() };
                let h = hs.side(near, far).unwrap();
                writeln!(out, "EDGE {} SPLIT {}/{}", hex(h), split.numer(), split.denom()).unwrap();
            }
        }
        crate::stt::apply_op(&mut tree, op)?;
    }
    Ok(out)
}

fn parse_hex(line: usize, s: &str) -> Result<u64> {
    if s.len() != 16 {
        return Err(Error::Script {
            line,
            message: format!("`{s}` is not a 16-digit hash"),
        });
    }
    u64::from_str_radix(s, 16).map_err(|_| Error::Script {
        line,
        message: format!("`{s}` is not hexadecimal"),
    })
}

/// Resolves a script text against `start`, applying each line in turn.
pub fn read_script(start: &Tree, text: &str) -> Result<SttScript> {
    let mut tree = start.clone();
    let mut script = SttScript::new(ScriptTag::Forward);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let err = |m: &str| Error::Script {
            line,
            message: m.to_string(),
        };
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() < 5 || tok[0] != "DETACH" || tok[2] != "TARGET" {
            return Err(err("expected `DETACH <hash> TARGET ...`"));
        }
        let hs = SideHashes::new(&tree);
        let directed = hs.directed();
        let resolve = |h: u64| match directed.get(&h) {
            Some(Some(e)) => Ok(*e),
            Some(None) => Err(err("hash names more than one edge")),
            None => Err(err(&format!("no edge with hash {}", hex(h)))),
        };
        let (anchor, subtree) = resolve(parse_hex(line, tok[1])?)?;
        let target = match (tok[3], tok.len()) {
            ("NODE", 5) => {
                let key = parse_hex(line, tok[4])?;
                let mut hits = tree.internal_nodes().filter(|&t| hs.node_key(&tree, t) == key);
                let t = hits.next().ok_or_else(|| err("no node with that key"))?;
                if hits.next().is_some() {
                    return Err(err("node key names more than one node"));
                }
                Target::Node(t)
            }
            ("EDGE", 7) if tok[5] == "SPLIT" => {
                let (near, far) = resolve(parse_hex(line, tok[4])?)?;
                let split: Weight = tok[6].parse().map_err(|e: Error| err(&e.to_string()))?;
                Target::Edge {
                    v: near,
                    w: far,
                    split,
                }
            }
            _ => return Err(err("expected `NODE <key>` or `EDGE <hash> SPLIT <p>/<q>`")),
        };
        let op = SttOperation {
            anchor,
            subtree,
            target,
            reuse_id: None,
        };
        script.apply(&mut tree, op).map_err(|e| err(&e.to_string()))?;
    }
    Ok(script)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::stt_approx;
    use crate::canon::is_isomorphic;
    use crate::newick::parse_newick;
    use crate::stt::replay;

    #[test]
    fn round_trip_approximation() {
        let t = parse_newick("((a,b),(c,d),(e,(f,g)));", false).unwrap();
        let tp = parse_newick("((a,c),(b,g),(e,(f,d)));", false).unwrap();
        let ap = stt_approx(&t, &tp).unwrap();
        let text = write_script(t.tree(), &ap.script).unwrap();
        assert_eq!(text.lines().count(), ap.script.len());
        let back = read_script(t.tree(), &text).unwrap();
        assert_eq!(back.total(), ap.script.total());
        let (end, _) = replay(t.tree(), &back).unwrap();
        assert!(is_isomorphic(&end, tp.tree()).is_some());
    }

    #[test]
    fn weighted_split_is_from_near_end() {
        let t = parse_newick("((a:1,b:1):4,c:1,(d:1,e:1):2);", true).unwrap();
        let tree = t.tree();
        let a = tree.find_leaf("a").unwrap();
        let u = tree.neighbors(a).next().unwrap();
        let d = tree.find_leaf("d").unwrap();
        let p = tree.neighbors(d).next().unwrap();
        let hub = tree.neighbors(p).find(|&y| !tree.is_leaf(y)).unwrap();
        let mut s = SttScript::new(ScriptTag::Forward);
        s.apply(&mut tree.clone(), SttOperation::to_edge(u, a, p, hub, Weight::from_integer(2))).unwrap();
        let text = write_script(tree, &s).unwrap();
        assert!(text.trim_end().ends_with("SPLIT 0/1"), "{text}");
        let back = read_script(tree, &text).unwrap();
        assert_eq!(back.total(), s.total());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let t = parse_newick("((a,b),(c,d),(e,f));", false).unwrap();
        let e = read_script(t.tree(), "# c\n\nDETACH 00 TARGET NODE 00\n").unwrap_err();
        assert!(matches!(e, Error::Script { line: 3, .. }));
        let e = read_script(t.tree(), "DETACH 0000000000000000 TARGET NODE 0000000000000000\n").unwrap_err();
        assert!(matches!(e, Error::Script { line: 1, .. }));
    }
}
