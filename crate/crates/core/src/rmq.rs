//! Range-minimum queries and lowest common ancestors in linear space.

use crate::tree::{NodeId, Tree};

const BLOCK: usize = 64;

/// Argmin queries over a fixed slice: a sparse table over block minima plus
/// per-position stack masks inside each block.
#[derive(Clone, Debug)]
pub struct Rmq<K> {
    keys: Vec<K>,
    masks: Vec<u64>,
    table: Vec<Vec<u32>>,
}

impl<K: Ord + Copy> Rmq<K> {
    pub fn new(keys: Vec<K>) -> Self {
        let n = keys.len();
        let mut masks = vec![0u64; n];
        let mut stack: Vec<usize> = Vec::with_capacity(BLOCK);
        for start in (0..n).step_by(BLOCK) {
            stack.clear();
            let mut cur = 0u64;
            for i in start..(start + BLOCK).min(n) {
                while let Some(&top) = stack.last() {
                    if keys[top] > keys[i] {
                        stack.pop();
                        cur &= !(1u64 << (top - start));
                    } else {
                        break;
                    }
                }
                stack.push(i);
                cur |= 1u64 << (i - start);
                masks[i] = cur;
            }
        }
        let blocks = n.div_ceil(BLOCK);
        let mut level: Vec<u32> = (0..blocks)
            .map(|b| {
                let end = ((b + 1) * BLOCK).min(n) - 1;
                (b * BLOCK + masks[end].trailing_zeros() as usize) as u32
            })
            .collect();
        let mut table = Vec::new();
        let mut width = 1;
        while !level.is_empty() {
            let next: Vec<u32> = (0..level.len().saturating_sub(width))
                .map(|i| pick(&keys, level[i], level[i + width]))
                .collect();
            table.push(level);
            level = next;
            width *= 2;
        }
        Rmq { keys, masks, table }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, i: usize) -> K {
        self.keys[i]
    }

    fn in_block(&self, l: usize, r: usize) -> usize {
        let start = l - l % BLOCK;
        let m = self.masks[r] & (!0u64 << (l - start));
        start + m.trailing_zeros() as usize
    }

    /// Index of a minimum key in `l..=r`.
    pub fn argmin(&self, l: usize, r: usize) -> usize {
        assert!(l <= r && r < self.keys.len());
        let (bl, br) = (l / BLOCK, r / BLOCK);
        if bl == br {
            return self.in_block(l, r);
        }
        let mut best = self.in_block(l, (bl + 1) * BLOCK - 1) as u32;
        best = pick(&self.keys, best, self.in_block(br * BLOCK, r) as u32);
        if bl + 1 < br {
            let (a, b) = (bl + 1, br - 1);
            let k = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
            let row = &self.table[k];
            best = pick(&self.keys, best, row[a]);
            best = pick(&self.keys, best, row[b + 1 - (1 << k)]);
        }
        best as usize
    }
}

fn pick<K: Ord>(keys: &[K], a: u32, b: u32) -> u32 {
    if keys[b as usize] < keys[a as usize] {
        b
    } else {
        a
    }
}

/// Constant-time LCA on a rooted tree via preorder ranks: for `u` before
/// `v`, the shallowest node in `(pre u, pre v]` is a child of the LCA.
#[derive(Clone, Debug)]
pub struct Lca {
    root: NodeId,
    pre: Vec<u32>,
    order: Vec<NodeId>,
    parent: Vec<NodeId>,
    depth: Vec<u32>,
    rmq: Rmq<u32>,
    // node ids are preorder ranks
    identity: bool,
}

impl Lca {
    pub fn new(tree: &Tree, root: NodeId) -> Self {
        Lca::from_walk(tree.capacity(), &tree.preorder(root))
    }

    /// Builds from a preorder walk of `(node, parent)` pairs over ids below
    /// `capacity`; the first entry is the root.
    pub fn from_walk(capacity: usize, walk: &[(NodeId, Option<NodeId>)]) -> Self {
        let mut pre = vec![u32::MAX; capacity];
        let mut parent = vec![usize::MAX; capacity];
        let mut depth = vec![0u32; capacity];
        let mut order = Vec::with_capacity(walk.len());
        for (i, &(v, p)) in walk.iter().enumerate() {
            pre[v] = i as u32;
            order.push(v);
            if let Some(p) = p {
                parent[v] = p;
                depth[v] = depth[p] + 1;
            }
        }
        let rmq = Rmq::new(order.iter().map(|&v| depth[v]).collect());
        let identity = order.iter().enumerate().all(|(i, &v)| i == v);
        Lca {
            root: walk[0].0,
            pre,
            order,
            parent,
            depth,
            rmq,
            identity,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn preorder_rank(&self, v: NodeId) -> usize {
        if self.identity {
            return v;
        }
        self.pre[v] as usize
    }

    pub fn preorder(&self) -> &[NodeId] {
        &self.order
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        (v != self.root).then(|| self.parent[v])
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v] as usize
    }

    pub fn lca(&self, u: NodeId, v: NodeId) -> NodeId {
        self.lca_depth(u, v).0
    }

    /// The LCA of `u` and `v` together with its depth.
    pub fn lca_depth(&self, u: NodeId, v: NodeId) -> (NodeId, usize) {
        if u == v {
            return (u, self.depth(u));
        }
        let (a, b) = if self.identity {
            (u.min(v), u.max(v))
        } else {
            let (a, b) = (self.pre[u] as usize, self.pre[v] as usize);
            (a.min(b), a.max(b))
        };
        let m = self.rmq.argmin(a + 1, b);
        let child = if self.identity { m } else { self.order[m] };
        (self.parent[child], self.rmq.key(m) as usize - 1)
    }
}
