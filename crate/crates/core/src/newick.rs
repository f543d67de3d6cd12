//! Newick reading and writing.
//!
//! Branch lengths are read as exact rationals. Besides decimal literals
//! the reader accepts `p/q`, which the writer emits for weights without a
//! terminating decimal expansion.

use crate::error::{Error, Result};
use crate::tree::{NodeId, Phylogeny, Tree};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, Default)]
pub struct NewickOptions {
    /// Keep branch lengths; every edge must carry one.
    pub weighted: bool,
    /// Contract degree-2 internal nodes (e.g. the root of a rooted binary
    /// tree) instead of rejecting them.
    pub normalize: bool,
    /// Reject internal nodes above this degree. Defaults to the tree's own
    /// maximum.
    pub degree_bound: Option<usize>,
}

impl NewickOptions {
    pub fn weighted(weighted: bool) -> Self {
        NewickOptions {
            weighted,
            ..Default::default()
        }
    }
}

pub fn parse_newick(text: &str, weighted: bool) -> Result<Phylogeny> {
    parse_newick_with(text, NewickOptions::weighted(weighted))
}

pub fn parse_newick_with(text: &str, opts: NewickOptions) -> Result<Phylogeny> {
    let mut tree = parse_tree(text, opts.weighted)?;
    if opts.normalize {
        tree.suppress_all();
        tree = tree.compacted().0;
    }
    match opts.degree_bound {
        Some(d) => Phylogeny::new(tree, d),
        None => Phylogeny::from_tree(tree),
    }
}

/// Parses every `;`-terminated tree in `text`.
pub fn parse_newick_many(text: &str, opts: NewickOptions) -> Result<Vec<Phylogeny>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == ';' {
            let chunk = &text[start..=i];
            out.push(parse_newick_with(chunk, opts).map_err(|e| shift(e, start))?);
            start = i + 1;
        }
    }
    if !text[start..].trim().is_empty() {
        return Err(Error::Syntax {
            offset: text.len(),
            message: "missing ';'".into(),
        });
    }
    Ok(out)
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { offset, message } => Error::Syntax {
            offset: offset + by,
            message,
        },
        e => e,
    }
}

/// Parses one Newick expression into a raw [`Tree`]. Labels may repeat and
/// degree-2 nodes are kept; use [`parse_newick`] for validated phylogenies.
pub fn parse_tree(text: &str, weighted: bool) -> Result<Tree> {
    Parser {
        src: text.as_bytes(),
        text,
        pos: 0,
        weighted,
    }
    .run()
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    weighted: bool,
}

const RESERVED: &[u8] = b"()[]':;,";

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    let start = self.pos;
                    while self.peek().is_some_and(|c| c != b']') {
                        self.pos += 1;
                    }
                    if self.peek().is_none() {
                        self.pos = start;
                        return self.err("unterminated comment");
                    }
                    self.pos += 1;
                }
                _ => return Ok(()),
            }
        }
    }

    fn name(&mut self) -> Result<Option<String>> {
        self.skip_ws()?;
        if self.peek() == Some(b'\'') {
            let start = self.pos;
            self.pos += 1;
            let mut s = String::new();
            loop {
                match self.peek() {
                    None => {
                        self.pos = start;
                        return self.err("unterminated quoted label");
                    }
                    Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => {
                        s.push('\'');
                        self.pos += 2;
                    }
                    Some(b'\'') => {
                        self.pos += 1;
                        return Ok(Some(s));
                    }
                    Some(_) => {
                        let ch = self.text[self.pos..].chars().next().unwrap();
                        s.push(ch);
                        self.pos += ch.len_utf8();
                    }
                }
            }
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || RESERVED.contains(&c) {
                break;
            }
            self.pos += 1;
        }
        Ok((self.pos > start).then(|| self.text[start..self.pos].to_string()))
    }

    fn length(&mut self) -> Result<Option<Weight>> {
        self.skip_ws()?;
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_ws()?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || b".eE+-/".contains(&c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let lit = &self.text[start..self.pos];
        match lit.parse::<Weight>() {
            Ok(w) if !w.is_negative() => Ok(Some(w)),
            _ => {
                self.pos = start;
                self.err(format!("invalid branch length `{lit}`"))
            }
        }
    }

    fn run(mut self) -> Result<Tree> {
        let mut tree = Tree::new(self.weighted);
        let mut stack: Vec<NodeId> = Vec::new();
        'item: loop {
            self.skip_ws()?;
            let mut node = match self.peek() {
                Some(b'(') => {
                    self.pos += 1;
                    stack.push(tree.add_internal());
                    continue 'item;
                }
                Some(b')') | Some(b',') | Some(b';') | None => {
                    return self.err("expected a label or '('");
                }
                Some(_) => match self.name()? {
                    Some(l) => tree.add_leaf(l),
                    None => return self.err("expected a label or '('"),
                },
            };
            loop {
                let at = self.pos;
                let len = self.length()?;
                let Some(&parent) = stack.last() else {
                    self.skip_ws()?;
                    if self.peek() != Some(b';') {
                        return self.err("expected ';'");
                    }
                    self.pos += 1;
                    self.skip_ws()?;
                    if self.pos != self.src.len() {
                        return self.err("trailing characters after ';'");
                    }
                    if tree.is_leaf(node) {
                        return Err(Error::InvalidTree("a single leaf is not a tree".into()));
                    }
                    return Ok(tree);
                };
                let w = match (len, self.weighted) {
                    (Some(w), true) => w,
                    (None, true) => {
                        self.pos = at;
                        return self.err("missing branch length");
                    }
                    (_, false) => Weight::one(),
                };
                tree.add_edge(parent, node, w);
                self.skip_ws()?;
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        continue 'item;
                    }
                    Some(b')') => {
                        self.pos += 1;
                        node = stack.pop().unwrap();
                        // internal node names are accepted and dropped
                        self.name()?;
                    }
                    _ => return self.err("expected ',' or ')'"),
                }
            }
        }
    }
}

fn quote(label: &str) -> String {
    let plain = !label.is_empty()
        && label
            .bytes()
            .all(|c| !c.is_ascii_whitespace() && !RESERVED.contains(&c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

/// Center node(s) of the tree by eccentricity.
pub(crate) fn centers(tree: &Tree) -> Vec<NodeId> {
    let mut deg: Vec<usize> = vec![0; tree.capacity()];
    let mut layer: Vec<NodeId> = Vec::new();
    let mut remaining = 0;
    for v in tree.node_ids() {
        deg[v] = tree.degree(v);
        remaining += 1;
        if deg[v] <= 1 {
            layer.push(v);
        }
    }
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for x in tree.neighbors(v) {
                deg[x] -= 1;
                if deg[x] == 1 {
                    next.push(x);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Default rooting used for output: the center, or of two centers the one
/// on the side of the least leaf label.
pub fn default_root(tree: &Tree) -> NodeId {
    let cs = centers(tree);
    let cs: Vec<NodeId> = cs.into_iter().filter(|&c| !tree.is_leaf(c)).collect();
    match cs.as_slice() {
        [c] => *c,
        [a, b] => {
            let least = |x: NodeId, from: NodeId| tree.side_labels(from, x).into_iter().next();
            if least(*a, *b) <= least(*b, *a) {
                *a
            } else {
                *b
            }
        }
        _ => tree.internal_nodes().next().expect("tree has an internal node"),
    }
}

/// Deterministic Newick text. Children are ordered by the least leaf label
/// below them; `root_hint` roots the output at the internal neighbor of the
/// named leaf.
pub fn serialize_newick(tree: &Tree, root_hint: Option<&str>) -> String {
    let root = root_hint
        .and_then(|l| tree.find_leaf(l))
        .and_then(|leaf| tree.neighbors(leaf).next())
        .unwrap_or_else(|| default_root(tree));
    write_rooted(tree, root)
}

pub(crate) fn write_rooted(tree: &Tree, root: NodeId) -> String {
    let order = tree.preorder(root);
    let mut least: Vec<Option<&str>> = vec![None; tree.capacity()];
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); tree.capacity()];
    for &(v, p) in order.iter().rev() {
        if let Some(l) = tree.label(v) {
            least[v] = Some(l);
        }
        if let Some(p) = p {
            children[p].push(v);
            if least[p].is_none() || least[v] < least[p] {
                least[p] = least[v];
            }
        }
    }
    for c in children.iter_mut() {
        c.sort_by(|&a, &b| least[a].cmp(&least[b]).then(a.cmp(&b)));
    }

    enum Tok {
        Open(NodeId, Option<NodeId>),
        Close(NodeId, Option<NodeId>),
        Comma,
    }
    let mut out = String::new();
    let mut stack = vec![Tok::Open(root, None)];
    let push_len = |out: &mut String, v: NodeId, p: Option<NodeId>| {
        if let (true, Some(p)) = (tree.is_weighted(), p) {
            out.push(':');
            out.push_str(&tree.weight(p, v).unwrap().to_string());
        }
    };
    while let Some(tok) = stack.pop() {
        match tok {
            Tok::Comma => out.push(','),
            Tok::Open(v, p) => {
                if let Some(l) = tree.label(v) {
                    out.push_str(&quote(l));
                    push_len(&mut out, v, p);
                    continue;
                }
                out.push('(');
                stack.push(Tok::Close(v, p));
                for (i, &c) in children[v].iter().enumerate().rev() {
                    stack.push(Tok::Open(c, Some(v)));
                    if i > 0 {
                        stack.push(Tok::Comma);
                    }
                }
            }
            Tok::Close(v, p) => {
                out.push(')');
                push_len(&mut out, v, p);
            }
        }
    }
    out.push(';');
    out
}
