//! Rooted leaf-labelled trees.
//!
//! A tree has leaves `0..=n`. Leaf `0` is the root and has exactly one child,
//! the top internal vertex. Internal vertices get identifiers `n+1, n+2, ...`
//! in post-order, so the tree `(1,2,(3,4,5));` has internal vertices `6`
//! (above 3, 4, 5) and `7` (the top vertex). Every edge is named by the vertex
//! it points into.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::TreeError;

pub type Vertex = usize;

/// Nested description of the part of a tree hanging below the root leaf.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Clade {
    Leaf(usize),
    Node(Vec<Clade>),
}

impl Clade {
    fn min_leaf(&self) -> usize {
        match self {
            Clade::Leaf(l) => *l,
            Clade::Node(ch) => ch.iter().map(Clade::min_leaf).min().unwrap_or(usize::MAX),
        }
    }

    /// Sort children by their smallest leaf label, recursively.
    pub fn canonicalize(&mut self) {
        if let Clade::Node(ch) = self {
            for c in ch.iter_mut() {
                c.canonicalize();
            }
            ch.sort_by_key(Clade::min_leaf);
        }
    }

    fn write_newick(&self, out: &mut String) {
        match self {
            Clade::Leaf(l) => {
                let _ = write!(out, "{l}");
            }
            Clade::Node(ch) => {
                out.push('(');
                for (k, c) in ch.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    c.write_newick(out);
                }
                out.push(')');
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    n: usize,
    parent: Vec<Option<Vertex>>,
    children: Vec<Vec<Vertex>>,
    depth: Vec<usize>,
}

/// Shape of the 4-leaf subtree induced by a quartet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuartetKind {
    /// Cherries `{a,b}` and `{c,d}`, each pair sorted and the pair with the
    /// smaller first element listed first.
    Resolved([usize; 2], [usize; 2]),
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuartetTopology {
    pub leaves: [usize; 4],
    pub kind: QuartetKind,
}

impl RootedTree {
    /// Build a tree from the clade attached below the root leaf.
    pub fn from_clade(top: &Clade) -> Result<Self, TreeError> {
        let Clade::Node(_) = top else {
            return Err(TreeError::DegreeTwo);
        };
        let mut labels = Vec::new();
        collect_leaves(top, &mut labels)?;
        let n = labels.len();
        let mut seen = vec![false; n + 1];
        for &l in &labels {
            if l == 0 {
                return Err(TreeError::ReservedRootLabel);
            }
            if l > n {
                // some label in 1..=n must then be missing
                let missing = (1..=n).find(|k| !labels.contains(k)).unwrap_or(n);
                return Err(TreeError::MissingLabel(missing));
            }
            if seen[l] {
                return Err(TreeError::DuplicateLabel(l));
            }
            seen[l] = true;
        }
        let mut tree =
            RootedTree { n, parent: vec![None; n + 1], children: vec![Vec::new(); n + 1], depth: vec![0; n + 1] };
        let top_id = tree.attach(top);
        tree.parent[top_id] = Some(0);
        tree.children[0].push(top_id);
        tree.fill_depths();
        Ok(tree)
    }

    fn attach(&mut self, clade: &Clade) -> Vertex {
        match clade {
            Clade::Leaf(l) => *l,
            Clade::Node(ch) => {
                let kids: Vec<Vertex> = ch.iter().map(|c| self.attach(c)).collect();
                let id = self.parent.len();
                self.parent.push(None);
                self.depth.push(0);
                for &k in &kids {
                    self.parent[k] = Some(id);
                }
                self.children.push(kids);
                id
            }
        }
    }

    fn fill_depths(&mut self) {
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                self.depth[c] = self.depth[v] + 1;
                stack.push(c);
            }
        }
    }

    /// Number of non-root leaves; the leaves are `0..=n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_leaves(&self) -> usize {
        self.n + 1
    }

    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        v <= self.n
    }

    pub fn leaves(&self) -> core::ops::RangeInclusive<Vertex> {
        0..=self.n
    }

    /// `Int(T)`, in increasing identifier order.
    pub fn internal_vertices(&self) -> core::ops::Range<Vertex> {
        self.n + 1..self.num_vertices()
    }

    /// All vertices except the root leaf; these also name the edges.
    pub fn non_root_vertices(&self) -> core::ops::Range<Vertex> {
        1..self.num_vertices()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    pub fn outdeg(&self, v: Vertex) -> usize {
        self.children[v].len()
    }

    pub fn depth(&self, v: Vertex) -> usize {
        self.depth[v]
    }

    /// The internal vertex adjacent to the root leaf.
    pub fn top(&self) -> Vertex {
        self.children[0][0]
    }

    fn check_leaf(&self, l: usize) -> Result<(), TreeError> {
        if l > self.n {
            Err(TreeError::UnknownLabel(l))
        } else {
            Ok(())
        }
    }

    /// Most recent common ancestor of two leaves.
    pub fn lca(&self, i: usize, j: usize) -> Result<Vertex, TreeError> {
        self.check_leaf(i)?;
        self.check_leaf(j)?;
        Ok(self.lca_vertices(i, j))
    }

    pub(crate) fn lca_vertices(&self, mut a: Vertex, mut b: Vertex) -> Vertex {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root vertex has a parent");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root vertex has a parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root vertex has a parent");
            b = self.parent[b].expect("non-root vertex has a parent");
        }
        a
    }

    /// Edges of the path between two distinct leaves, sorted by the vertex
    /// each edge points into.
    pub fn path_edges(&self, i: usize, j: usize) -> Result<Vec<Vertex>, TreeError> {
        self.check_leaf(i)?;
        self.check_leaf(j)?;
        if i == j {
            return Err(TreeError::SameLeaf);
        }
        let top = self.lca_vertices(i, j);
        let mut edges = Vec::new();
        for start in [i, j] {
            let mut v = start;
            while v != top {
                edges.push(v);
                v = self.parent[v].expect("non-root vertex has a parent");
            }
        }
        edges.sort_unstable();
        Ok(edges)
    }

    /// Number of edges between two vertices.
    pub fn distance(&self, a: Vertex, b: Vertex) -> usize {
        let c = self.lca_vertices(a, b);
        self.depth[a] + self.depth[b] - 2 * self.depth[c]
    }

    /// Resolve a quartet with the four-point condition on edge counts.
    pub fn quartet_topology(&self, q: [usize; 4]) -> Result<QuartetTopology, TreeError> {
        for &l in &q {
            self.check_leaf(l)?;
        }
        let mut leaves = q;
        leaves.sort_unstable();
        if leaves.windows(2).any(|w| w[0] == w[1]) {
            return Err(TreeError::NotDistinct);
        }
        let [a, b, c, d] = leaves;
        let d2 = |x, y| self.distance(x, y);
        let pairings = [([a, b], [c, d]), ([a, c], [b, d]), ([a, d], [b, c])];
        let sums = pairings.map(|(p, r)| d2(p[0], p[1]) + d2(r[0], r[1]));
        let min = *sums.iter().min().unwrap();
        let kind = if sums.iter().filter(|&&s| s == min).count() == 1 {
            let k = sums.iter().position(|&s| s == min).unwrap();
            QuartetKind::Resolved(pairings[k].0, pairings[k].1)
        } else {
            QuartetKind::Unresolved
        };
        Ok(QuartetTopology { leaves, kind })
    }

    /// Sorted list of leaves below `v` (the leaf itself for a leaf).
    pub fn leaf_set(&self, v: Vertex) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if x != 0 && self.is_leaf(x) {
                out.push(x);
            } else {
                stack.extend_from_slice(&self.children[x]);
            }
        }
        out.sort_unstable();
        out
    }

    /// The non-root vertex whose leaf set equals `leaves` (sorted).
    pub fn vertex_with_leaf_set(&self, leaves: &[usize]) -> Option<Vertex> {
        self.non_root_vertices().find(|&v| self.leaf_set(v) == leaves)
    }

    /// Leaves below `v`, including `v` when it is a leaf.
    pub fn descendant_leaves(&self, v: Vertex) -> Vec<Vertex> {
        self.descendants(v).into_iter().filter(|&x| self.is_leaf(x)).collect()
    }

    /// Internal vertices below `v`, including `v` itself when internal.
    pub fn descendant_internal(&self, v: Vertex) -> Vec<Vertex> {
        self.descendants(v).into_iter().filter(|&x| !self.is_leaf(x)).collect()
    }

    fn descendants(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend_from_slice(&self.children[x]);
        }
        out.sort_unstable();
        out
    }

    pub fn to_clade(&self) -> Clade {
        self.clade_of(self.top())
    }

    fn clade_of(&self, v: Vertex) -> Clade {
        if self.is_leaf(v) {
            Clade::Leaf(v)
        } else {
            Clade::Node(self.children[v].iter().map(|&c| self.clade_of(c)).collect())
        }
    }

    /// Newick text with children in stored order, terminated by `;`.
    pub fn to_newick(&self) -> String {
        let mut s = String::new();
        self.to_clade().write_newick(&mut s);
        s.push(';');
        s
    }

    /// Newick text with children sorted by smallest leaf label.
    pub fn canonical_newick(&self) -> String {
        let mut c = self.to_clade();
        c.canonicalize();
        let mut s = String::new();
        c.write_newick(&mut s);
        s.push(';');
        s
    }

    pub fn is_star(&self) -> bool {
        self.internal_vertices().len() == 1
    }

    /// Tree obtained by renaming leaf `i` to `perm[i]` (with `perm[0] == 0`).
    pub fn relabel_leaves(&self, perm: &[usize]) -> Result<Self, TreeError> {
        fn go(c: &Clade, perm: &[usize]) -> Clade {
            match c {
                Clade::Leaf(l) => Clade::Leaf(perm.get(*l).copied().unwrap_or(*l)),
                Clade::Node(ch) => Clade::Node(ch.iter().map(|x| go(x, perm)).collect()),
            }
        }
        RootedTree::from_clade(&go(&self.to_clade(), perm))
    }
}

fn collect_leaves(c: &Clade, out: &mut Vec<usize>) -> Result<(), TreeError> {
    match c {
        Clade::Leaf(l) => out.push(*l),
        Clade::Node(ch) => {
            if ch.len() < 2 {
                return Err(TreeError::DegreeTwo);
            }
            for x in ch {
                collect_leaves(x, out)?;
            }
        }
    }
    Ok(())
}

/// Parse a Newick expression over leaf labels `1..=n`. The outermost node is
/// the child of the implicit root leaf `0`.
pub fn parse_newick(text: &str) -> Result<RootedTree, TreeError> {
    let mut p = NewickParser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let top = p.clade()?;
    p.skip_ws();
    if p.peek() != Some(b';') {
        return Err(p.err("expected ';'"));
    }
    p.pos += 1;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing characters after ';'"));
    }
    RootedTree::from_clade(&top)
}

struct NewickParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl NewickParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> TreeError {
        TreeError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn clade(&mut self) -> Result<Clade, TreeError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let mut kids = vec![self.clade()?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.pos += 1;
                            kids.push(self.clade()?);
                        }
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.err("expected ',' or ')'")),
                    }
                }
                self.skip_ws();
                if let Some(b) = self.peek() {
                    if b.is_ascii_alphanumeric() {
                        return Err(self.err("internal node labels are not supported"));
                    }
                }
                self.reject_branch_length()?;
                if kids.len() < 2 {
                    return Err(TreeError::DegreeTwo);
                }
                Ok(Clade::Node(kids))
            }
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                    self.pos += 1;
                }
                let s = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
                let label: usize = s.parse().map_err(|_| self.err("leaf label out of range"))?;
                self.skip_ws();
                self.reject_branch_length()?;
                Ok(Clade::Leaf(label))
            }
            Some(_) => Err(self.err("expected '(' or a numeric leaf label")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn reject_branch_length(&self) -> Result<(), TreeError> {
        if self.peek() == Some(b':') {
            Err(self.err("branch lengths are not supported"))
        } else {
            Ok(())
        }
    }
}

/// Star tree `S_m` on leaves `0..=m`.
pub fn star_tree(m: usize) -> Result<RootedTree, TreeError> {
    if m < 2 {
        return Err(TreeError::TooFewLeaves(m));
    }
    RootedTree::from_clade(&Clade::Node((1..=m).map(Clade::Leaf).collect()))
}

/// Replace leaf `ell` of `t_prime` by the centre of a star with `m` leaves.
///
/// Leaves of `t_prime` below `ell` keep their labels, those above shift down
/// by one, and the star's leaves `1..=m` become `n'..n'+m-1`.
pub fn glue_trees(t_prime: &RootedTree, ell: usize, m: usize) -> Result<RootedTree, TreeError> {
    let (tree, _) = glue_with_labels(t_prime, ell, m)?;
    Ok(tree)
}

/// Like [`glue_trees`], also returning the leaf maps: entry `k` of the first
/// vector is the label in the glued tree of leaf `k` of `t_prime` (`None` for
/// `ell`), entry `k` of the second is the label of star leaf `k` (`0` maps to
/// `None`).
pub(crate) fn glue_with_labels(
    t_prime: &RootedTree,
    ell: usize,
    m: usize,
) -> Result<(RootedTree, (Vec<Option<usize>>, Vec<Option<usize>>)), TreeError> {
    if ell == 0 {
        return Err(TreeError::RootLeaf);
    }
    if ell > t_prime.n() {
        return Err(TreeError::UnknownLabel(ell));
    }
    if m < 2 {
        return Err(TreeError::TooFewLeaves(m));
    }
    let np = t_prime.n();
    let prime_map: Vec<Option<usize>> = (0..=np)
        .map(|k| match k.cmp(&ell) {
            core::cmp::Ordering::Less => Some(k),
            core::cmp::Ordering::Equal => None,
            core::cmp::Ordering::Greater => Some(k - 1),
        })
        .collect();
    let star_map: Vec<Option<usize>> = (0..=m).map(|k| if k == 0 { None } else { Some(np + k - 1) }).collect();

    fn rewrite(c: &Clade, ell: usize, pm: &[Option<usize>], sm: &[Option<usize>]) -> Clade {
        match c {
            Clade::Leaf(l) if *l == ell => Clade::Node(sm.iter().flatten().map(|&x| Clade::Leaf(x)).collect()),
            Clade::Leaf(l) => Clade::Leaf(pm[*l].expect("non-glued leaf has a label")),
            Clade::Node(ch) => Clade::Node(ch.iter().map(|x| rewrite(x, ell, pm, sm)).collect()),
        }
    }
    let glued = rewrite(&t_prime.to_clade(), ell, &prime_map, &star_map);
    Ok((RootedTree::from_clade(&glued)?, (prime_map, star_map)))
}

/// Every tree on non-root leaves `1..=n` without degree-2 vertices, each
/// once, in a fixed deterministic order with canonical child order.
pub fn enumerate_topologies(n: usize) -> Vec<RootedTree> {
    if n < 2 {
        return Vec::new();
    }
    let leaves: Vec<usize> = (1..=n).collect();
    clades_on(&leaves).into_iter().map(|c| RootedTree::from_clade(&c).expect("enumerated clade is valid")).collect()
}

/// All clades (with at least two leaves) on the given sorted leaf set.
fn clades_on(leaves: &[usize]) -> Vec<Clade> {
    let mut out = Vec::new();
    for blocks in set_partitions(leaves) {
        if blocks.len() < 2 {
            continue;
        }
        let options: Vec<Vec<Clade>> =
            blocks.iter().map(|b| if b.len() == 1 { vec![Clade::Leaf(b[0])] } else { clades_on(b) }).collect();
        let mut idx = vec![0usize; options.len()];
        'product: loop {
            out.push(Clade::Node(idx.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect()));
            let mut pos = options.len();
            while pos > 0 {
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < options[pos].len() {
                    continue 'product;
                }
                idx[pos] = 0;
            }
            break;
        }
    }
    out
}

/// Set partitions via restricted growth strings; blocks ordered by minimum.
fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if items.is_empty() {
        return out;
    }
    let mut rgs = vec![0usize; items.len()];
    loop {
        let nblocks = rgs.iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); nblocks];
        for (k, &b) in rgs.iter().enumerate() {
            blocks[b].push(items[k]);
        }
        out.push(blocks);
        // next restricted growth string
        let mut k = items.len() - 1;
        loop {
            if k == 0 {
                return out;
            }
            let max_prefix = rgs[..k].iter().max().copied().unwrap();
            if rgs[k] <= max_prefix {
                rgs[k] += 1;
                for r in rgs.iter_mut().skip(k + 1) {
                    *r = 0;
                }
                break;
            }
            k -= 1;
        }
    }
}
