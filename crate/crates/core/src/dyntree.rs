//! Dynamic trees (Sleator–Tarjan link-cut trees) over a fixed node set.
//!
//! Every non-root node `u` carries `val(u)`, the residual capacity of the
//! tree arc from `u` to its parent. Paths are always the path from a node up
//! to its tree root. Supported: `link`, `cut`, `add_val` along a path,
//! `find_min` along a path, and `root`. Each preferred path lives in a splay
//! tree ordered by depth, so all operations cost `O(log n)` amortized.
//!
//! `add_val` takes a signed delta. Callers consuming capacity pass a negative
//! delta; callers accumulating flow pass a positive one.

use thiserror::Error;

const NIL: usize = usize::MAX;
/// Value held by tree roots, which have no parent arc.
const NO_ARC: i64 = i64::MAX / 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {node} out of range for a forest of {n} nodes")]
    InvalidNode { node: usize, n: usize },
    #[error("node {0} is not the root of its tree")]
    NotRoot(usize),
    #[error("nodes {0} and {1} already share a tree")]
    SameTree(usize, usize),
    #[error("node {0} is a root and has no parent arc")]
    EmptyPath(usize),
    #[error("adding {delta} on the path of node {node} drives a value below zero")]
    NegativeValue { node: usize, delta: i64 },
    #[error("negative arc value {0}")]
    NegativeLink(i64),
}

#[derive(Debug, Clone)]
struct Node {
    left: usize,
    right: usize,
    // Splay parent, or path-parent when this node is the root of its splay tree.
    parent: usize,
    val: i64,
    min: i64,
    lazy: i64,
}

impl Node {
    fn new() -> Self {
        Node {
            left: NIL,
            right: NIL,
            parent: NIL,
            val: NO_ARC,
            min: NO_ARC,
            lazy: 0,
        }
    }
}

/// Forest of rooted trees with path-min / path-add queries.
#[derive(Debug, Clone)]
pub struct DynForest {
    nodes: Vec<Node>,
    rotations: u64,
    operations: u64,
}

impl DynForest {
    /// `n` singleton trees.
    pub fn new(n: usize) -> Self {
        DynForest {
            nodes: vec![Node::new(); n],
            rotations: 0,
            operations: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Splay rotations performed so far.
    pub fn rotations(&self) -> u64 {
        self.rotations
    }

    /// Public operations performed so far.
    pub fn operations(&self) -> u64 {
        self.operations
    }

    /// Makes `v` the parent of the root `u`, with `val(u) = value`.
    pub fn link(&mut self, u: usize, v: usize, value: i64) -> Result<(), TreeError> {
        self.check(u)?;
        self.check(v)?;
        if value < 0 {
            return Err(TreeError::NegativeLink(value));
        }
        self.operations += 1;
        if self.find_root(u) != u {
            return Err(TreeError::NotRoot(u));
        }
        if self.find_root(v) == u {
            return Err(TreeError::SameTree(u, v));
        }
        self.access(u);
        // u is its tree's root, so after access it has no left subtree.
        debug_assert_eq!(self.nodes[u].left, NIL);
        self.nodes[u].val = value;
        self.update(u);
        self.nodes[u].parent = v;
        Ok(())
    }

    /// Removes the arc from `u` to its parent and returns its value.
    pub fn cut(&mut self, u: usize) -> Result<i64, TreeError> {
        self.check(u)?;
        self.operations += 1;
        self.access(u);
        let left = self.nodes[u].left;
        if left == NIL {
            return Err(TreeError::EmptyPath(u));
        }
        let value = self.nodes[u].val;
        self.nodes[left].parent = NIL;
        self.nodes[u].left = NIL;
        self.nodes[u].val = NO_ARC;
        self.update(u);
        Ok(value)
    }

    /// Adds `delta` to every arc value on the path from `u` to its root.
    /// A no-op when `u` is a root.
    pub fn add_val(&mut self, u: usize, delta: i64) -> Result<(), TreeError> {
        self.check(u)?;
        self.operations += 1;
        self.access(u);
        if self.nodes[u].left == NIL {
            return Ok(());
        }
        let path_min = self.nodes[u].min;
        if path_min + delta < 0 {
            return Err(TreeError::NegativeValue { node: u, delta });
        }
        self.apply(u, delta);
        Ok(())
    }

    /// The node on the path from `u` whose parent arc has the smallest value,
    /// preferring the node nearest the root on ties, and that value.
    pub fn find_min(&mut self, u: usize) -> Result<(usize, i64), TreeError> {
        self.check(u)?;
        self.operations += 1;
        self.access(u);
        if self.nodes[u].left == NIL {
            return Err(TreeError::EmptyPath(u));
        }
        let target = self.nodes[u].min;
        let mut x = u;
        loop {
            self.push_down(x);
            let l = self.nodes[x].left;
            if l != NIL && self.nodes[l].min == target {
                x = l;
            } else if self.nodes[x].val == target {
                break;
            } else {
                x = self.nodes[x].right;
            }
        }
        self.splay(x);
        Ok((x, target))
    }

    /// Root of the tree containing `u`.
    pub fn root(&mut self, u: usize) -> Result<usize, TreeError> {
        self.check(u)?;
        self.operations += 1;
        Ok(self.find_root(u))
    }

    /// Parent of `u` and `val(u)`, or `None` for a root.
    pub fn parent(&mut self, u: usize) -> Result<Option<(usize, i64)>, TreeError> {
        self.check(u)?;
        self.operations += 1;
        self.access(u);
        let mut x = self.nodes[u].left;
        if x == NIL {
            return Ok(None);
        }
        loop {
            self.push_down(x);
            let r = self.nodes[x].right;
            if r == NIL {
                break;
            }
            x = r;
        }
        let value = self.nodes[u].val;
        self.splay(x);
        Ok(Some((x, value)))
    }

    fn check(&self, u: usize) -> Result<(), TreeError> {
        if u < self.nodes.len() {
            Ok(())
        } else {
            Err(TreeError::InvalidNode {
                node: u,
                n: self.nodes.len(),
            })
        }
    }

    fn find_root(&mut self, u: usize) -> usize {
        self.access(u);
        let mut x = u;
        loop {
            self.push_down(x);
            let l = self.nodes[x].left;
            if l == NIL {
                break;
            }
            x = l;
        }
        self.splay(x);
        x
    }

    fn is_splay_root(&self, x: usize) -> bool {
        let p = self.nodes[x].parent;
        p == NIL || (self.nodes[p].left != x && self.nodes[p].right != x)
    }

    fn apply(&mut self, x: usize, delta: i64) {
        if x == NIL {
            return;
        }
        let node = &mut self.nodes[x];
        node.val += delta;
        node.min += delta;
        node.lazy += delta;
    }

    fn push_down(&mut self, x: usize) {
        let lazy = self.nodes[x].lazy;
        if lazy != 0 {
            let (l, r) = (self.nodes[x].left, self.nodes[x].right);
            self.apply(l, lazy);
            self.apply(r, lazy);
            self.nodes[x].lazy = 0;
        }
    }

    fn update(&mut self, x: usize) {
        let (l, r) = (self.nodes[x].left, self.nodes[x].right);
        let mut m = self.nodes[x].val;
        if l != NIL {
            m = m.min(self.nodes[l].min);
        }
        if r != NIL {
            m = m.min(self.nodes[r].min);
        }
        self.nodes[x].min = m;
    }

    fn rotate(&mut self, x: usize) {
        self.rotations += 1;
        let p = self.nodes[x].parent;
        let g = self.nodes[p].parent;
        let p_was_root = self.is_splay_root(p);
        if self.nodes[p].left == x {
            let b = self.nodes[x].right;
            self.nodes[p].left = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].right = p;
        } else {
            let b = self.nodes[x].left;
            self.nodes[p].right = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].left = p;
        }
        self.nodes[p].parent = x;
        self.nodes[x].parent = g;
        if !p_was_root {
            if self.nodes[g].left == p {
                self.nodes[g].left = x;
            } else {
                self.nodes[g].right = x;
            }
        }
        self.update(p);
        self.update(x);
    }

    fn splay(&mut self, x: usize) {
        let mut chain = vec![x];
        let mut y = x;
        while !self.is_splay_root(y) {
            y = self.nodes[y].parent;
            chain.push(y);
        }
        for &z in chain.iter().rev() {
            self.push_down(z);
        }
        while !self.is_splay_root(x) {
            let p = self.nodes[x].parent;
            if !self.is_splay_root(p) {
                let g = self.nodes[p].parent;
                let zig_zig = (self.nodes[g].left == p) == (self.nodes[p].left == x);
                if zig_zig {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
    }

    /// Makes the root-to-`x` path preferred and splays `x` to the top of it.
    fn access(&mut self, x: usize) {
        let mut last = NIL;
        let mut y = x;
        while y != NIL {
            self.splay(y);
            self.nodes[y].right = last;
            self.update(y);
            last = y;
            y = self.nodes[y].parent;
        }
        self.splay(x);
    }
}
