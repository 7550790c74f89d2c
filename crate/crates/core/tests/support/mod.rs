//! Shared helpers for the integration tests.
#![allow(dead_code)]

use compactflow::dyntree::{DynForest, TreeError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parent-pointer forest with `O(depth)` path walks.
#[derive(Debug, Clone)]
pub struct NaiveForest {
    parent: Vec<Option<usize>>,
    val: Vec<i64>,
}

impl NaiveForest {
    pub fn new(n: usize) -> Self {
        NaiveForest {
            parent: vec![None; n],
            val: vec![0; n],
        }
    }

    fn check(&self, u: usize) -> Result<(), TreeError> {
        if u < self.parent.len() {
            Ok(())
        } else {
            Err(TreeError::InvalidNode {
                node: u,
                n: self.parent.len(),
            })
        }
    }

    /// Nodes from `u` up to its root, root last.
    pub fn path(&self, u: usize) -> Vec<usize> {
        let mut out = vec![u];
        let mut x = u;
        while let Some(p) = self.parent[x] {
            out.push(p);
            x = p;
        }
        out
    }

    pub fn is_root(&self, u: usize) -> bool {
        self.parent[u].is_none()
    }

    pub fn link(&mut self, u: usize, v: usize, value: i64) -> Result<(), TreeError> {
        self.check(u)?;
        self.check(v)?;
        if value < 0 {
            return Err(TreeError::NegativeLink(value));
        }
        if self.parent[u].is_some() {
            return Err(TreeError::NotRoot(u));
        }
        if self.root(v)? == u {
            return Err(TreeError::SameTree(u, v));
        }
        self.parent[u] = Some(v);
        self.val[u] = value;
        Ok(())
    }

    pub fn cut(&mut self, u: usize) -> Result<i64, TreeError> {
        self.check(u)?;
        if self.parent[u].take().is_none() {
            return Err(TreeError::EmptyPath(u));
        }
        Ok(self.val[u])
    }

    pub fn add_val(&mut self, u: usize, delta: i64) -> Result<(), TreeError> {
        self.check(u)?;
        let path = self.path(u);
        let arcs = &path[..path.len() - 1];
        if arcs.iter().any(|&x| self.val[x] + delta < 0) {
            return Err(TreeError::NegativeValue { node: u, delta });
        }
        for &x in arcs {
            self.val[x] += delta;
        }
        Ok(())
    }

    pub fn find_min(&self, u: usize) -> Result<(usize, i64), TreeError> {
        self.check(u)?;
        let path = self.path(u);
        let mut best: Option<(usize, i64)> = None;
        for &x in &path[..path.len() - 1] {
            // `<=` while walking up keeps the node nearest the root on ties.
            if best.is_none_or(|(_, b)| self.val[x] <= b) {
                best = Some((x, self.val[x]));
            }
        }
        best.ok_or(TreeError::EmptyPath(u))
    }

    pub fn root(&self, u: usize) -> Result<usize, TreeError> {
        self.check(u)?;
        Ok(*self.path(u).last().unwrap())
    }

    pub fn parent(&self, u: usize) -> Result<Option<(usize, i64)>, TreeError> {
        self.check(u)?;
        Ok(self.parent[u].map(|p| (p, self.val[u])))
    }
}

/// Result of one differential run.
#[derive(Debug, Clone, Copy)]
pub struct SequenceReport {
    pub nodes: usize,
    pub operations: u64,
    pub rotations: u64,
}

impl SequenceReport {
    /// `rotations / (k · log₂ n)`.
    pub fn rotation_ratio(&self) -> f64 {
        let log = (self.nodes.max(2) as f64).log2();
        self.rotations as f64 / (self.operations.max(1) as f64 * log)
    }
}

/// Runs `ops` random operations on both forests and compares every
/// observation. Roughly one call in twenty violates a precondition, and both
/// sides must then return the same error.
pub fn differential_sequence(seed: u64, nodes: usize, ops: usize) -> Result<SequenceReport, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fast = DynForest::new(nodes);
    let mut slow = NaiveForest::new(nodes);
    for step in 0..ops {
        let u = rng.gen_range(0..nodes);
        let invalid = rng.gen_bool(0.05);
        let kind = rng.gen_range(0..6);
        let ctx = |what: &str| format!("seed {seed} step {step}: {what}");
        match kind {
            0 => {
                // Link: a root under a node of another tree, unless testing errors.
                let v = rng.gen_range(0..nodes);
                let value = if invalid && rng.gen_bool(0.3) {
                    -1
                } else {
                    rng.gen_range(0..100)
                };
                let (u, v) = if invalid {
                    (u, v)
                } else {
                    let r = slow.root(u).unwrap();
                    if slow.root(v).unwrap() == r {
                        continue;
                    }
                    (r, v)
                };
                let a = fast.link(u, v, value);
                let b = slow.link(u, v, value);
                if a != b {
                    return Err(ctx(&format!("link({u},{v},{value}) {a:?} vs {b:?}")));
                }
            }
            1 => {
                if slow.is_root(u) && !invalid {
                    continue;
                }
                let a = fast.cut(u);
                let b = slow.cut(u);
                if a != b {
                    return Err(ctx(&format!("cut({u}) {a:?} vs {b:?}")));
                }
            }
            2 => {
                let delta = match slow.find_min(u) {
                    Ok((_, min)) if !invalid => rng.gen_range(-min..=50),
                    Ok((_, min)) => -min - 1,
                    Err(_) => rng.gen_range(-5..=5),
                };
                let a = fast.add_val(u, delta);
                let b = slow.add_val(u, delta);
                if a != b {
                    return Err(ctx(&format!("add_val({u},{delta}) {a:?} vs {b:?}")));
                }
            }
            3 => {
                let a = fast.find_min(u);
                let b = slow.find_min(u);
                if a != b {
                    return Err(ctx(&format!("find_min({u}) {a:?} vs {b:?}")));
                }
            }
            4 => {
                let a = fast.root(u);
                let b = slow.root(u);
                if a != b {
                    return Err(ctx(&format!("root({u}) {a:?} vs {b:?}")));
                }
            }
            _ => {
                let w = if invalid { nodes + u } else { u };
                let a = fast.parent(w);
                let b = slow.parent(w);
                if a != b {
                    return Err(ctx(&format!("parent({w}) {a:?} vs {b:?}")));
                }
            }
        }
    }
    for u in 0..nodes {
        let a = fast.parent(u);
        let b = slow.parent(u);
        if a != b {
            return Err(format!("seed {seed} final parent({u}) {a:?} vs {b:?}"));
        }
    }
    Ok(SequenceReport {
        nodes,
        operations: fast.operations(),
        rotations: fast.rotations(),
    })
}

/// Rotation constant `C` in `rotations ≤ C · k · log₂ n`. The worst ratio
/// measured over the hundred differential sequences is about 0.65.
pub const ROTATION_C: f64 = 2.0;
