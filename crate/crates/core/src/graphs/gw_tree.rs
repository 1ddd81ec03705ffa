use std::ops::Range;

use crate::distributions::{sample_degree, DegreePmf};
use crate::rng::{combine, stream};

/// Default cap on realized nodes.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

const UNEXPANDED: u32 = u32::MAX;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("node budget of {budget} realized vertices exceeded")]
    BudgetExceeded { budget: usize },
    #[error("census truncated by the node budget of {budget} after {} qualifying vertices", partial.len())]
    Truncated { budget: usize, partial: Vec<usize> },
}

/// Galton–Watson tree realized on demand.
///
/// The root draws its offspring count from `root_law`, every other vertex from
/// `interior_law`. Each vertex carries a path key (a hash of the child indices
/// from the root), and its offspring count is drawn from a stream seeded by
/// `(seed, key)`, so the realized tree does not depend on expansion order.
/// Children of one vertex get consecutive ids.
#[derive(Debug, Clone)]
pub struct LazyGwTree {
    root_law: DegreePmf,
    interior_law: DegreePmf,
    seed: u64,
    budget: usize,
    root_children: Option<u32>,
    parent: Vec<u32>,
    key: Vec<u64>,
    first_child: Vec<u32>,
    child_count: Vec<u32>,
}

impl LazyGwTree {
    pub fn new(root_law: DegreePmf, interior_law: DegreePmf, seed: u64) -> Self {
        let mut t = Self {
            root_law,
            interior_law,
            seed,
            budget: DEFAULT_NODE_BUDGET,
            root_children: None,
            parent: Vec::new(),
            key: Vec::new(),
            first_child: Vec::new(),
            child_count: Vec::new(),
        };
        t.reset(seed);
        t
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget.max(1);
        self
    }

    /// Fixes the root's offspring count instead of drawing it.
    pub fn with_root_children(mut self, k: u32) -> Self {
        self.root_children = Some(k);
        self
    }

    /// Drops every realized vertex except the root and switches to `seed`.
    /// Allocations are kept.
    pub fn reset(&mut self, seed: u64) {
        self.seed = seed;
        self.parent.clear();
        self.key.clear();
        self.first_child.clear();
        self.child_count.clear();
        self.parent.push(UNEXPANDED);
        self.key.push(0);
        self.first_child.push(0);
        self.child_count.push(UNEXPANDED);
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Number of realized vertices.
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v != 0).then(|| self.parent[v] as usize)
    }

    pub fn path_key(&self, v: usize) -> u64 {
        self.key[v]
    }

    pub fn is_expanded(&self, v: usize) -> bool {
        self.child_count[v] != UNEXPANDED
    }

    /// Children of an expanded vertex.
    pub fn children(&self, v: usize) -> Option<Range<usize>> {
        let c = self.child_count[v];
        (c != UNEXPANDED).then(|| {
            let f = self.first_child[v] as usize;
            f..f + c as usize
        })
    }

    pub fn depth(&self, mut v: usize) -> usize {
        let mut d = 0;
        while v != 0 {
            v = self.parent[v] as usize;
            d += 1;
        }
        d
    }

    /// Offspring count of `v` without realizing anything.
    fn draw_count(&self, v: usize) -> u32 {
        if v == 0 {
            if let Some(k) = self.root_children {
                return k;
            }
        }
        let law = if v == 0 { &self.root_law } else { &self.interior_law };
        let mut rng = stream(combine(self.seed, self.key[v]));
        sample_degree(law, &mut rng) as u32
    }

    /// Realizes the children of `v` (memoized) and returns their ids.
    pub fn expand(&mut self, v: usize) -> Result<Range<usize>, TreeError> {
        if let Some(r) = self.children(v) {
            return Ok(r);
        }
        let count = self.draw_count(v);
        let start = self.len();
        if start + count as usize > self.budget {
            return Err(TreeError::BudgetExceeded { budget: self.budget });
        }
        let parent_key = self.key[v];
        for i in 0..count {
            self.parent.push(v as u32);
            self.key.push(combine(parent_key, i as u64 + 1));
            self.first_child.push(0);
            self.child_count.push(UNEXPANDED);
        }
        self.first_child[v] = start as u32;
        self.child_count[v] = count;
        Ok(start..start + count as usize)
    }

    /// Generation-`r` vertices with exactly `n - 1` children, so total degree
    /// `n` (the root's degree is its child count). Expands generations
    /// `0..=r` breadth first.
    pub fn generation_census(&mut self, r: usize, n: usize) -> Result<Vec<usize>, TreeError> {
        let mut generation = vec![0usize];
        for _ in 0..r {
            let mut next = Vec::new();
            for &v in &generation {
                match self.expand(v) {
                    Ok(c) => next.extend(c),
                    Err(_) => return Err(TreeError::Truncated { budget: self.budget, partial: Vec::new() }),
                }
            }
            generation = next;
        }
        let want = n.checked_sub(1);
        let mut found = Vec::new();
        for &v in &generation {
            let count = match self.children(v) {
                Some(c) => c.len(),
                None => self.draw_count(v) as usize,
            };
            if Some(count) == want {
                found.push(v);
            }
        }
        Ok(found)
    }
}
