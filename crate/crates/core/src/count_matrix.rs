//! Sparse matrix of observed interaction counts between network nodes.
//!
//! Cells carry an observation mask: a cell can be observed with a zero
//! count, which is different from a missing (never observed) cell. For
//! symmetric data only canonical cells with `i <= j` are stored; the
//! `(j, i)` view mirrors them.

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};

/// A `(row, column)` node-pair index.
pub type Cell = (usize, usize);

/// Sparse n-by-n matrix of nonnegative interaction counts with an
/// observation mask. Counts are real-valued so that annealed (rescaled)
/// matrices can be represented; raw data ingestion validates integrality
/// separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    n_nodes: usize,
    symmetric: bool,
    // Keys are canonical cells and double as the observation mask;
    // zero-count observed cells are stored explicitly.
    counts: BTreeMap<Cell, f64>,
}

impl CountMatrix {
    pub fn new(n_nodes: usize, symmetric: bool) -> Self {
        Self {
            n_nodes,
            symmetric,
            counts: BTreeMap::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Canonical key for a cell: `(min, max)` when symmetric, `(i, j)` as
    /// given otherwise.
    pub fn canonical(&self, i: usize, j: usize) -> Cell {
        if self.symmetric && i > j {
            (j, i)
        } else {
            (i, j)
        }
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        for index in [i, j] {
            if index >= self.n_nodes {
                return Err(CoreError::IndexOutOfRange {
                    index,
                    n_nodes: self.n_nodes,
                });
            }
        }
        Ok(())
    }

    /// Marks `(i, j)` observed and adds `count` to the cell; repeated calls
    /// for the same cell accumulate.
    pub fn observe(&mut self, i: usize, j: usize, count: f64) -> Result<()> {
        self.check_index(i, j)?;
        if !count.is_finite() {
            return Err(CoreError::NonFinite(count));
        }
        if count < 0.0 {
            return Err(CoreError::NegativeCount(count));
        }
        *self.counts.entry(self.canonical(i, j)).or_insert(0.0) += count;
        Ok(())
    }

    /// Count at `(i, j)`; zero for unobserved cells.
    pub fn count(&self, i: usize, j: usize) -> f64 {
        self.counts
            .get(&self.canonical(i, j))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.counts.contains_key(&self.canonical(i, j))
    }

    /// Observed cells (the mask) with their counts, in canonical order.
    pub fn observed(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        self.counts.iter().map(|(&c, &v)| (c, v))
    }

    pub fn observed_cells(&self) -> Vec<Cell> {
        self.counts.keys().copied().collect()
    }

    pub fn n_observed(&self) -> usize {
        self.counts.len()
    }

    /// Number of observed cells with strictly positive count (the "seen"
    /// node pairings used by the smoothing scheme).
    pub fn n_nonzero(&self) -> usize {
        self.counts.values().filter(|&&v| v > 0.0).count()
    }

    pub fn total_count(&self) -> f64 {
        self.counts.values().sum()
    }

    pub fn min_nonzero_count(&self) -> Option<f64> {
        self.counts
            .values()
            .filter(|&&v| v > 0.0)
            .copied()
            .fold(None, |acc, v| match acc {
                None => Some(v),
                Some(m) => Some(m.min(v)),
            })
    }

    /// Every cell in the normalization universe: all ordered pairs, or all
    /// `i <= j` pairs when symmetric.
    pub fn universe(&self) -> impl Iterator<Item = Cell> + '_ {
        let n = self.n_nodes;
        let symmetric = self.symmetric;
        (0..n).flat_map(move |i| {
            let start = if symmetric { i } else { 0 };
            (start..n).map(move |j| (i, j))
        })
    }

    pub fn universe_len(&self) -> usize {
        if self.symmetric {
            self.n_nodes * (self.n_nodes + 1) / 2
        } else {
            self.n_nodes * self.n_nodes
        }
    }

    /// Sum of counts over all observed cells incident to `node`.
    pub fn node_strength(&self, node: usize) -> f64 {
        self.counts
            .iter()
            .filter(|(&(i, j), _)| i == node || j == node)
            .map(|(_, &v)| v)
            .sum()
    }

    /// Applies `f` to every observed count, preserving the mask.
    pub fn map_counts(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            n_nodes: self.n_nodes,
            symmetric: self.symmetric,
            counts: self.counts.iter().map(|(&c, &v)| (c, f(v))).collect(),
        }
    }

    /// Sub-matrix over `nodes`, with node `nodes[k]` remapped to index `k`.
    /// Only cells whose both endpoints are in `nodes` are retained.
    pub fn restricted(&self, nodes: &[usize]) -> Result<Self> {
        let mut position = vec![None; self.n_nodes];
        for (k, &node) in nodes.iter().enumerate() {
            if node >= self.n_nodes {
                return Err(CoreError::IndexOutOfRange {
                    index: node,
                    n_nodes: self.n_nodes,
                });
            }
            position[node] = Some(k);
        }
        let mut sub = CountMatrix::new(nodes.len(), self.symmetric);
        for (&(i, j), &v) in &self.counts {
            if let (Some(a), Some(b)) = (position[i], position[j]) {
                sub.observe(a, b, v)?;
            }
        }
        Ok(sub)
    }

    /// Checks that all counts are integer-valued, as required for raw data
    /// and unit-level holdout thinning.
    pub fn validate_integer_counts(&self) -> Result<()> {
        for &v in self.counts.values() {
            if v.fract() != 0.0 {
                return Err(CoreError::NonIntegerCount(v));
            }
        }
        Ok(())
    }
}
