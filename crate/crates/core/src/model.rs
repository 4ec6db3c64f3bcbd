//! The generative model's deterministic math: softplus, the bilinear
//! unnormalized mass function over node representations, and normalized
//! interaction probabilities.

use ndarray::{Array2, ArrayView2};

use crate::count_matrix::Cell;
use crate::error::{CoreError, Result};

/// Overflow-safe softplus, `log(1 + exp(x))`.
///
/// Uses `x + log1p(exp(-x))` above the crossover so large arguments do not
/// overflow `exp`.
pub fn softplus(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(CoreError::NonFinite(x));
    }
    Ok(softplus_raw(x))
}

#[inline]
pub(crate) fn softplus_raw(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Which prior generated the node representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    Crp,
    Gaussian,
}

/// Model hyperparameters. All values must be strictly positive.
#[derive(Debug, Clone)]
pub struct Hyperparams {
    /// CRP concentration.
    pub alpha_crp: f64,
    /// Variance of the Gaussian prior on node representation components.
    pub sigma_z_sq: f64,
    /// Variance of the Gaussian prior on weight-matrix entries.
    pub sigma_w_sq: f64,
    /// Total smoothing mass spread over seen node pairings.
    pub alpha_dcm: f64,
    /// Fixed representation dimension for the Gaussian prior.
    pub d_gaussian: usize,
    /// Monte Carlo draws when estimating the likelihood of a fresh class.
    pub mc_new_class_samples: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha_crp: 1.0,
            sigma_z_sq: 1.0,
            sigma_w_sq: 1.0,
            alpha_dcm: 1.0,
            d_gaussian: 2,
            mc_new_class_samples: 10,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("alpha_crp", self.alpha_crp),
            ("sigma_z_sq", self.sigma_z_sq),
            ("sigma_w_sq", self.sigma_w_sq),
            ("alpha_dcm", self.alpha_dcm),
        ];
        for (name, v) in positives {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if self.d_gaussian < 1 {
            return Err(CoreError::InvalidArgument("d_gaussian must be >= 1".into()));
        }
        if self.mc_new_class_samples < 1 {
            return Err(CoreError::InvalidArgument(
                "mc_new_class_samples must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Latent representations of all nodes (columns of `z`, d-by-n) together
/// with the d-by-d weight matrix. CRP states carry the class assignment of
/// every node and keep `z` 1-of-K coded in agreement with it.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    z: Array2<f64>,
    w: Array2<f64>,
    prior_kind: PriorKind,
    crp_assignments: Option<Vec<usize>>,
}

impl LatentState {
    pub fn gaussian(z: Array2<f64>, w: Array2<f64>) -> Result<Self> {
        let d = z.nrows();
        if d == 0 || z.ncols() == 0 {
            return Err(CoreError::InvalidState(
                "z must be d x n with d >= 1, n >= 1".into(),
            ));
        }
        if w.nrows() != d || w.ncols() != d {
            return Err(CoreError::InvalidState(format!(
                "w must be {d} x {d}, got {} x {}",
                w.nrows(),
                w.ncols()
            )));
        }
        if z.iter().chain(w.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidState("non-finite entries".into()));
        }
        Ok(Self {
            z,
            w,
            prior_kind: PriorKind::Gaussian,
            crp_assignments: None,
        })
    }

    /// Builds a CRP state from class assignments; classes must be compact
    /// (every label in `0..K` occupied). `w` must be K-by-K.
    pub fn crp(assignments: Vec<usize>, w: Array2<f64>) -> Result<Self> {
        if assignments.is_empty() {
            return Err(CoreError::InvalidState("no nodes".into()));
        }
        let k = assignments.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        if sizes.contains(&0) {
            return Err(CoreError::InvalidState(
                "class labels are not compact".into(),
            ));
        }
        if w.nrows() != k || w.ncols() != k {
            return Err(CoreError::InvalidState(format!(
                "w must be {k} x {k}, got {} x {}",
                w.nrows(),
                w.ncols()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidState("non-finite entries".into()));
        }
        let mut z = Array2::zeros((k, assignments.len()));
        for (node, &class) in assignments.iter().enumerate() {
            z[[class, node]] = 1.0;
        }
        Ok(Self {
            z,
            w,
            prior_kind: PriorKind::Crp,
            crp_assignments: Some(assignments),
        })
    }

    pub fn d(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.z.ncols()
    }

    pub fn z(&self) -> ArrayView2<'_, f64> {
        self.z.view()
    }

    pub fn w(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }

    pub fn prior_kind(&self) -> PriorKind {
        self.prior_kind
    }

    pub fn assignments(&self) -> Option<&[usize]> {
        self.crp_assignments.as_deref()
    }

    /// The bilinear form `Z_i' W Z_j`. For CRP states this reduces to a
    /// single weight-matrix lookup because columns are 1-of-K coded.
    #[inline]
    pub fn bilinear(&self, i: usize, j: usize) -> f64 {
        match &self.crp_assignments {
            Some(assign) => self.w[[assign[i], assign[j]]],
            None => {
                let zi = self.z.column(i);
                let zj = self.z.column(j);
                let d = self.z.nrows();
                let mut total = 0.0;
                for r in 0..d {
                    let mut row_dot = 0.0;
                    for c in 0..d {
                        row_dot += self.w[[r, c]] * zj[c];
                    }
                    total += zi[r] * row_dot;
                }
                total
            }
        }
    }

    fn check_node(&self, index: usize) -> Result<()> {
        if index >= self.n_nodes() {
            return Err(CoreError::IndexOutOfRange {
                index,
                n_nodes: self.n_nodes(),
            });
        }
        Ok(())
    }

    pub(crate) fn set_w_entry(&mut self, row: usize, col: usize, value: f64) {
        self.w[[row, col]] = value;
    }

    pub(crate) fn set_z_entry(&mut self, component: usize, node: usize, value: f64) {
        debug_assert_eq!(self.prior_kind, PriorKind::Gaussian);
        self.z[[component, node]] = value;
    }

    /// Reseats `node` at `class`, keeping the 1-of-K column in sync.
    pub(crate) fn set_crp_class(&mut self, node: usize, class: usize) {
        let assign = self
            .crp_assignments
            .as_mut()
            .expect("set_crp_class on a non-CRP state");
        let old = assign[node];
        self.z[[old, node]] = 0.0;
        self.z[[class, node]] = 1.0;
        assign[node] = class;
    }

    /// Removes (empty) class `class`: labels above it shift down by one and
    /// the matching row/column of `w` and row of `z` are dropped.
    pub(crate) fn remove_crp_class(&mut self, class: usize) {
        let k = self.d();
        debug_assert!(class < k);
        let assign = self
            .crp_assignments
            .as_mut()
            .expect("remove_crp_class on a non-CRP state");
        debug_assert!(assign.iter().all(|&a| a != class));
        for a in assign.iter_mut() {
            if *a > class {
                *a -= 1;
            }
        }
        let keep: Vec<usize> = (0..k).filter(|&r| r != class).collect();
        self.z = self.z.select(ndarray::Axis(0), &keep);
        self.w = self
            .w
            .select(ndarray::Axis(0), &keep)
            .select(ndarray::Axis(1), &keep);
    }

    /// Appends class `K` with the given weight row/column. `new_row` holds
    /// `w[K, 0..K]`, `new_col` holds `w[0..K, K]`, and `corner` is `w[K, K]`.
    pub(crate) fn add_crp_class(&mut self, new_row: &[f64], new_col: &[f64], corner: f64) {
        let k = self.d();
        debug_assert_eq!(new_row.len(), k);
        debug_assert_eq!(new_col.len(), k);
        let mut w = Array2::zeros((k + 1, k + 1));
        w.slice_mut(ndarray::s![..k, ..k]).assign(&self.w);
        for (c, &v) in new_row.iter().enumerate() {
            w[[k, c]] = v;
        }
        for (r, &v) in new_col.iter().enumerate() {
            w[[r, k]] = v;
        }
        w[[k, k]] = corner;
        self.w = w;
        let mut z = Array2::zeros((k + 1, self.n_nodes()));
        z.slice_mut(ndarray::s![..k, ..]).assign(&self.z);
        self.z = z;
    }

    /// Appends a node drawn column (Gaussian states only).
    pub(crate) fn append_gaussian_node(&mut self, column: &[f64]) {
        debug_assert_eq!(self.prior_kind, PriorKind::Gaussian);
        debug_assert_eq!(column.len(), self.d());
        let n = self.n_nodes();
        let mut z = Array2::zeros((self.d(), n + 1));
        z.slice_mut(ndarray::s![.., ..n]).assign(&self.z);
        for (r, &v) in column.iter().enumerate() {
            z[[r, n]] = v;
        }
        self.z = z;
    }

    /// Appends a node seated at an existing `class` (CRP states only).
    pub(crate) fn append_crp_node(&mut self, class: usize) {
        debug_assert!(class < self.d());
        let n = self.n_nodes();
        let mut z = Array2::zeros((self.d(), n + 1));
        z.slice_mut(ndarray::s![.., ..n]).assign(&self.z);
        z[[class, n]] = 1.0;
        self.z = z;
        self.crp_assignments
            .as_mut()
            .expect("append_crp_node on a non-CRP state")
            .push(class);
    }

    /// Rebuilds the state with node `k` taken from column `positions[k]`.
    pub(crate) fn reorder_nodes(&self, positions: &[usize]) -> Self {
        let n = self.n_nodes();
        debug_assert_eq!(positions.len(), n);
        let mut z = Array2::zeros((self.d(), n));
        for (node, &pos) in positions.iter().enumerate() {
            z.column_mut(node).assign(&self.z.column(pos));
        }
        let crp_assignments = self
            .crp_assignments
            .as_ref()
            .map(|a| positions.iter().map(|&pos| a[pos]).collect());
        Self {
            z,
            w: self.w.clone(),
            prior_kind: self.prior_kind,
            crp_assignments,
        }
    }

    /// Relabels CRP classes by order of first appearance, permuting `w`
    /// consistently; identity for Gaussian states. Leaves every bilinear
    /// form unchanged.
    pub fn canonicalized(&self) -> Self {
        let Some(assign) = &self.crp_assignments else {
            return self.clone();
        };
        let k = self.d();
        let mut relabel = vec![usize::MAX; k];
        let mut next = 0;
        for &a in assign {
            if relabel[a] == usize::MAX {
                relabel[a] = next;
                next += 1;
            }
        }
        debug_assert_eq!(next, k);
        let new_assign: Vec<usize> = assign.iter().map(|&a| relabel[a]).collect();
        let mut w = Array2::zeros((k, k));
        for r in 0..k {
            for c in 0..k {
                w[[relabel[r], relabel[c]]] = self.w[[r, c]];
            }
        }
        Self::crp(new_assign, w).expect("relabeling preserves validity")
    }
}

/// `softplus(Z_i' W Z_j)`, the unnormalized interaction mass of one cell.
pub fn pmf_cell(state: &LatentState, i: usize, j: usize) -> Result<f64> {
    state.check_node(i)?;
    state.check_node(j)?;
    Ok(softplus_raw(state.bilinear(i, j)))
}

/// Element-wise `pmf_cell` over `cells`, in input order.
pub fn pmf_matrix(state: &LatentState, cells: &[Cell]) -> Result<Vec<f64>> {
    cells
        .iter()
        .map(|&(i, j)| pmf_cell(state, i, j))
        .collect()
}

/// Normalized probability of cell `(i, j)` among `cells`:
/// `pmf(i, j) / sum over cells of pmf`. No smoothing is applied here.
pub fn interaction_prob(state: &LatentState, i: usize, j: usize, cells: &[Cell]) -> Result<f64> {
    if cells.is_empty() {
        return Err(CoreError::EmptyCells);
    }
    if !cells.contains(&(i, j)) {
        return Err(CoreError::CellNotInList(i, j));
    }
    let mut total = 0.0;
    for &(a, b) in cells {
        total += pmf_cell(state, a, b)?;
    }
    Ok(pmf_cell(state, i, j)? / total)
}
