//! Recovery of `V` on `[0, 1 - eps)` from eigenvalues and endpoint derivatives
//! indexed by a set `S`, given `V` on `[1 - eps, 1]`.

mod jacobian;
mod problem;
mod reconstruct;

pub use jacobian::{jacobian, jacobian_along, sample_jacobian};
pub use problem::{Parametrization, ReconstructionProblem, ReconstructionReport, Tail};
pub use reconstruct::reconstruct;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sl::{resolved_steps, EigenSolver, SpectralDatum};
use crate::Potential;

/// Sorted, duplicate-free set of positive eigen indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = crate::Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.indices
    }
}

impl IndexSet {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return invalid("eigen indices are 1-based");
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { indices })
    }

    /// `{lo, ..., hi}`.
    pub fn range(lo: usize, hi: usize) -> Result<Self> {
        Self::new((lo..=hi).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }

    /// `|S ∩ (0, r)| / r`.
    pub fn density_at(&self, r: f64) -> f64 {
        self.indices.iter().filter(|&&k| (k as f64) < r).count() as f64 / r
    }

    /// Density evaluated at the largest available radius, `max(S) + 1`.
    pub fn upper_density_estimate(&self) -> f64 {
        match self.max() {
            Some(m) => self.density_at(m as f64 + 1.0),
            None => 0.0,
        }
    }
}

/// Solver step count for data up to index `k_max` on a potential with `cells` cells.
pub fn solver_steps(cells: usize, k_max: usize) -> usize {
    resolved_steps(cells, (k_max as f64 + 2.0) * std::f64::consts::PI)
}

/// `(lambda_k, phi_k'(1))` for `k` in `S`.
pub fn forward_data(v: &Potential, s: &IndexSet, k_max: usize) -> Result<Vec<SpectralDatum>> {
    let Some(top) = s.max() else {
        return invalid("index set is empty");
    };
    if top > k_max {
        return invalid(format!("max(S) = {top} exceeds K_max = {k_max}"));
    }
    let solver = EigenSolver::with_steps(v, solver_steps(v.cells(), k_max))?;
    s.indices()
        .par_iter()
        .map(|&k| Ok(solver.pair(k)?.datum()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub agree: bool,
    /// Index with the largest normalized deviation.
    pub worst_index: usize,
    pub worst_deviation: f64,
}

/// Checks `lambda_k` (relative to `max(1, |lambda|)`) and `phi_k'(1)` (absolute)
/// agreement on `S` within `tol`.
pub fn data_agreement_certificate(
    v1: &Potential,
    v2: &Potential,
    s: &IndexSet,
    tol: f64,
) -> Result<Certificate> {
    let k_max = s.max().unwrap_or(1);
    let a = forward_data(v1, s, k_max)?;
    let b = forward_data(v2, s, k_max)?;
    let mut worst = (0usize, 0.0f64);
    for (x, y) in a.iter().zip(&b) {
        let dl = (x.lambda - y.lambda).abs() / x.lambda.abs().max(1.0);
        let dd = (x.dphi_at_1 - y.dphi_at_1).abs();
        let d = dl.max(dd);
        if d > worst.1 || worst.0 == 0 {
            worst = (x.index, d);
        }
    }
    Ok(Certificate {
        agree: worst.1 <= tol,
        worst_index: worst.0,
        worst_deviation: worst.1,
    })
}
