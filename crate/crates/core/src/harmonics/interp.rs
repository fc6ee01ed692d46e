//! Minimal-norm interpolation of weighted sequences by functions on `(0, eps)`
//! whose moments against selected eigenfunctions are prescribed.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::{weighted_gram, PseudoInverse, FEASIBILITY_TOL, SV_CUTOFF};
use crate::error::{invalid, Error, Result};
use crate::inverse::{solver_steps, IndexSet};
use crate::quad::gregory_weights;
use crate::sl::{march_uniform, EigenSolver};
use crate::Potential;

const MIN_CELLS: usize = 1024;

/// Finite sequence `c_k` attached to the first indices `p_k` of a set `P`,
/// normed by `sum p_k^2 |c_k|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceLP {
    entries: Vec<f64>,
    indices: IndexSet,
}

impl SequenceLP {
    pub fn new(entries: Vec<f64>, indices: IndexSet) -> Result<Self> {
        if entries.is_empty() {
            return invalid("sequence has no entries");
        }
        if entries.len() > indices.len() {
            return invalid(format!(
                "{} entries but the index set has only {} elements",
                entries.len(),
                indices.len()
            ));
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return invalid("sequence has non-finite entries");
        }
        Ok(Self { entries, indices })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `p_k` for the stored entries.
    pub fn weights(&self) -> &[usize] {
        &self.indices.indices()[..self.entries.len()]
    }

    pub fn inner(&self, other: &SequenceLP) -> Result<f64> {
        if self.indices != other.indices || self.len() != other.len() {
            return invalid("sequences live on different index sets");
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .zip(self.weights())
            .map(|((a, b), &p)| (p * p) as f64 * a * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .zip(self.weights())
            .map(|(c, &p)| (p as f64 * c).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return invalid("cannot normalize the zero sequence");
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|c| a * c).collect(),
            indices: self.indices.clone(),
        }
    }

    /// `a self + b other`.
    pub fn combine(&self, a: f64, other: &SequenceLP, b: f64) -> Result<Self> {
        if self.indices != other.indices || self.len() != other.len() {
            return invalid("sequences live on different index sets");
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            indices: self.indices.clone(),
        })
    }

    pub fn truncated(&self, k: usize) -> Result<Self> {
        Self::new(
            self.entries[..k.min(self.len())].to_vec(),
            self.indices.clone(),
        )
    }
}

/// Interpolating function on the uniform grid of `[0, eps]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpolant {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// `|int f phi_{p_k} - c_k|` per constraint.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub norm_l2: f64,
    /// `||f||_{L^2(0, eps)} / ||c||`.
    pub witness: f64,
}

#[derive(Debug, Serialize)]
struct InterpRow {
    x: f64,
    value: f64,
}

impl Interpolant {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        crate::io::write_rows(
            w,
            self.x
                .iter()
                .zip(&self.values)
                .map(|(&x, &value)| InterpRow { x, value }),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Gram factorization of `{phi_{p_k}}` restricted to `(0, eps)`, shared by
/// every sequence interpolated on the same index set.
#[derive(Debug, Clone)]
pub struct LpInterpolator {
    indices: Vec<usize>,
    epsilon: f64,
    x: Vec<f64>,
    phis: Vec<Vec<f64>>,
    gram: DMatrix<f64>,
    pinv: PseudoInverse<f64>,
    /// `|P ∩ (0, r)| / r` at `r = max(P) + 1` for the retained indices.
    pub density_estimate: f64,
    pub warnings: Vec<String>,
}

impl LpInterpolator {
    pub fn new(p: &IndexSet, epsilon: f64, v: &Potential, k_trunc: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        if k_trunc == 0 || k_trunc > p.len() {
            return invalid(format!(
                "truncation {k_trunc} must lie in 1..={} (size of the index set)",
                p.len()
            ));
        }
        let indices = p.indices()[..k_trunc].to_vec();
        let top = indices[k_trunc - 1];
        let solver = EigenSolver::with_steps(v, solver_steps(v.cells(), top))?;
        let lambdas: Vec<f64> = indices
            .par_iter()
            .map(|&k| solver.eigenvalue(k))
            .collect::<Result<_>>()?;
        let w_max = (lambdas[k_trunc - 1].abs() + v.sup_bound()).sqrt();
        let cells =
            ((16.0 * w_max * epsilon / std::f64::consts::PI).ceil() as usize).max(MIN_CELLS);
        let h = epsilon / cells as f64;
        let x: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        let weights: Vec<f64> = gregory_weights(cells).into_iter().map(|w| w * h).collect();
        let phis: Vec<Vec<f64>> = lambdas
            .par_iter()
            .map(|&l| {
                let mut y = vec![0.0; cells + 1];
                march_uniform(v, l, epsilon, cells, |j, _, a, _| y[j] = a)?;
                Ok(y)
            })
            .collect::<Result<_>>()?;
        let gram = weighted_gram(&phis, &weights);
        let pinv = PseudoInverse::new(gram.clone(), SV_CUTOFF)?;
        let density_estimate = IndexSet::new(indices.clone())?.upper_density_estimate();
        let mut warnings = Vec::new();
        if density_estimate >= epsilon {
            warnings.push(format!(
                "density estimate {density_estimate:.4} of the retained indices is not below epsilon {epsilon}"
            ));
        }
        Ok(Self {
            indices,
            epsilon,
            x,
            phis,
            gram,
            pinv,
            density_estimate,
            warnings,
        })
    }

    pub fn truncation(&self) -> usize {
        self.indices.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rank(&self) -> usize {
        self.pinv.rank
    }

    /// Ratio of the largest to the smallest retained Gram singular value.
    pub fn condition(&self) -> f64 {
        self.pinv.sigma_max / self.pinv.sigma_kept
    }

    pub fn apply(&self, c: &SequenceLP) -> Result<Interpolant> {
        let k = self.truncation();
        if c.len() < k || c.weights()[..k] != self.indices[..] {
            return invalid(format!(
                "sequence must carry entries for the first {k} indices of the set"
            ));
        }
        let b = DVector::from_column_slice(&c.entries()[..k]);
        let d = self.pinv.solve(&b);
        let res = &self.gram * &d - &b;
        let residuals: Vec<f64> = res.iter().map(|r| r.abs()).collect();
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        if max_residual > FEASIBILITY_TOL {
            return Err(Error::Infeasible(format!(
                "constraint residual {max_residual:.3e} at Gram rank {} of {k}",
                self.rank()
            )));
        }
        let mut values = vec![0.0; self.x.len()];
        for (phi, dk) in self.phis.iter().zip(d.iter()) {
            for (v, p) in values.iter_mut().zip(phi) {
                *v += dk * p;
            }
        }
        let norm_l2 = d.dot(&(&self.gram * &d)).max(0.0).sqrt();
        let cn = c.truncated(k)?.norm();
        Ok(Interpolant {
            x: self.x.clone(),
            values,
            residuals,
            max_residual,
            norm_l2,
            witness: if cn > 0.0 { norm_l2 / cn } else { 0.0 },
        })
    }
}

/// `L c` for the first `k_trunc` constraints.
pub fn interpolate_lp(
    c: &SequenceLP,
    p: &IndexSet,
    epsilon: f64,
    v: &Potential,
    k_trunc: usize,
) -> Result<Interpolant> {
    LpInterpolator::new(p, epsilon, v, k_trunc)?.apply(c)
}
