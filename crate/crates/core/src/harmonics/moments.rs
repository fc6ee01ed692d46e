//! Gram assembly and cutoff pseudo-inverses shared by the moment solvers.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, SVD};
use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Relative singular-value cutoff applied to every Gram and least-squares system.
pub const SV_CUTOFF: f64 = 1e-10;
/// Largest constraint residual accepted before a truncated problem is declared infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

pub(crate) trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync {}
impl<T: ComplexField<RealField = f64> + Copy + Send + Sync> Scalar for T {}

/// `G_ij = sum_q w_q a_i(q) conj(a_j(q))`, with rows of the upper triangle
/// computed in parallel.
pub(crate) fn weighted_gram<T: Scalar>(samples: &[Vec<T>], weights: &[f64]) -> DMatrix<T> {
    let n = samples.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let mut acc = T::zero();
                    for ((a, b), w) in samples[i].iter().zip(&samples[j]).zip(weights) {
                        acc += *a * b.conjugate() * T::from_real(*w);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, val) in row.into_iter().enumerate() {
            let j = i + off;
            g[(i, j)] = val;
            g[(j, i)] = val.conjugate();
        }
    }
    g
}

/// Thin SVD with singular values below `cutoff * sigma_max` discarded.
#[derive(Debug, Clone)]
pub(crate) struct PseudoInverse<T: Scalar> {
    svd: SVD<T, Dyn, Dyn>,
    threshold: f64,
    pub rank: usize,
    pub sigma_max: f64,
    /// Smallest singular value kept.
    pub sigma_kept: f64,
}

impl<T: Scalar> PseudoInverse<T> {
    pub fn new(a: DMatrix<T>, cutoff: f64) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return invalid("system matrix has non-finite entries");
        }
        let svd = a.svd(true, true);
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
        if sigma_max == 0.0 {
            return invalid("system matrix is identically zero");
        }
        let threshold = cutoff * sigma_max;
        let kept: Vec<f64> = svd
            .singular_values
            .iter()
            .copied()
            .filter(|s| *s > threshold)
            .collect();
        Ok(Self {
            rank: kept.len(),
            sigma_kept: kept.iter().fold(f64::INFINITY, |m, s| m.min(*s)),
            svd,
            threshold,
            sigma_max,
        })
    }

    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        self.svd
            .solve(b, self.threshold)
            .expect("singular vectors were requested")
    }
}
