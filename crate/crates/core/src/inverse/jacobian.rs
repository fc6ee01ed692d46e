use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{solver_steps, IndexSet};
use crate::error::{invalid, Result};
use crate::quad::Hermite;
use crate::sl::{shoot, EigenSolver, InterpRule};
use crate::Potential;

const GL3_X: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
const GL3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// `int phi^2 b_i dx` for every sample basis function `b_i` of the potential
/// grid (hats for linear interpolation, cell indicators for constant), with
/// `phi` the cubic Hermite interpolant of the eigenfunction on the solver grid.
fn squared_weights(v: &Potential, phi: &[f64], dphi: &[f64]) -> (Vec<f64>, f64) {
    let cells = v.cells();
    let ns = phi.len() - 1;
    let he = Hermite::new(phi, dphi);
    let hs = 1.0 / ns as f64;
    let mut w = vec![0.0; cells + 1];
    let mut norm = 0.0;
    for c in 0..ns {
        for q in 0..3 {
            let t = GL3_X[q];
            let x = (c as f64 + t) * hs;
            let p = he.eval_local(c, t);
            let val = p * p * GL3_W[q] * hs;
            norm += val;
            let s = x * cells as f64;
            let i = (s.floor() as usize).min(cells - 1);
            match v.rule() {
                InterpRule::PiecewiseLinear => {
                    let u = s - i as f64;
                    w[i] += val * (1.0 - u);
                    w[i + 1] += val * u;
                }
                InterpRule::PiecewiseConstant => w[i] += val,
            }
        }
    }
    (w, norm)
}

/// Derivatives of `(lambda_k)_{k in S}` followed by `(phi_k'(1))_{k in S}` along
/// sample-space directions (each of length `cells + 1`).
///
/// Eigenvalue rows use `d lambda = int phi^2 dV / ||phi||^2`; derivative rows
/// use central differences of step `1e-4 (1 + sup|V|)` with warm-started
/// eigenvalue refinement.
pub fn jacobian_along(
    v: &Potential,
    s: &IndexSet,
    k_max: usize,
    directions: &[Vec<f64>],
) -> Result<DMatrix<f64>> {
    let n = v.cells() + 1;
    if directions.iter().any(|d| d.len() != n) {
        return invalid(format!("directions must have {n} entries"));
    }
    if s.is_empty() {
        return invalid("index set is empty");
    }
    let steps = solver_steps(v.cells(), k_max);
    let solver = EigenSolver::with_steps(v, steps)?;
    let pairs = s
        .indices()
        .par_iter()
        .map(|&k| solver.pair(k))
        .collect::<Result<Vec<_>>>()?;
    for w in pairs.windows(2) {
        if w[1].lambda - w[0].lambda <= 1e-10 * w[1].lambda.abs().max(1.0) {
            return Err(crate::Error::EigenvalueCollision {
                first: w[0].index,
                second: w[1].index,
            });
        }
    }
    let rows = s.len();
    let cols = directions.len();
    let mut jac = DMatrix::zeros(2 * rows, cols);
    let lam_rows: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|p| {
            let (w, norm) = squared_weights(v, &p.phi, &p.dphi);
            directions
                .iter()
                .map(|d| d.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / norm)
                .collect()
        })
        .collect();
    for (r, row) in lam_rows.iter().enumerate() {
        for (c, val) in row.iter().enumerate() {
            jac[(r, c)] = *val;
        }
    }

    let h = 1e-4 * (1.0 + v.sup_bound());
    let fd_cols: Vec<Vec<f64>> = directions
        .par_iter()
        .enumerate()
        .map(|(c, d)| -> Result<Vec<f64>> {
            let mut ends = [vec![0.0; rows], vec![0.0; rows]];
            for (slot, sign) in [(0usize, 1.0), (1usize, -1.0)] {
                let vp = v.map_samples(|i, x| x + sign * h * d[i])?;
                let sp = EigenSolver::with_steps(&vp, steps)?;
                for (r, p) in pairs.iter().enumerate() {
                    let guess = p.lambda + sign * h * lam_rows[r][c];
                    let width = 1e-7 * p.lambda.abs().max(1.0) + 1e-2 * h;
                    let l = sp.refine(p.index, guess, width)?;
                    ends[slot][r] = shoot(&vp, l, 1.0, steps)?.1;
                }
            }
            Ok((0..rows)
                .map(|r| (ends[0][r] - ends[1][r]) / (2.0 * h))
                .collect())
        })
        .collect::<Result<_>>()?;
    for (c, col) in fd_cols.iter().enumerate() {
        for (r, val) in col.iter().enumerate() {
            jac[(rows + r, c)] = *val;
        }
    }
    Ok(jac)
}

/// Jacobian with respect to every potential sample.
pub fn sample_jacobian(v: &Potential, s: &IndexSet, k_max: usize) -> Result<DMatrix<f64>> {
    let n = v.cells() + 1;
    let dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    jacobian_along(v, s, k_max, &dirs)
}

/// Sample Jacobian with data up to `max(S)`.
pub fn jacobian(v: &Potential, s: &IndexSet) -> Result<DMatrix<f64>> {
    sample_jacobian(v, s, s.max().unwrap_or(1))
}
