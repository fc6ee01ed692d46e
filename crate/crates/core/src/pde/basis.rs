use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::quad::{gregory_weights, quintic_cell};
use crate::sl::{resolved_steps, shoot, EigenSolver, InterpRule};
use crate::{Eigen, Potential};

/// The first `K` Dirichlet eigenpairs together with the potential grid on
/// which inner products are taken.
///
/// The solver grid may be a refinement of the potential grid; eigenfunctions
/// are then read at every `stride`-th node.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    potential: Potential,
    pairs: Vec<Eigen>,
    weights: Vec<f64>,
    stride: usize,
}

impl ModalBasis {
    /// Solver grid refined until the highest mode is resolved.
    pub fn new(v: &Potential, k: usize) -> Result<Self> {
        let steps = resolved_steps(v.cells(), (k as f64 + 2.0) * std::f64::consts::PI);
        Self::with_steps(v, k, steps)
    }

    pub fn with_steps(v: &Potential, k: usize, steps: usize) -> Result<Self> {
        if k == 0 {
            return invalid("mode count must be at least 1");
        }
        if steps % v.cells() != 0 {
            return invalid("solver grid must refine the potential grid");
        }
        let pairs = EigenSolver::with_steps(v, steps)?.pairs(k)?;
        Ok(Self {
            potential: v.clone(),
            pairs,
            weights: gregory_weights(v.cells()),
            stride: steps / v.cells(),
        })
    }

    pub fn modes(&self) -> usize {
        self.pairs.len()
    }

    pub fn cells(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn pairs(&self) -> &[Eigen] {
        &self.pairs
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    /// `phi_j` on the potential grid (`j` is 0-based).
    pub fn phi(&self, j: usize) -> Vec<f64> {
        self.pairs[j]
            .phi
            .iter()
            .step_by(self.stride)
            .copied()
            .collect()
    }

    /// `(f, phi_j)` by the fourth-order Gregory rule on the potential grid.
    pub fn inner(&self, j: usize, f: &[f64]) -> f64 {
        let phi = &self.pairs[j].phi;
        let s: f64 = (0..self.weights.len())
            .map(|i| self.weights[i] * f[i] * phi[i * self.stride])
            .sum();
        s / self.cells() as f64
    }

    pub fn inner_all(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.cells() + 1 {
            return invalid("function must be sampled on the potential grid");
        }
        Ok((0..self.modes())
            .into_par_iter()
            .map(|j| self.inner(j, f))
            .collect())
    }

    /// Expansion coefficients `(f, phi_k) / ||phi_k||^2`.
    pub fn coeffs(&self, f: &[f64]) -> Result<Vec<f64>> {
        let ip = self.inner_all(f)?;
        Ok(ip
            .iter()
            .zip(&self.pairs)
            .map(|(a, p)| a / p.norm_sq)
            .collect())
    }

    /// `int_0^delta phi_j`; see [`head_integral`].
    pub fn head_integral(&self, j: usize, delta: f64) -> Result<f64> {
        let p = &self.pairs[j];
        head_integral(&self.potential, p.lambda, &p.phi, &p.dphi, delta)
    }

    /// `sum_k c_k phi_k` on the potential grid.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cells() + 1];
        for (ck, p) in c.iter().zip(&self.pairs) {
            for (i, o) in out.iter_mut().enumerate() {
                *o += ck * p.phi[i * self.stride];
            }
        }
        out
    }
}

fn cell_potential(v: &Potential, x0: f64, x1: f64) -> (f64, f64) {
    match v.rule() {
        InterpRule::PiecewiseLinear => (v.eval(x0), v.eval(x1)),
        InterpRule::PiecewiseConstant => {
            let m = v.eval(0.5 * (x0 + x1));
            (m, m)
        }
    }
}

/// `int_0^delta y` for a solution of `-y'' + V y = lambda y` sampled with its
/// slope on a uniform grid.
///
/// Each cell uses the quintic Hermite rule with `y'' = (V - lambda) y`; a
/// partial last cell takes its end state from a shot to `x = delta`.
pub fn head_integral(v: &Potential, lambda: f64, y: &[f64], dy: &[f64], delta: f64) -> Result<f64> {
    let steps = y.len() - 1;
    if dy.len() != y.len() || steps % v.cells() != 0 {
        return invalid("solution must be sampled on a refinement of the potential grid");
    }
    let delta = delta.clamp(0.0, 1.0);
    let h = 1.0 / steps as f64;
    let q = delta / h;
    let m = if (q - q.round()).abs() < 1e-9 {
        q.round() as usize
    } else {
        q.floor() as usize
    };
    let mut total = 0.0;
    for i in 0..m.min(steps) {
        let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
        let (v0, v1) = cell_potential(v, x0, x1);
        total += quintic_cell(
            h,
            (y[i], y[i + 1]),
            (dy[i], dy[i + 1]),
            ((v0 - lambda) * y[i], (v1 - lambda) * y[i + 1]),
        );
    }
    let x0 = m as f64 * h;
    let rest = delta - x0;
    if m < steps && rest > 1e-12 * h {
        let (ye, dye) = shoot(v, lambda, delta, steps)?;
        let (v0, v1) = cell_potential(v, x0, delta);
        total += quintic_cell(
            rest,
            (y[m], ye),
            (dy[m], dye),
            ((v0 - lambda) * y[m], (v1 - lambda) * ye),
        );
    }
    Ok(total)
}

/// Fourth-order finite-difference second derivative on the uniform grid of `[0, 1]`.
pub fn second_derivative(f: &[f64]) -> Result<Vec<f64>> {
    let n = f.len() - 1;
    if n < 6 {
        return invalid("second derivative needs at least 7 samples");
    }
    let h2 = (1.0 / n as f64).powi(2);
    let mut d = vec![0.0; n + 1];
    let edge = |g: &dyn Fn(usize) -> f64| {
        (
            (45.0 * g(0) - 154.0 * g(1) + 214.0 * g(2) - 156.0 * g(3) + 61.0 * g(4) - 10.0 * g(5))
                / (12.0 * h2),
            (10.0 * g(0) - 15.0 * g(1) - 4.0 * g(2) + 14.0 * g(3) - 6.0 * g(4) + g(5))
                / (12.0 * h2),
        )
    };
    let (d0, d1) = edge(&|i| f[i]);
    let (dn, dn1) = edge(&|i| f[n - i]);
    d[0] = d0;
    d[1] = d1;
    d[n] = dn;
    d[n - 1] = dn1;
    for i in 2..n - 1 {
        d[i] =
            (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h2);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn second_derivative_is_fourth_order() {
        let err = |n: usize| {
            let f: Vec<f64> = (0..=n).map(|i| (2.0 * i as f64 / n as f64).exp()).collect();
            let d = second_derivative(&f).unwrap();
            d.iter()
                .enumerate()
                .map(|(i, v)| (v - 4.0 * (2.0 * i as f64 / n as f64).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn free_basis_coefficients() {
        let v = Potential::zero(512).unwrap();
        let b = ModalBasis::new(&v, 6).unwrap();
        let f: Vec<f64> = (0..=512)
            .map(|i| (3.0 * PI * i as f64 / 512.0).sin())
            .collect();
        let c = b.coeffs(&f).unwrap();
        for (j, cj) in c.iter().enumerate() {
            let want = if j == 2 { 3.0 * PI } else { 0.0 };
            assert!((cj - want).abs() < 1e-8, "{j}: {cj}");
        }
        // int_0^{1/2} sin(2 pi x) / (2 pi) = 1 / (2 pi^2)
        assert!((b.head_integral(1, 0.5).unwrap() - 0.5 / (PI * PI)).abs() < 1e-12);
        // off-grid end: (1 - cos(2 pi / 3)) / (2 pi)^2
        let want = 1.5 / (4.0 * PI * PI);
        assert!((b.head_integral(1, 1.0 / 3.0).unwrap() - want).abs() < 1e-12);
        let back = b.synthesize(&c);
        assert!(back.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-8));
    }
}
