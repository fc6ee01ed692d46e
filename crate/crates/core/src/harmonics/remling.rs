//! Discrete transmutation map matching sine-transform data of the constant
//! potential `-tau` to `psi`-transform data of a given potential on `(0, delta)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::{PseudoInverse, SV_CUTOFF};
use crate::error::{invalid, Error, Result};
use crate::sl::march_uniform;
use crate::Potential;

/// z-grid points required per unknown.
pub const Z_OVERSAMPLING: usize = 4;

/// `sin(sqrt(w) x) / sqrt(w)` continued through `w <= 0`.
fn sine_kernel(w: f64, x: f64) -> f64 {
    if w > 0.0 {
        let s = w.sqrt();
        (s * x).sin() / s
    } else if w < 0.0 {
        let s = (-w).sqrt();
        (s * x).sinh() / s
    } else {
        x
    }
}

/// `z_j = -tau + ((M pi)^2 + tau) (j / (count - 1))^2`, uniform in momentum.
pub fn momentum_z_grid(tau: f64, modes: usize, count: usize) -> Vec<f64> {
    let top = (modes as f64 * PI).powi(2) + tau;
    (0..count)
        .map(|j| {
            let s = j as f64 / (count.max(2) - 1) as f64;
            -tau + top * s * s
        })
        .collect()
}

/// `||u||_{L^2(0, delta)}` of the piecewise-linear interpolant of nodal values.
pub fn hat_norm(values: &[f64], delta: f64) -> f64 {
    let h = delta / (values.len() - 1) as f64;
    values
        .windows(2)
        .map(|w| h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]))
        .sum::<f64>()
        .sqrt()
}

/// Outcome of one application of the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemlingReport {
    /// Nodal values of the image on the uniform grid of `[0, delta]`.
    pub image: Vec<f64>,
    /// `||A_out g - A_in f|| / ||A_in f||` over the z grid.
    pub residual: f64,
    /// `||image|| / ||input||`.
    pub norm_ratio: f64,
}

/// Moment matrices of the piecewise-linear nodal basis against both
/// transform kernels over a common z grid.
#[derive(Debug, Clone)]
pub struct RemlingSystem {
    delta: f64,
    tau: f64,
    cells: usize,
    z_grid: Vec<f64>,
    sine: DMatrix<f64>,
    psi: DMatrix<f64>,
    sine_pinv: PseudoInverse<f64>,
    psi_pinv: PseudoInverse<f64>,
}

impl RemlingSystem {
    pub fn new(cells: usize, tau: f64, delta: f64, v: &Potential, z_grid: &[f64]) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("delta must lie in (0, 1), got {delta}"));
        }
        if cells < 2 {
            return invalid("output grid needs at least two cells");
        }
        if !tau.is_finite() || z_grid.iter().any(|z| !z.is_finite()) {
            return invalid("tau and the z grid must be finite");
        }
        let unknowns = cells + 1;
        if z_grid.len() < Z_OVERSAMPLING * unknowns {
            return invalid(format!(
                "z grid has {} points, need at least {} ({}x the {unknowns} output nodes)",
                z_grid.len(),
                Z_OVERSAMPLING * unknowns,
                Z_OVERSAMPLING
            ));
        }
        let h = delta / cells as f64;
        let w_max = z_grid
            .iter()
            .map(|z| (z.abs() + tau.abs() + v.sup_bound()).sqrt())
            .fold(0.0, f64::max);
        let mut sub = ((4.0 * w_max * h).ceil() as usize).max(4);
        sub += sub % 2;
        let fine = cells * sub;
        let hf = h / sub as f64;
        // Simpson weights on every output cell times the hat functions
        let simpson = |i: usize| -> f64 {
            let local = i % sub;
            let w = if local == 0 {
                if i == 0 || i == fine {
                    1.0
                } else {
                    2.0
                }
            } else if local % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * hf / 3.0
        };
        let weights: Vec<f64> = (0..=fine).map(simpson).collect();
        let project = |y: &[f64]| -> Vec<f64> {
            (0..unknowns)
                .map(|j| {
                    let lo = (j.max(1) - 1) * sub;
                    let hi = ((j + 1) * sub).min(fine);
                    (lo..=hi)
                        .map(|i| {
                            let hat = 1.0 - (i as f64 - (j * sub) as f64).abs() / sub as f64;
                            weights[i] * hat.max(0.0) * y[i]
                        })
                        .sum()
                })
                .collect()
        };
        let rows: Vec<(Vec<f64>, Vec<f64>)> = z_grid
            .par_iter()
            .map(|&z| {
                let s: Vec<f64> = (0..=fine)
                    .map(|i| sine_kernel(z + tau, i as f64 * hf))
                    .collect();
                let mut y = vec![0.0; fine + 1];
                march_uniform(v, z, delta, fine, |i, _, a, _| y[i] = a)?;
                Ok((project(&s), project(&y)))
            })
            .collect::<Result<_>>()?;
        let nz = z_grid.len();
        let sine = DMatrix::from_fn(nz, unknowns, |r, c| rows[r].0[c]);
        let psi = DMatrix::from_fn(nz, unknowns, |r, c| rows[r].1[c]);
        let sine_pinv = PseudoInverse::new(sine.clone(), SV_CUTOFF)?;
        let psi_pinv = PseudoInverse::new(psi.clone(), SV_CUTOFF)?;
        for p in [&sine_pinv, &psi_pinv] {
            if p.rank < unknowns {
                return Err(Error::RankDeficient {
                    rank: p.rank,
                    unknowns,
                });
            }
        }
        Ok(Self {
            delta,
            tau,
            cells,
            z_grid: z_grid.to_vec(),
            sine,
            psi,
            sine_pinv,
            psi_pinv,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn z_grid(&self) -> &[f64] {
        &self.z_grid
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.delta / self.cells as f64;
        (0..=self.cells).map(|j| j as f64 * h).collect()
    }

    fn check(&self, u: &[f64]) -> Result<DVector<f64>> {
        if u.len() != self.cells + 1 {
            return invalid(format!(
                "expected {} nodal values, got {}",
                self.cells + 1,
                u.len()
            ));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return invalid("input has non-finite values");
        }
        Ok(DVector::from_column_slice(u))
    }

    fn apply(
        &self,
        u: &[f64],
        from: &DMatrix<f64>,
        to: &DMatrix<f64>,
        to_pinv: &PseudoInverse<f64>,
    ) -> Result<RemlingReport> {
        let u = self.check(u)?;
        let b = from * &u;
        let g = to_pinv.solve(&b);
        let bn = b.norm();
        let residual = if bn > 0.0 {
            (to * &g - &b).norm() / bn
        } else {
            0.0
        };
        let image: Vec<f64> = g.iter().copied().collect();
        let un = hat_norm(u.as_slice(), self.delta);
        let norm_ratio = if un > 0.0 {
            hat_norm(&image, self.delta) / un
        } else {
            0.0
        };
        Ok(RemlingReport {
            image,
            residual,
            norm_ratio,
        })
    }

    /// `g = K f`: `int f sin(sqrt(z + tau) x) / sqrt(z + tau) = int g psi(x, z)`.
    pub fn forward(&self, f: &[f64]) -> Result<RemlingReport> {
        self.apply(f, &self.sine, &self.psi, &self.psi_pinv)
    }

    /// `f = K^{-1} g`, the same fit with the roles of the kernels swapped.
    pub fn inverse(&self, g: &[f64]) -> Result<RemlingReport> {
        self.apply(g, &self.psi, &self.sine, &self.sine_pinv)
    }
}

/// `K f` for nodal values `f` on the uniform grid of `[0, delta]`.
pub fn remling_map(
    f: &[f64],
    tau: f64,
    delta: f64,
    v: &Potential,
    z_grid: &[f64],
) -> Result<RemlingReport> {
    if f.len() < 3 {
        return invalid("input needs at least three nodal values");
    }
    RemlingSystem::new(f.len() - 1, tau, delta, v, z_grid)?.forward(f)
}

/// Smallest `C` with `C^{-1} <= r <= C` for every norm ratio `r`.
pub fn empirical_constant(ratios: &[f64]) -> f64 {
    ratios.iter().fold(1.0f64, |c, &r| c.max(r).max(1.0 / r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_kernel_is_continuous_through_zero() {
        for &x in &[0.1, 0.4] {
            assert!((sine_kernel(1e-10, x) - x).abs() < 1e-9);
            assert!((sine_kernel(-1e-10, x) - x).abs() < 1e-9);
        }
    }

    #[test]
    fn hat_norm_of_linear_function() {
        let n = 10;
        let u: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64 * 0.5).collect();
        // int_0^{1/2} x^2 dx
        assert!((hat_norm(&u, 0.5).powi(2) - 1.0 / 24.0).abs() < 1e-14);
    }
}
