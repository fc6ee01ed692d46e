//! Dirichlet eigenpairs normalized by `phi'(0) = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ivp::{march, shoot, solve_real, MIN_STEPS};
use super::potential::PotentialField;
use crate::error::{invalid, Error, Result};
use crate::quad::trapezoid;
use crate::scalar::Real;

pub const DEFAULT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T: Real> {
    /// 1-based index.
    pub index: usize,
    pub lambda: T,
    pub phi: Vec<T>,
    pub dphi: Vec<T>,
    pub dphi_at_1: T,
    /// `||phi||^2` in `L^2(0, 1)`.
    pub norm_sq: T,
}

impl<T: Real> EigenPair<T> {
    pub fn datum(&self) -> SpectralDatum {
        SpectralDatum {
            index: self.index,
            lambda: self.lambda.as_f64(),
            dphi_at_1: self.dphi_at_1.as_f64(),
        }
    }

    /// Interior sign changes of `phi` (nodes `1..n-1`).
    pub fn interior_sign_changes(&self) -> usize {
        let n = self.phi.len() - 1;
        sign_changes(self.phi[1..n].iter().copied())
    }
}

/// Eigenvalue and endpoint derivative, the data transmitted to the inverse problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    pub index: usize,
    pub lambda: f64,
    pub dphi_at_1: f64,
}

fn sign_changes<T: Real>(it: impl Iterator<Item = T>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for v in it {
        let s = if v > T::zero() {
            1
        } else if v < T::zero() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Shooting-based eigen solver; the solver grid is the uniform grid of `n_steps` cells.
#[derive(Debug, Clone)]
pub struct EigenSolver<'a, T: Real> {
    v: &'a PotentialField<T>,
    n_steps: usize,
    rel_tol: T,
}

impl<'a, T: Real> EigenSolver<'a, T> {
    /// Uses the potential grid as solver grid.
    pub fn new(v: &'a PotentialField<T>) -> Result<Self> {
        Self::with_steps(v, v.cells())
    }

    pub fn with_steps(v: &'a PotentialField<T>, n_steps: usize) -> Result<Self> {
        if n_steps < MIN_STEPS {
            return invalid(format!(
                "eigen solver needs at least {MIN_STEPS} steps, got {n_steps}"
            ));
        }
        let floor = T::epsilon() * T::lit(64.0);
        Ok(Self {
            v,
            n_steps,
            rel_tol: T::lit(DEFAULT_REL_TOL).max(floor),
        })
    }

    pub fn rel_tol(mut self, tol: T) -> Self {
        self.rel_tol = tol.max(T::epsilon() * T::lit(64.0));
        self
    }

    pub fn steps(&self) -> usize {
        self.n_steps
    }

    /// Number of zeros of `psi(., e)` in `(0, 1]`, i.e. eigenvalues below `e`,
    /// and `psi(1, e)`.
    pub fn count_and_end(&self, e: T) -> Result<(usize, T)> {
        let mut last = 1i8;
        let mut count = 0usize;
        let (psi, _) = march(self.v, e, T::one(), self.n_steps, |j, _, p, _| {
            if j == 0 {
                return;
            }
            let s = if p > T::zero() {
                1
            } else if p < T::zero() {
                -1
            } else {
                0
            };
            if s != 0 && s != last {
                count += 1;
                last = s;
            }
        })?;
        Ok((count, psi))
    }

    pub fn count_below(&self, e: T) -> Result<usize> {
        Ok(self.count_and_end(e)?.0)
    }

    fn end_value(&self, e: T) -> Result<T> {
        Ok(shoot(self.v, e, T::one(), self.n_steps)?.0)
    }

    fn search_window(&self, k: usize) -> (T, T) {
        let tau = self.v.sup_bound();
        let kk = T::from_usize_lossy(k + 2) * T::PI();
        (-tau - T::one(), kk * kk + tau + T::one())
    }

    /// Bracket `[lo, hi]` with exactly `k - 1` eigenvalues below `lo` and `k` below `hi`.
    fn bracket(&self, k: usize, guess: Option<(T, T)>) -> Result<(T, T, T, T)> {
        let (floor, ceil) = self.search_window(k);
        let tau = self.v.sup_bound();
        let kk = T::from_usize_lossy(k) * T::PI();
        let (mut lo, mut hi) =
            guess.unwrap_or((kk * kk - tau - T::one(), kk * kk + tau + T::one()));
        lo = lo.max(floor);
        hi = hi.min(ceil).max(lo);
        let fail = || Error::BracketNotFound {
            index: k,
            lower: floor.as_f64(),
            upper: ceil.as_f64(),
        };
        let (mut nlo, mut glo) = self.count_and_end(lo)?;
        let mut width = (hi - lo).max(T::one());
        while nlo >= k {
            if lo <= floor {
                return Err(fail());
            }
            hi = lo;
            lo = (lo - width).max(floor);
            width = width + width;
            (nlo, glo) = self.count_and_end(lo)?;
        }
        let (mut nhi, mut ghi) = self.count_and_end(hi)?;
        width = (hi - lo).max(T::one());
        while nhi < k {
            if hi >= ceil {
                return Err(fail());
            }
            lo = hi;
            nlo = nhi;
            glo = ghi;
            hi = (hi + width).min(ceil);
            width = width + width;
            (nhi, ghi) = self.count_and_end(hi)?;
        }
        // bisect on the count until the bracket isolates eigenvalue k
        let mut guard = 0;
        while nlo + 1 != k || nhi != k {
            let mid = T::lit(0.5) * (lo + hi);
            let (nm, gm) = self.count_and_end(mid)?;
            if nm < k {
                lo = mid;
                nlo = nm;
                glo = gm;
            } else {
                hi = mid;
                nhi = nm;
                ghi = gm;
            }
            guard += 1;
            if guard > 200 || hi - lo <= self.rel_tol * hi.abs().max(T::one()) {
                break;
            }
        }
        if nlo + 1 != k || nhi != k {
            return Err(Error::EigenvalueCollision {
                first: k,
                second: k + 1,
            });
        }
        Ok((lo, glo, hi, ghi))
    }

    /// Illinois-safeguarded secant on `E -> psi(1, E)` inside the bracket.
    fn root(&self, mut lo: T, mut glo: T, mut hi: T, mut ghi: T) -> Result<T> {
        if glo == T::zero() {
            return Ok(lo);
        }
        if ghi == T::zero() {
            return Ok(hi);
        }
        let mut side = 0i8;
        for it in 0..400 {
            let scale = T::lit(0.5) * (lo.abs() + hi.abs());
            if hi - lo <= self.rel_tol * scale.max(T::one()) {
                break;
            }
            let mut e = (lo * ghi - hi * glo) / (ghi - glo);
            // periodic bisection keeps the bracket shrinking geometrically
            if !(e > lo && e < hi) || it % 8 == 7 {
                e = T::lit(0.5) * (lo + hi);
            }
            let g = self.end_value(e)?;
            if g == T::zero() {
                return Ok(e);
            }
            if (g > T::zero()) == (glo > T::zero()) {
                lo = e;
                glo = g;
                if side == -1 {
                    ghi = ghi * T::lit(0.5);
                }
                side = -1;
            } else {
                hi = e;
                ghi = g;
                if side == 1 {
                    glo = glo * T::lit(0.5);
                }
                side = 1;
            }
        }
        // final secant estimate inside the converged bracket
        let e = (lo * ghi - hi * glo) / (ghi - glo);
        Ok(if e > lo && e < hi {
            e
        } else {
            T::lit(0.5) * (lo + hi)
        })
    }

    pub fn eigenvalue(&self, k: usize) -> Result<T> {
        if k == 0 {
            return invalid("eigenvalue indices are 1-based");
        }
        let (lo, glo, hi, ghi) = self.bracket(k, None)?;
        self.root(lo, glo, hi, ghi)
    }

    /// Eigenvalue `k` starting from a nearby estimate; falls back to full bracketing.
    pub fn refine(&self, k: usize, guess: T, half_width: T) -> Result<T> {
        let w = half_width
            .abs()
            .max(self.rel_tol * guess.abs().max(T::one()) * T::lit(16.0));
        let (lo, hi) = (guess - w, guess + w);
        let (nlo, glo) = self.count_and_end(lo)?;
        let (nhi, ghi) = self.count_and_end(hi)?;
        if nlo + 1 == k && nhi == k {
            return self.root(lo, glo, hi, ghi);
        }
        let (lo, glo, hi, ghi) = self.bracket(k, Some((lo, hi)))?;
        self.root(lo, glo, hi, ghi)
    }

    pub fn pair_at(&self, k: usize, lambda: T) -> Result<EigenPair<T>> {
        let (phi, dphi) = solve_real(self.v, lambda, self.n_steps)?;
        let h = T::one() / T::from_usize_lossy(self.n_steps);
        let sq: Vec<T> = phi.iter().map(|&p| p * p).collect();
        let norm_sq = trapezoid(&sq, h);
        let dphi_at_1 = *dphi.last().unwrap();
        Ok(EigenPair {
            index: k,
            lambda,
            phi,
            dphi,
            dphi_at_1,
            norm_sq,
        })
    }

    pub fn pair(&self, k: usize) -> Result<EigenPair<T>> {
        let lambda = self.eigenvalue(k)?;
        self.pair_at(k, lambda)
    }

    /// First `count` eigenvalues only.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<T>> {
        let vals: Vec<T> = (1..=count)
            .into_par_iter()
            .map(|k| self.eigenvalue(k))
            .collect::<Result<_>>()?;
        check_separation(&vals, self.rel_tol)?;
        Ok(vals)
    }

    /// First `count` eigenpairs.
    pub fn pairs(&self, count: usize) -> Result<Vec<EigenPair<T>>> {
        if count == 0 {
            return invalid("K must be at least 1");
        }
        let pairs: Vec<EigenPair<T>> = (1..=count)
            .into_par_iter()
            .map(|k| self.pair(k))
            .collect::<Result<_>>()?;
        let vals: Vec<T> = pairs.iter().map(|p| p.lambda).collect();
        check_separation(&vals, self.rel_tol)?;
        Ok(pairs)
    }
}

fn check_separation<T: Real>(vals: &[T], tol: T) -> Result<()> {
    for (i, w) in vals.windows(2).enumerate() {
        if w[1] - w[0] <= tol * w[1].abs().max(T::one()) * T::lit(4.0) {
            return Err(Error::EigenvalueCollision {
                first: i + 1,
                second: i + 2,
            });
        }
    }
    Ok(())
}

/// First `k` Dirichlet eigenpairs on the potential grid.
pub fn dirichlet_eigs<T: Real>(v: &PotentialField<T>, k: usize) -> Result<Vec<EigenPair<T>>> {
    EigenSolver::new(v)?.pairs(k)
}
