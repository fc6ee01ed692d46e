use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::ModalBasis;
use super::trace::{FieldKind, TimeTrace};
use super::{
    check_grid_function, default_modes, default_schema, default_t_samples, default_tail_budget,
    time_grid,
};
use crate::analytic::C64;
use crate::error::{invalid, Error, Result};
use crate::Potential;

/// Largest admissible `sqrt(|lambda|) t` in the hyperbolic branch.
pub const COSH_CAP: f64 = 50.0;

/// Wave problem `u_tt - u_xx + V u = 0` with `u(0) = f`, `u_t(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub potential: Potential,
    /// Initial data on the potential grid.
    pub f: Vec<f64>,
    pub t_end: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_t_samples")]
    pub t_samples: usize,
    #[serde(default = "default_tail_budget")]
    pub tail_budget: f64,
}

impl WaveConfig {
    pub fn new(potential: Potential, f: Vec<f64>, t_end: f64) -> Self {
        Self {
            schema_version: default_schema(),
            potential,
            f,
            t_end,
            modes: default_modes(),
            t_samples: default_t_samples(),
            tail_budget: default_tail_budget(),
        }
    }

    pub fn with_modes(mut self, k: usize) -> Self {
        self.modes = k;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.t_samples = n;
        self
    }

    /// Hard errors for malformed configs; the returned notes flag horizons
    /// `T <= 2`, below which windows of the uniqueness argument do not exist.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.schema_version != default_schema() {
            return invalid(format!(
                "unsupported schema_version {}",
                self.schema_version
            ));
        }
        let abs: Vec<f64> = self.f.iter().map(|x| x.abs()).collect();
        check_grid_function("f", &abs, self.potential.cells(), true)?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return invalid("t_end must be positive");
        }
        if self.modes == 0 || self.t_samples < 2 {
            return invalid("modes >= 1 and t_samples >= 2 required");
        }
        let mut notes = Vec::new();
        if self.t_end <= 2.0 {
            notes.push(format!(
                "T = {} <= 2: the two-sided window argument needs T > 2",
                self.t_end
            ));
        }
        Ok(notes)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn time_grid(&self) -> Vec<f64> {
        time_grid(self.t_end, self.t_samples)
    }
}

/// `cos(sqrt(lambda) t)` continued to `lambda <= 0`.
pub fn cos_lambda(lambda: f64, t: f64, index: usize) -> Result<f64> {
    if lambda > 0.0 {
        Ok((lambda.sqrt() * t).cos())
    } else if lambda == 0.0 {
        Ok(1.0)
    } else {
        let s = (-lambda).sqrt() * t.abs();
        if s > COSH_CAP {
            return Err(Error::CoshOverflow { index, lambda, t });
        }
        Ok(s.cosh())
    }
}

/// Modal solution `u = sum a_k cos_lambda(lambda_k, t) phi_k`.
#[derive(Debug, Clone)]
pub struct WaveModes {
    pub basis: ModalBasis,
    /// `a_k = (f, phi_k) / ||phi_k||^2`.
    pub coeffs: Vec<f64>,
}

impl WaveModes {
    pub fn lambda(&self, j: usize) -> f64 {
        self.basis.pairs()[j].lambda
    }

    /// Endpoint traces at the given times.
    pub fn traces(&self, times: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let pairs = self.basis.pairs();
        let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        for p in pairs {
            cos_lambda(p.lambda, t_max, p.index)?;
        }
        let rows: Vec<(f64, f64)> = times
            .par_iter()
            .map(|&t| {
                let mut l = 0.0;
                let mut r = 0.0;
                for (a, p) in self.coeffs.iter().zip(pairs) {
                    let c = a * cos_lambda(p.lambda, t, p.index).unwrap_or(f64::NAN);
                    l += c;
                    r += c * p.dphi_at_1;
                }
                (l, r)
            })
            .collect();
        Ok(rows.into_iter().unzip())
    }

    /// `sum a_k^2 ||phi_k||^2`, the truncated Parseval sum for `||f||^2`.
    pub fn parseval_sum(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.basis.pairs())
            .map(|(a, p)| a * a * p.norm_sq)
            .sum()
    }

    /// `(||u_t||^2 + <H u, u>) / 2` assembled from the modal time functions.
    pub fn energy_at(&self, t: f64) -> f64 {
        0.5 * self
            .coeffs
            .iter()
            .zip(self.basis.pairs())
            .map(|(a, p)| {
                let (c, s) = if p.lambda > 0.0 {
                    let w = p.lambda.sqrt();
                    ((w * t).cos(), -w * (w * t).sin())
                } else if p.lambda == 0.0 {
                    (1.0, 0.0)
                } else {
                    let w = (-p.lambda).sqrt();
                    ((w * t).cosh(), w * (w * t).sinh())
                };
                a * a * p.norm_sq * (s * s + p.lambda * c * c)
            })
            .sum::<f64>()
    }

    /// `K max(|a_K|, |a_{K-1}|)`, the tail of a series with `k^{-2}` decay.
    pub fn tail_estimate(&self) -> f64 {
        let k = self.coeffs.len();
        let last = self.coeffs[k.saturating_sub(2)..]
            .iter()
            .fold(0.0f64, |m, a| m.max(a.abs()));
        k as f64 * last
    }
}

pub fn wave_modes(cfg: &WaveConfig) -> Result<WaveModes> {
    cfg.validate()?;
    let basis = ModalBasis::new(&cfg.potential, cfg.modes)?;
    let coeffs = basis.coeffs(&cfg.f)?;
    Ok(WaveModes { basis, coeffs })
}

/// Spectral endpoint traces of the wave problem.
pub fn wave_trace(cfg: &WaveConfig) -> Result<TimeTrace> {
    let notes = cfg.validate()?;
    let modes = wave_modes(cfg)?;
    let t = cfg.time_grid();
    let (l, r) = modes.traces(&t)?;
    let cx = |v: Vec<f64>| v.into_iter().map(|x| C64::new(x, 0.0)).collect();
    let mut tr = TimeTrace::new(t, cx(l), cx(r), FieldKind::Real)?;
    tr.warnings = notes;
    let tail = modes.tail_estimate();
    if tail > cfg.tail_budget {
        tr.warnings.push(format!(
            "mode tail estimate {tail:.3e} exceeds budget {:.1e}; raise K",
            cfg.tail_budget
        ));
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_branch_is_capped() {
        assert_eq!(cos_lambda(0.0, 3.0, 1).unwrap(), 1.0);
        assert!((cos_lambda(-4.0, 1.0, 1).unwrap() - 2f64.cosh()).abs() < 1e-12);
        match cos_lambda(-100.0, 6.0, 2) {
            Err(Error::CoshOverflow { index, .. }) => assert_eq!(index, 2),
            other => panic!("{other:?}"),
        }
    }
}
