use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::ModalBasis;
use super::trace::{FieldKind, TimeTrace};
use super::{
    check_grid_function, default_modes, default_schema, default_t_samples, default_tail_budget,
    time_grid,
};
use crate::analytic::C64;
use crate::error::{invalid, Result};
use crate::Potential;

/// Probed Schrödinger problem
/// `i u_t - u_xx + V u = F + 1_delta(t) 1_delta(x)`, `u(0) = f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub potential: Potential,
    /// Initial data on the potential grid, as `[re, im]` pairs in JSON.
    pub f: Vec<C64>,
    /// Time-independent source on the potential grid; empty means `F = 0`.
    #[serde(default)]
    pub source: Vec<f64>,
    /// Probe width, both in time and in space; `0` switches the probe off.
    pub delta: f64,
    pub t_end: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_t_samples")]
    pub t_samples: usize,
    #[serde(default = "default_tail_budget")]
    pub tail_budget: f64,
}

impl SchrodingerConfig {
    pub fn new(
        potential: Potential,
        f: Vec<C64>,
        source: Vec<f64>,
        delta: f64,
        t_end: f64,
    ) -> Self {
        Self {
            schema_version: default_schema(),
            potential,
            f,
            source,
            delta,
            t_end,
            modes: default_modes(),
            t_samples: default_t_samples(),
            tail_budget: default_tail_budget(),
        }
    }

    /// Zero initial data and source.
    pub fn quiet(potential: Potential, delta: f64, t_end: f64) -> Self {
        let n = potential.cells() + 1;
        Self::new(
            potential,
            vec![C64::new(0.0, 0.0); n],
            Vec::new(),
            delta,
            t_end,
        )
    }

    pub fn with_modes(mut self, k: usize) -> Self {
        self.modes = k;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.t_samples = n;
        self
    }

    /// The source with the empty shorthand expanded.
    pub fn source_samples(&self) -> Vec<f64> {
        if self.source.is_empty() {
            vec![0.0; self.potential.cells() + 1]
        } else {
            self.source.clone()
        }
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        if self.schema_version != default_schema() {
            return invalid(format!(
                "unsupported schema_version {}",
                self.schema_version
            ));
        }
        let n = self.potential.cells();
        let abs: Vec<f64> = self.f.iter().map(|z| z.norm()).collect();
        check_grid_function("f", &abs, n, true)?;
        if !self.source.is_empty() {
            let abs: Vec<f64> = self.source.iter().map(|x| x.abs()).collect();
            check_grid_function("source", &abs, n, false)?;
        }
        if !(self.delta >= 0.0 && self.delta <= 1.0) {
            return invalid("delta must lie in [0, 1]");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return invalid("t_end must be positive");
        }
        if self.modes == 0 || self.t_samples < 2 {
            return invalid("modes >= 1 and t_samples >= 2 required");
        }
        let mut notes = Vec::new();
        if self.delta >= self.t_end {
            notes.push(format!(
                "delta = {} >= T: the probe never switches off",
                self.delta
            ));
        }
        if self.delta == 1.0 {
            notes.push("delta = 1: the probe covers the whole interval".into());
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

/// `(e^{i lambda t} - 1) / lambda`, equal to `i t` at `lambda = 0`, without cancellation.
pub(crate) fn phase_integral(lambda: f64, t: f64) -> C64 {
    if lambda == 0.0 {
        return C64::new(0.0, t);
    }
    let x = lambda * t;
    let s = (0.5 * x).sin();
    C64::new(-2.0 * s * s, x.sin()) / lambda
}

/// Modal amplitudes of the probed Schrödinger solution.
#[derive(Debug, Clone)]
pub struct SchrodingerModes {
    pub basis: ModalBasis,
    /// `(f, phi_k) / ||phi_k||^2`.
    pub alpha: Vec<C64>,
    /// `(1_delta, phi_k) / ||phi_k||^2`.
    pub beta_probe: Vec<f64>,
    /// `(F, phi_k) / ||phi_k||^2`.
    pub beta_source: Vec<f64>,
    pub delta: f64,
}

impl SchrodingerModes {
    /// `A_k(t)`; after `t = delta` the closed form restarts from `A_k(delta)`
    /// with the probe switched off.
    pub fn amplitude(&self, j: usize, t: f64) -> C64 {
        let lambda = self.basis.pairs()[j].lambda;
        let cis = |s: f64| C64::from_polar(1.0, lambda * s);
        let b = self.beta_probe[j] + self.beta_source[j];
        if t <= self.delta {
            return cis(t) * self.alpha[j] - phase_integral(lambda, t) * b;
        }
        let a_delta = cis(self.delta) * self.alpha[j] - phase_integral(lambda, self.delta) * b;
        let s = t - self.delta;
        cis(s) * a_delta - phase_integral(lambda, s) * self.beta_source[j]
    }

    pub fn traces(&self, times: &[f64]) -> (Vec<C64>, Vec<C64>) {
        let pairs = self.basis.pairs();
        times
            .par_iter()
            .map(|&t| {
                let mut l = C64::new(0.0, 0.0);
                let mut r = C64::new(0.0, 0.0);
                for (j, p) in pairs.iter().enumerate() {
                    let a = self.amplitude(j, t);
                    l += a;
                    r += a * p.dphi_at_1;
                }
                (l, r)
            })
            .unzip()
    }

    /// `int |u|^2 = sum |A_k|^2 ||phi_k||^2`.
    pub fn mass_at(&self, t: f64) -> f64 {
        self.basis
            .pairs()
            .iter()
            .enumerate()
            .map(|(j, p)| self.amplitude(j, t).norm_sqr() * p.norm_sq)
            .sum()
    }

    /// `K` times the bound `|alpha| + 2 |beta| / |lambda|` on the last two amplitudes.
    pub fn tail_estimate(&self) -> f64 {
        let k = self.alpha.len();
        let pairs = self.basis.pairs();
        let last = (k.saturating_sub(2)..k)
            .map(|j| {
                let b = (self.beta_probe[j] + self.beta_source[j])
                    .abs()
                    .max(self.beta_source[j].abs());
                self.alpha[j].norm() + 2.0 * b / pairs[j].lambda.abs().max(1.0)
            })
            .fold(0.0f64, f64::max);
        k as f64 * last
    }
}

pub fn schrodinger_modes(cfg: &SchrodingerConfig) -> Result<SchrodingerModes> {
    cfg.validate()?;
    let basis = ModalBasis::new(&cfg.potential, cfg.modes)?;
    let re: Vec<f64> = cfg.f.iter().map(|z| z.re).collect();
    let im: Vec<f64> = cfg.f.iter().map(|z| z.im).collect();
    let (a_re, a_im) = (basis.coeffs(&re)?, basis.coeffs(&im)?);
    let alpha = a_re
        .iter()
        .zip(&a_im)
        .map(|(r, i)| C64::new(*r, *i))
        .collect();
    let beta_source = basis.coeffs(&cfg.source_samples())?;
    let beta_probe = (0..basis.modes())
        .into_par_iter()
        .map(|j| Ok(basis.head_integral(j, cfg.delta)? / basis.pairs()[j].norm_sq))
        .collect::<Result<_>>()?;
    Ok(SchrodingerModes {
        basis,
        alpha,
        beta_probe,
        beta_source,
        delta: cfg.delta,
    })
}

/// Spectral endpoint traces of the probed Schrödinger problem.
pub fn schrodinger_trace(cfg: &SchrodingerConfig) -> Result<TimeTrace> {
    let notes = cfg.validate()?;
    let modes = schrodinger_modes(cfg)?;
    let t = cfg.time_grid();
    let (l, r) = modes.traces(&t);
    let mut tr = TimeTrace::new(t, l, r, FieldKind::Complex)?;
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
