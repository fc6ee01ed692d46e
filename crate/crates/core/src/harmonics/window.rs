//! Minimal-norm time windows with prescribed moments against cosine or
//! exponential families built from two spectra.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::moments::{weighted_gram, PseudoInverse, FEASIBILITY_TOL, SV_CUTOFF};
use crate::analytic::C64;
use crate::error::{invalid, Error, Result};
use crate::pde::cos_lambda;
use crate::quad::{composite_gauss, gregory_weights};

/// Samples stored on the output grid of a window.
pub const WINDOW_SAMPLES: usize = 2049;
const GL_ORDER: usize = 16;
const MIN_NODES: usize = 64;
/// Values closer than this (relative) are the same frequency.
const MERGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// Moments `int eta(t) cos(sqrt(lambda) t) dt`.
    Cosine,
    /// Moments `int eta(t) exp(i lambda t) dt`.
    Exponential,
}

impl WindowKind {
    fn kernel(self, lambda: f64, t: f64) -> C64 {
        match self {
            WindowKind::Cosine => {
                let c = if lambda >= 0.0 {
                    (lambda.sqrt() * t).cos()
                } else {
                    ((-lambda).sqrt() * t).cosh()
                };
                C64::new(c, 0.0)
            }
            WindowKind::Exponential => C64::from_polar(1.0, lambda * t),
        }
    }

    /// Angular frequency of the kernel.
    fn frequency(self, lambda: f64) -> f64 {
        match self {
            WindowKind::Cosine => lambda.abs().sqrt(),
            WindowKind::Exponential => lambda.abs(),
        }
    }
}

/// `eta = sum_j c_j conj(kernel_j)` on `[0, horizon]`, the minimal-norm
/// solution of the truncated moment problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFunction {
    pub kind: WindowKind,
    pub horizon: f64,
    pub frequencies: Vec<f64>,
    pub targets: Vec<f64>,
    pub coeffs: Vec<C64>,
    pub t_grid: Vec<f64>,
    pub values: Vec<C64>,
    /// `|achieved moment - target|` per constraint.
    pub constraint_residuals: Vec<f64>,
    pub max_residual: f64,
    pub rank: usize,
    /// Gauss–Legendre nodes used for the Gram matrix.
    pub nodes: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct WindowRow {
    t: f64,
    re: f64,
    im: f64,
}

impl WindowFunction {
    pub fn eval(&self, t: f64) -> C64 {
        if !(0.0..=self.horizon).contains(&t) {
            return C64::new(0.0, 0.0);
        }
        self.frequencies
            .iter()
            .zip(&self.coeffs)
            .map(|(&l, c)| c * self.kind.kernel(l, t).conj())
            .sum()
    }

    /// `int_0^T eta(t) kernel(lambda, t) dt` for each `lambda`, by a
    /// Gauss–Legendre rule with `factor` times the construction nodes.
    pub fn moments(&self, lambdas: &[f64], factor: usize) -> Vec<C64> {
        let order = GL_ORDER - 4;
        let panels = (self.nodes * factor.max(1)).div_ceil(order);
        let (x, w) = composite_gauss(order, panels, 0.0, self.horizon);
        let eta: Vec<C64> = x.iter().map(|&t| self.eval(t)).collect();
        lambdas
            .iter()
            .map(|&l| {
                x.iter()
                    .zip(&w)
                    .zip(&eta)
                    .map(|((&t, &wt), e)| e * self.kind.kernel(l, t) * wt)
                    .sum()
            })
            .collect()
    }

    /// Largest deviation from the targets under an independent quadrature
    /// with `factor` times the nodes.
    pub fn verify(&self, factor: usize) -> f64 {
        self.moments(&self.frequencies, factor)
            .iter()
            .zip(&self.targets)
            .map(|(m, t)| (m - t).norm())
            .fold(0.0, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        let h = self.horizon / (self.t_grid.len() - 1) as f64;
        let w = gregory_weights(self.t_grid.len() - 1);
        self.values
            .iter()
            .zip(&w)
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
            * h.sqrt()
    }

    /// `int_0^T eta(t) s(t) dt` for a signal sampled on a uniform grid starting
    /// at `t = 0` that has a node at the horizon.
    pub fn pair(&self, times: &[f64], signal: &[C64]) -> Result<C64> {
        if times.len() != signal.len() || times.len() < 2 {
            return invalid("signal and time grid lengths differ");
        }
        if times[0].abs() > 1e-14 {
            return invalid("signal grid must start at t = 0");
        }
        let dt = times[1] - times[0];
        let n = (self.horizon / dt).round() as usize;
        if (n as f64 * dt - self.horizon).abs() > 1e-9 * self.horizon || n >= times.len() {
            return invalid(format!(
                "signal grid (dt = {dt}, {} samples) has no node at the window horizon {}",
                times.len(),
                self.horizon
            ));
        }
        if n < 6 {
            return invalid("signal grid too coarse on the window support");
        }
        let w = gregory_weights(n);
        Ok(times[..=n]
            .iter()
            .zip(&signal[..=n])
            .zip(&w)
            .map(|((&t, s), wt)| self.eval(t) * s * (wt * dt))
            .sum())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        crate::io::write_rows(
            w,
            self.t_grid
                .iter()
                .zip(&self.values)
                .map(|(&t, v)| WindowRow {
                    t,
                    re: v.re,
                    im: v.im,
                }),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Sorted union with near-equal values merged.
fn union(lists: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for v in all {
        if out.last().is_none_or(|&u| !same(u, v)) {
            out.push(v);
        }
    }
    out
}

/// Minimal-norm window for arbitrary constraints, without the feasibility check.
pub fn solve_window(
    kind: WindowKind,
    frequencies: &[f64],
    targets: &[f64],
    horizon: f64,
) -> Result<WindowFunction> {
    if frequencies.is_empty() || frequencies.len() != targets.len() {
        return invalid("need one target per constraint frequency");
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("window horizon must be positive, got {horizon}"));
    }
    if frequencies.iter().chain(targets).any(|x| !x.is_finite()) {
        return invalid("constraints must be finite");
    }
    if kind == WindowKind::Cosine {
        for (j, &l) in frequencies.iter().enumerate() {
            cos_lambda(l, horizon, j + 1)?;
        }
    }
    let w_max = frequencies
        .iter()
        .map(|&l| kind.frequency(l))
        .fold(0.0, f64::max);
    let nodes = ((8.0 * w_max * horizon / std::f64::consts::PI).ceil() as usize).max(MIN_NODES);
    let (x, w) = composite_gauss(GL_ORDER, nodes.div_ceil(GL_ORDER), 0.0, horizon);
    let samples: Vec<Vec<C64>> = frequencies
        .iter()
        .map(|&l| x.iter().map(|&t| kind.kernel(l, t)).collect())
        .collect();
    let g: DMatrix<C64> = weighted_gram(&samples, &w);
    let b = DVector::from_iterator(targets.len(), targets.iter().map(|&t| C64::new(t, 0.0)));
    let pinv = PseudoInverse::new(g.clone(), SV_CUTOFF)?;
    let c = pinv.solve(&b);
    let res = &g * &c - &b;
    let constraint_residuals: Vec<f64> = res.iter().map(|r| r.norm()).collect();
    let max_residual = constraint_residuals.iter().copied().fold(0.0, f64::max);
    let t_grid = crate::pde::time_grid(horizon, WINDOW_SAMPLES);
    let mut win = WindowFunction {
        kind,
        horizon,
        frequencies: frequencies.to_vec(),
        targets: targets.to_vec(),
        coeffs: c.iter().copied().collect(),
        t_grid,
        values: Vec::new(),
        constraint_residuals,
        max_residual,
        rank: pinv.rank,
        nodes: x.len(),
        warnings: Vec::new(),
    };
    win.values = win.t_grid.iter().map(|&t| win.eval(t)).collect();
    Ok(win)
}

fn feasible(win: WindowFunction) -> Result<WindowFunction> {
    if win.max_residual > FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "max moment residual {:.3e} at Gram rank {} of {}; lengthen the window or separate the spectra",
            win.max_residual,
            win.rank,
            win.frequencies.len()
        )));
    }
    Ok(win)
}

fn check_common(l1: &[f64], m: usize, k_trunc: usize) -> Result<()> {
    if k_trunc == 0 {
        return invalid("truncation must keep at least one eigenvalue");
    }
    if m == 0 || m > k_trunc {
        return invalid(format!("window index m = {m} must lie in 1..={k_trunc}"));
    }
    if m > l1.len() {
        return invalid(format!(
            "first spectrum has {} values, index {m} requested",
            l1.len()
        ));
    }
    Ok(())
}

fn cos_constraints(l1: &[f64], l2: &[f64], m: usize, k_trunc: usize) -> (Vec<f64>, Vec<f64>) {
    let lm = l1[m - 1];
    let freqs = union(&[&l1[..k_trunc.min(l1.len())], &l2[..k_trunc.min(l2.len())]]);
    let targets = freqs
        .iter()
        .map(|&l| if same(l, lm) { 1.0 } else { 0.0 })
        .collect();
    (freqs, targets)
}

/// Window `eta` on `[0, T]` with `int eta cos_lambda(lambda) = 1` at
/// `lambda_m` of the first spectrum and `0` at every other retained
/// eigenvalue of either spectrum.
pub fn build_cos_window(
    l1: &[f64],
    l2: &[f64],
    m: usize,
    t: f64,
    k_trunc: usize,
) -> Result<WindowFunction> {
    check_common(l1, m, k_trunc)?;
    let (freqs, targets) = cos_constraints(l1, l2, m, k_trunc);
    let mut win = feasible(solve_window(WindowKind::Cosine, &freqs, &targets, t)?)?;
    if t <= 2.0 {
        win.warnings.push(format!(
            "horizon {t} <= 2: windows need not exist for the full spectra"
        ));
    }
    Ok(win)
}

/// `(T, max residual)` of the cosine window for each horizon, without the
/// feasibility check.
pub fn cos_window_residual_curve(
    l1: &[f64],
    l2: &[f64],
    m: usize,
    k_trunc: usize,
    horizons: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_common(l1, m, k_trunc)?;
    let (freqs, targets) = cos_constraints(l1, l2, m, k_trunc);
    horizons
        .iter()
        .map(|&t| {
            Ok((
                t,
                solve_window(WindowKind::Cosine, &freqs, &targets, t)?.max_residual,
            ))
        })
        .collect()
}

/// Complex window on `[0, delta]` with `int eta e^{i lambda t} = 1` at
/// `lambda_m` of the first spectrum, `0` at every other retained eigenvalue
/// of either spectrum, and zero mean.
pub fn build_exp_window(
    l1: &[f64],
    l2: &[f64],
    m: usize,
    delta: f64,
    k_trunc: usize,
) -> Result<WindowFunction> {
    check_common(l1, m, k_trunc)?;
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let lm = l1[m - 1];
    if same(lm, 0.0) {
        return invalid(format!("eigenvalue {m} of the first spectrum is zero"));
    }
    let l2 = &l2[..k_trunc.min(l2.len())];
    if let Some(j) = l2.iter().position(|&l| same(l, lm)) {
        return Err(Error::Infeasible(format!(
            "eigenvalue {m} of the first spectrum coincides with eigenvalue {} of the second",
            j + 1
        )));
    }
    let freqs = union(&[&l1[..k_trunc.min(l1.len())], l2, &[0.0]]);
    let targets: Vec<f64> = freqs
        .iter()
        .map(|&l| if same(l, lm) { 1.0 } else { 0.0 })
        .collect();
    feasible(solve_window(
        WindowKind::Exponential,
        &freqs,
        &targets,
        delta,
    )?)
}
