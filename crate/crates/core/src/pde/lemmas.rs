use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{head_integral, second_derivative, ModalBasis};
use crate::error::{invalid, Result};
use crate::inverse::IndexSet;
use crate::quad::gregory_weights;
use crate::sl::{solve_real, EigenSolver};
use crate::Potential;

/// `(k, (f, phi_k) k^4 pi^4)` for `k = 1..=K`.
///
/// With `phi_k ~ sin(k pi x) / (k pi)` these approach `f''(1) (-1)^k - f''(0)`.
pub fn coeff_decay_witness(v: &Potential, f: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
    let basis = ModalBasis::new(v, k)?;
    let ip = basis.inner_all(f)?;
    Ok(ip
        .into_iter()
        .enumerate()
        .map(|(j, a)| {
            let kp = (j + 1) as f64 * PI;
            (j + 1, a * kp.powi(4))
        })
        .collect())
}

/// Last even-index and last odd-index entries of a decay witness.
pub fn decay_limits(witness: &[(usize, f64)]) -> (f64, f64) {
    let last = |parity: usize| {
        witness
            .iter()
            .rev()
            .find(|(k, _)| k % 2 == parity)
            .map(|p| p.1)
            .unwrap_or(f64::NAN)
    };
    (last(0), last(1))
}

/// `(f''(0), f''(1))` from fourth-order one-sided differences.
pub fn endpoint_second_derivatives(f: &[f64]) -> Result<(f64, f64)> {
    let d = second_derivative(f)?;
    Ok((d[0], d[d.len() - 1]))
}

/// How near-equality in the definition of the exceptional set is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum MembershipRule {
    /// `|lhs - rhs| <= tol * (int_0^delta |phi| + int |F phi| + |lambda| int |f phi|)`.
    Relative { tol: f64 },
    /// `|lhs - rhs| < delta^2 / (32 pi^2 k^2)`, the envelope used in the density bound.
    Envelope,
}

impl Default for MembershipRule {
    fn default() -> Self {
        MembershipRule::Relative { tol: 1e-9 }
    }
}

/// Indices `k <= K` with `lambda_k = 0` or
/// `int_0^delta phi_k = int (-F + lambda_k f) phi_k`, with the counting density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub set: IndexSet,
    /// `(r, |P ∩ [1, r]| / r)` for `r = K, K/2, K/4, ...`.
    pub profile: Vec<(f64, f64)>,
    /// `|lhs - rhs|` divided by the relative-rule scale, per `k`.
    pub margins: Vec<f64>,
    pub delta: f64,
}

impl ExceptionalSet {
    /// Density at the largest radius.
    pub fn density(&self) -> f64 {
        self.profile.first().map(|p| p.1).unwrap_or(0.0)
    }
}

pub fn exceptional_set_p(
    v: &Potential,
    f: &[f64],
    source: &[f64],
    delta: f64,
    k_max: usize,
    rule: MembershipRule,
) -> Result<ExceptionalSet> {
    let n = v.cells();
    if f.len() != n + 1 || source.len() != n + 1 {
        return invalid("f and F must be sampled on the potential grid");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid("delta must lie in (0, 1)");
    }
    if k_max == 0 {
        return invalid("K must be at least 1");
    }
    // four steps per half wavelength of the top mode
    let mut steps = n;
    while steps < 4 * (k_max + 1) {
        steps *= 2;
    }
    let stride = steps / n;
    let solver = EigenSolver::with_steps(v, steps)?;
    let h_pot = 1.0 / n as f64;
    let weights = gregory_weights(n);
    let h_sol = 1.0 / steps as f64;
    let rows: Vec<(bool, f64)> = (1..=k_max)
        .into_par_iter()
        .map(|k| -> Result<(bool, f64)> {
            let lambda = solver.eigenvalue(k)?;
            let (phi, dphi) = solve_real(v, lambda, steps)?;
            let head = head_integral(v, lambda, &phi, &dphi, delta)?;
            let head_abs: f64 = phi
                .iter()
                .enumerate()
                .take_while(|(i, _)| *i as f64 * h_sol <= delta)
                .map(|(_, p)| p.abs() * h_sol)
                .sum();
            let mut src = 0.0;
            let mut src_abs = 0.0;
            let mut ini = 0.0;
            let mut ini_abs = 0.0;
            for i in 0..=n {
                let w = weights[i] * h_pot;
                let p = phi[i * stride];
                src += w * source[i] * p;
                src_abs += w * (source[i] * p).abs();
                ini += w * f[i] * p;
                ini_abs += w * (f[i] * p).abs();
            }
            let gap = (head - (-src + lambda * ini)).abs();
            let scale = head_abs + src_abs + lambda.abs() * ini_abs;
            let kk = k as f64 * PI;
            let zero_mode = lambda.abs() <= 1e-9 * kk * kk;
            let member = zero_mode
                || match rule {
                    MembershipRule::Relative { tol } => gap <= tol * scale,
                    MembershipRule::Envelope => gap < delta * delta / (32.0 * kk * kk),
                };
            let margin = if scale > 0.0 { gap / scale } else { 0.0 };
            Ok((member, margin))
        })
        .collect::<Result<_>>()?;
    let members: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.0)
        .map(|(i, _)| i + 1)
        .collect();
    let mut profile = Vec::new();
    let mut r = k_max;
    while r >= 1 {
        let count = members.iter().filter(|&&k| k <= r).count();
        profile.push((r as f64, count as f64 / r as f64));
        if r < 16 {
            break;
        }
        r /= 2;
    }
    Ok(ExceptionalSet {
        set: IndexSet::new(members)?,
        profile,
        margins: rows.into_iter().map(|r| r.1).collect(),
        delta,
    })
}
