use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EntireSampler, C64};
use crate::error::{invalid, Result};
use crate::quad::gauss_legendre;

const PANEL: f64 = 0.25;
const STABLE_REL: f64 = 0.01;

/// `int_{-R}^{R} log+|F(x)| / (1 + x^2) dx` with `log+ t = max(log t, 0)`.
pub fn logplus_integral(f: &EntireSampler, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid("R must be positive and finite");
    }
    let panels = (2.0 * r / PANEL).ceil() as usize;
    let w = 2.0 * r / panels as f64;
    let (x, gw) = gauss_legendre(8);
    let parts: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let c = -r + w * (p as f64 + 0.5);
            let mut s = 0.0;
            for (t, wt) in x.iter().zip(&gw) {
                let xx = c + 0.5 * w * t;
                let v = f.eval_scaled(C64::new(xx, 0.0), r)?.0.norm();
                if v > 1.0 {
                    s += wt * v.ln() / (1.0 + xx * xx);
                }
            }
            Ok(0.5 * w * s)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPlusProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Relative change between the last two radii.
    pub last_change: f64,
    pub converged: bool,
}

/// Growth integral over increasing radii; convergence means the last two
/// values agree within 1 % (two zeros count as converged).
pub fn logplus_profile(f: &EntireSampler, radii: &[f64]) -> Result<LogPlusProfile> {
    if radii.len() < 2 {
        return invalid("convergence witness needs at least two radii");
    }
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| logplus_integral(f, r))
        .collect::<Result<_>>()?;
    let (a, b) = (values[values.len() - 2], values[values.len() - 1]);
    let last_change = if a == 0.0 && b == 0.0 {
        0.0
    } else {
        (b - a).abs() / a.abs().max(b.abs())
    };
    Ok(LogPlusProfile {
        radii: radii.to_vec(),
        values,
        last_change,
        converged: last_change <= STABLE_REL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_function_gives_zero() {
        let f =
            EntireSampler::closed_form("sin z / z", 1.0, |z| crate::scalar::sinc_scaled(z, 1.0));
        assert_eq!(logplus_integral(&f, 50.0).unwrap(), 0.0);
    }

    #[test]
    fn exponential_growth_is_flagged() {
        let f = EntireSampler::closed_form("e^|z|", 1.0, |z| C64::new(z.norm().exp(), 0.0));
        let p = logplus_profile(&f, &[100.0, 400.0]).unwrap();
        // log(1 + R^2) exactly
        assert!((p.values[0] - (1.0 + 1e4f64).ln()).abs() < 1e-6);
        assert!(!p.converged);
    }
}
