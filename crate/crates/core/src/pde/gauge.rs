use serde::{Deserialize, Serialize};

use super::basis::second_derivative;
use super::schrodinger::{schrodinger_trace, SchrodingerConfig};
use crate::analytic::C64;
use crate::error::{invalid, Result};

/// Trace difference between `(f, F)` and `(f + g, F - g'' + V g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    /// Largest deviation of either trace difference from its time mean.
    pub variation: f64,
    pub left_offset: C64,
    pub right_offset: C64,
    /// `g'(0)` and `g'(1)` from one-sided differences, the untruncated offsets.
    pub slope_left: f64,
    pub slope_right: f64,
}

fn time_mean(y: &[C64]) -> C64 {
    let n = y.len() - 1;
    let mut s = 0.5 * (y[0] + y[n]);
    for v in &y[1..n] {
        s += v;
    }
    s / n as f64
}

/// Runs both configurations through the spectral simulator.
pub fn gauge_pair_check(base: &SchrodingerConfig, g: &[f64]) -> Result<GaugeReport> {
    base.validate()?;
    let n = base.potential.cells();
    if g.len() != n + 1 {
        return invalid("g must be sampled on the potential grid");
    }
    let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if g[0].abs() > 1e-12 * scale.max(1.0) || g[n].abs() > 1e-12 * scale.max(1.0) {
        return invalid("g must vanish at both endpoints");
    }
    let g2 = second_derivative(g)?;
    let src1 = base.source_samples();
    let mut shifted = base.clone();
    shifted.f = base.f.iter().zip(g).map(|(a, b)| a + b).collect();
    shifted.source = (0..=n)
        .map(|i| {
            let x = i as f64 / n as f64;
            src1[i] - g2[i] + base.potential.eval(x) * g[i]
        })
        .collect();
    let t1 = schrodinger_trace(base)?;
    let t2 = schrodinger_trace(&shifted)?;
    let d = t2.difference(&t1)?;
    let (ml, mr) = (time_mean(&d.left), time_mean(&d.right));
    let variation = d
        .left
        .iter()
        .map(|z| (z - ml).norm())
        .chain(d.right.iter().map(|z| (z - mr).norm()))
        .fold(0.0f64, f64::max);
    let h = 1.0 / n as f64;
    let slope_left =
        (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / (12.0 * h);
    let slope_right = (25.0 * g[n] - 48.0 * g[n - 1] + 36.0 * g[n - 2] - 16.0 * g[n - 3]
        + 3.0 * g[n - 4])
        / (12.0 * h);
    Ok(GaugeReport {
        variation,
        left_offset: ml,
        right_offset: mr,
        slope_left,
        slope_right,
    })
}
