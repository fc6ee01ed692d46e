//! Finite-difference time-domain references for the spectral simulators.

use super::schrodinger::SchrodingerConfig;
use super::trace::{FieldKind, TimeTrace};
use super::wave::WaveConfig;
use crate::analytic::C64;
use crate::error::{invalid, Result};
use crate::Potential;

/// Oracle trace with the drift of its conserved quantity (discrete energy for
/// the wave scheme, discrete mass for Crank–Nicolson).
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub trace: TimeTrace,
    /// `max_n |Q_n - Q_0| / |Q_0|`, or the absolute drift when `Q_0 = 0`.
    pub drift: f64,
    pub steps: usize,
    pub dt: f64,
}

fn subsample(cells: usize, n_space: usize) -> Result<usize> {
    if n_space < 8 || cells % n_space != 0 {
        return invalid(format!(
            "oracle grid of {n_space} cells must divide the config grid of {cells} cells"
        ));
    }
    Ok(cells / n_space)
}

/// One-sided fourth-order `u'(0)` and `u'(1)` for `u` vanishing at both ends.
fn endpoint_slopes<T>(u: &[T], h: f64) -> (T, T)
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = u.len() - 1;
    let left = u[1] * (48.0 / (12.0 * h))
        + u[2] * (-36.0 / (12.0 * h))
        + u[3] * (16.0 / (12.0 * h))
        + u[4] * (-3.0 / (12.0 * h));
    let right = u[n - 1] * (-48.0 / (12.0 * h))
        + u[n - 2] * (36.0 / (12.0 * h))
        + u[n - 3] * (-16.0 / (12.0 * h))
        + u[n - 4] * (3.0 / (12.0 * h));
    (left, right)
}

fn node_potential(v: &Potential, n: usize) -> Vec<f64> {
    (0..=n).map(|i| v.eval(i as f64 / n as f64)).collect()
}

fn substeps(t_end: f64, intervals: usize, dt_max: f64, given: Option<usize>) -> Result<usize> {
    let dt_out = t_end / intervals as f64;
    match given {
        Some(n_time) => {
            if n_time % intervals != 0 {
                return invalid(format!(
                    "n_time = {n_time} must be a multiple of the {intervals} output intervals"
                ));
            }
            let sub = n_time / intervals;
            if dt_out / sub as f64 > dt_max * (1.0 + 1e-12) {
                return invalid(format!(
                    "time step exceeds the stability limit {dt_max:.3e}"
                ));
            }
            Ok(sub)
        }
        None => Ok(((dt_out / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize),
    }
}

/// Leapfrog scheme for `u_tt = u_xx - V u` with `dt <= h / 2`; `n_time` total
/// steps, a multiple of the output intervals, or chosen automatically.
pub fn fdtd_wave_oracle(
    cfg: &WaveConfig,
    n_space: usize,
    n_time: Option<usize>,
) -> Result<OracleRun> {
    cfg.validate()?;
    let stride = subsample(cfg.potential.cells(), n_space)?;
    let n = n_space;
    let h = 1.0 / n as f64;
    let intervals = cfg.t_samples - 1;
    let sub = substeps(cfg.t_end, intervals, 0.5 * h, n_time)?;
    let dt = cfg.t_end / (intervals * sub) as f64;
    let vn = node_potential(&cfg.potential, n);
    let apply = |u: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[n] = 0.0;
        for i in 1..n {
            out[i] = (2.0 * u[i] - u[i - 1] - u[i + 1]) / (h * h) + vn[i] * u[i];
        }
    };
    let energy = |new: &[f64], old: &[f64], a_new: &[f64]| {
        let mut kin = 0.0;
        let mut pot = 0.0;
        for i in 1..n {
            let d = (new[i] - old[i]) / dt;
            kin += d * d;
            pot += a_new[i] * old[i];
        }
        0.5 * h * (kin + pot)
    };
    let mut prev: Vec<f64> = (0..=n).map(|i| cfg.f[i * stride]).collect();
    let mut au = vec![0.0; n + 1];
    apply(&prev, &mut au);
    let mut cur: Vec<f64> = prev
        .iter()
        .zip(&au)
        .map(|(u, a)| u - 0.5 * dt * dt * a)
        .collect();
    let mut next = vec![0.0; n + 1];
    let mut left = Vec::with_capacity(cfg.t_samples);
    let mut right = Vec::with_capacity(cfg.t_samples);
    let record = |u: &[f64], left: &mut Vec<C64>, right: &mut Vec<C64>| {
        let (l, r) = endpoint_slopes(u, h);
        left.push(C64::new(l, 0.0));
        right.push(C64::new(r, 0.0));
    };
    record(&prev, &mut left, &mut right);
    apply(&cur, &mut au);
    let e0 = energy(&cur, &prev, &au);
    let mut drift = 0.0f64;
    let total = intervals * sub;
    for step in 1..=total {
        if step % sub == 0 {
            record(&cur, &mut left, &mut right);
        }
        if step == total {
            break;
        }
        // au holds A u^step here
        for i in 1..n {
            next[i] = 2.0 * cur[i] - prev[i] - dt * dt * au[i];
        }
        next[0] = 0.0;
        next[n] = 0.0;
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        apply(&cur, &mut au);
        let e = energy(&cur, &prev, &au);
        drift = drift.max(if e0 != 0.0 {
            ((e - e0) / e0).abs()
        } else {
            (e - e0).abs()
        });
    }
    let t = cfg.time_grid();
    Ok(OracleRun {
        trace: TimeTrace::new(t, left, right, FieldKind::Real)?,
        drift,
        steps: total,
        dt,
    })
}

/// Crank–Nicolson scheme for `i u_t = u_xx - V u + F + 1_delta(t) 1_delta(x)`
/// with time step at most `dt_max`, aligned to the output grid.
pub fn crank_nicolson_oracle(
    cfg: &SchrodingerConfig,
    n_space: usize,
    dt_max: f64,
) -> Result<OracleRun> {
    cfg.validate()?;
    if !(dt_max > 0.0) {
        return invalid("dt must be positive");
    }
    let stride = subsample(cfg.potential.cells(), n_space)?;
    let n = n_space;
    let h = 1.0 / n as f64;
    let intervals = cfg.t_samples - 1;
    let sub = substeps(cfg.t_end, intervals, dt_max, None)?;
    let dt = cfg.t_end / (intervals * sub) as f64;
    let vn = node_potential(&cfg.potential, n);
    let src = cfg.source_samples();
    let source: Vec<f64> = (0..=n).map(|i| src[i * stride]).collect();
    // probe profile as cell averages of 1_[0, delta]
    let chi: Vec<f64> = (0..=n)
        .map(|i| {
            let x = i as f64 * h;
            let lo = (x - 0.5 * h).max(0.0);
            let hi = (x + 0.5 * h).min(cfg.delta);
            ((hi - lo).max(0.0) / h).min(1.0)
        })
        .collect();
    let i_unit = C64::new(0.0, 1.0);
    let c = 0.5 * dt;
    // interior system (I - i c H) u^{n+1} = (I + i c H) u^n - i dt s
    let m = n - 1;
    let diag: Vec<C64> = (1..n)
        .map(|i| 1.0 - i_unit * c * (2.0 / (h * h) + vn[i]))
        .collect();
    let off = i_unit * c / (h * h);
    let mut cp = vec![C64::new(0.0, 0.0); m];
    let mut den = vec![C64::new(0.0, 0.0); m];
    den[0] = diag[0];
    cp[0] = off / den[0];
    for i in 1..m {
        den[i] = diag[i] - off * cp[i - 1];
        cp[i] = off / den[i];
    }
    let mut u: Vec<C64> = (0..=n).map(|i| cfg.f[i * stride]).collect();
    u[0] = C64::new(0.0, 0.0);
    u[n] = C64::new(0.0, 0.0);
    let mass = |u: &[C64]| h * u.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let m0 = mass(&u);
    let mut drift = 0.0f64;
    let mut rhs = vec![C64::new(0.0, 0.0); m];
    let mut left = vec![];
    let mut right = vec![];
    let record = |u: &[C64], left: &mut Vec<C64>, right: &mut Vec<C64>| {
        let (l, r) = endpoint_slopes(u, h);
        left.push(l);
        right.push(r);
    };
    record(&u, &mut left, &mut right);
    let total = intervals * sub;
    for step in 0..total {
        let (t0, t1) = (step as f64 * dt, (step + 1) as f64 * dt);
        let w = ((t1.min(cfg.delta) - t0).max(0.0)) / dt;
        for i in 1..n {
            let hu = (2.0 * u[i] - u[i - 1] - u[i + 1]) / (h * h) + vn[i] * u[i];
            rhs[i - 1] = u[i] + i_unit * c * hu - i_unit * dt * (source[i] + w * chi[i]);
        }
        // forward sweep then back substitution
        rhs[0] /= den[0];
        for i in 1..m {
            rhs[i] = (rhs[i] - off * rhs[i - 1]) / den[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] = rhs[i] - cp[i] * rhs[i + 1];
        }
        u[1..n].copy_from_slice(&rhs);
        let mk = mass(&u);
        drift = drift.max(if m0 != 0.0 {
            ((mk - m0) / m0).abs()
        } else {
            (mk - m0).abs()
        });
        if (step + 1) % sub == 0 {
            record(&u, &mut left, &mut right);
        }
    }
    Ok(OracleRun {
        trace: TimeTrace::new(cfg.time_grid(), left, right, FieldKind::Complex)?,
        drift,
        steps: total,
        dt,
    })
}
