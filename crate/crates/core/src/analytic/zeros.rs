use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EntireSampler, C64};
use crate::error::{invalid, Error, Result};
use crate::quad::gk15_adaptive;

/// Horizontal offset of the vertical contour segment: the half-disk is
/// indented to `Re z >= -CONTOUR_OFFSET`, so zeros on the imaginary axis count.
pub const CONTOUR_OFFSET: f64 = 1e-3;

const DEGENERATE_PROBES: usize = 32;
const DEGENERATE_REL: f64 = 1e-13;
const ACCEPT_RESIDUAL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub radius: f64,
    pub count: usize,
    /// Distance of the contour integral from the nearest integer.
    pub contour_residual: f64,
}

impl ZeroCount {
    pub fn n_over_r(&self) -> f64 {
        self.count as f64 / self.radius
    }
}

/// Declares the sampler degenerate when every seeded probe in the half-disk
/// is negligible against its own scale.
fn check_not_identically_zero(f: &EntireSampler, r: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    for _ in 0..DEGENERATE_PROBES {
        let rho = r * rng.gen::<f64>().sqrt();
        let th = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
        let z = C64::from_polar(rho, th);
        let (v, scale) = f.eval_scaled(z, r)?;
        if v.norm() >= DEGENERATE_REL * scale.max(f64::MIN_POSITIVE) {
            return Ok(());
        }
    }
    Err(Error::DegenerateSampler)
}

/// `F'(z)/F(z)` with a central difference of step `1e-5 (1 + |z|)`.
fn log_derivative(f: &EntireSampler, z: C64, r: f64) -> Result<C64> {
    let (v, scale) = f.eval_scaled(z, r)?;
    if v.norm() <= DEGENERATE_REL * scale || v == C64::new(0.0, 0.0) {
        return Err(Error::ZeroOnContour { re: z.re, im: z.im });
    }
    let h = 1e-5 * (1.0 + z.norm());
    let fp = f.eval_scaled(z + h, r)?.0;
    let fm = f.eval_scaled(z - h, r)?.0;
    Ok((fp - fm) / (2.0 * h) / v)
}

/// Number of zeros in `{Re z >= 0, |z| < r}` by the argument principle over
/// the rightward-indented half-disk boundary.
pub fn count_zeros_halfplane(f: &EntireSampler, r: f64, n_quad: usize) -> Result<ZeroCount> {
    if !(r > 10.0 * CONTOUR_OFFSET) || !r.is_finite() {
        return invalid(format!("radius {r} too small or not finite"));
    }
    check_not_identically_zero(f, r)?;
    let eta = CONTOUR_OFFSET;
    let nodes = n_quad.max(8 * r.ceil() as usize);
    let panels = nodes.div_ceil(15);
    let th = std::f64::consts::FRAC_PI_2 + (eta / r).asin();
    let y_top = (r * r - eta * eta).sqrt();
    // the total integral must land within a small fraction of an integer
    let tol = 1e-4 * std::f64::consts::TAU;

    let arc = gk15_adaptive(
        |t| {
            let z = C64::from_polar(r, t);
            Ok::<_, Error>(log_derivative(f, z, r)? * (C64::i() * z))
        },
        -th,
        th,
        panels,
        tol,
        14,
    )?;
    let side = gk15_adaptive(
        |y| {
            let z = C64::new(-eta, y);
            Ok::<_, Error>(log_derivative(f, z, r)? * C64::i())
        },
        y_top,
        -y_top,
        panels,
        tol,
        14,
    )?;
    let winding = (arc.value + side.value) / C64::new(0.0, std::f64::consts::TAU);
    let nearest = winding.re.round();
    let residual = (winding - nearest).norm();
    if residual >= ACCEPT_RESIDUAL || nearest < 0.0 {
        return Err(Error::CountRejected {
            radius: r,
            residual,
        });
    }
    Ok(ZeroCount {
        radius: r,
        count: nearest as usize,
        contour_residual: residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub counts: Vec<ZeroCount>,
    /// `n(r)/r` at the largest radius.
    pub plateau: f64,
    pub monotone: bool,
}

/// Zero counts over `radii`, perturbing a radius slightly when its count is
/// rejected or a zero sits on the contour.
pub fn density_profile(f: &EntireSampler, radii: &[f64]) -> Result<DensityProfile> {
    if radii.is_empty() {
        return invalid("density profile needs at least one radius");
    }
    let mut counts = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut last_err = None;
        let mut got = None;
        for attempt in 0..8 {
            let j = attempt as f64;
            let sign = if attempt % 2 == 0 { 1.0 } else { -1.0 };
            let rr = r * (1.0 + sign * 2e-3 * (j / 2.0).ceil());
            match count_zeros_halfplane(f, rr, 0) {
                Ok(c) => {
                    got = Some(c);
                    break;
                }
                Err(e @ (Error::CountRejected { .. } | Error::ZeroOnContour { .. })) => {
                    last_err = Some(e)
                }
                Err(e) => return Err(e),
            }
        }
        match got {
            Some(c) => counts.push(c),
            None => return Err(last_err.unwrap()),
        }
    }
    let monotone = counts.windows(2).all(|w| w[1].count >= w[0].count);
    let plateau = counts.last().unwrap().n_over_r();
    Ok(DensityProfile {
        counts,
        plateau,
        monotone,
    })
}
