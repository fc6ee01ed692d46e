//! Initial-value solutions of `-psi'' + V psi = E psi`, `psi(0) = 0`, `psi'(0) = 1`.
//!
//! Integration uses the fourth-order Magnus propagator with two Gauss nodes per
//! step. Each step is the exact exponential of a traceless 2x2 generator, so the
//! Wronskian is preserved to rounding and constant potentials are propagated
//! exactly at any energy.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::potential::{InterpRule, PotentialField};
use crate::error::{invalid, Error, Result};
use crate::scalar::{principal_sqrt, Field, Real};

pub const MIN_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// The parameter was given as the energy `E`.
    Energy,
    /// The parameter was given as a momentum `z` with `E = z^2`.
    Momentum,
}

/// Spectral parameter stored as an energy, remembering how it was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam<T: Real> {
    pub energy: Complex<T>,
    pub convention: Convention,
}

impl<T: Real> SpectralParam<T> {
    pub fn energy(e: Complex<T>) -> Self {
        Self {
            energy: e,
            convention: Convention::Energy,
        }
    }

    pub fn real_energy(e: T) -> Self {
        Self::energy(Complex::new(e, T::zero()))
    }

    pub fn momentum(z: Complex<T>) -> Self {
        Self {
            energy: z * z,
            convention: Convention::Momentum,
        }
    }

    /// Momentum on the principal branch (`Re z >= 0`).
    pub fn to_momentum(&self) -> Complex<T> {
        principal_sqrt(self.energy)
    }
}

/// Complex solution sampled on the uniform solver grid `x_j = j / n_steps`.
#[derive(Debug, Clone)]
pub struct SolutionAtZ<T: Real> {
    pub param: SpectralParam<T>,
    pub psi: Vec<Complex<T>>,
    pub dpsi: Vec<Complex<T>>,
}

impl<T: Real> SolutionAtZ<T> {
    pub fn steps(&self) -> usize {
        self.psi.len() - 1
    }

    pub fn at_end(&self) -> (Complex<T>, Complex<T>) {
        (*self.psi.last().unwrap(), *self.dpsi.last().unwrap())
    }
}

const SQRT3_OVER_6: f64 = 0.288_675_134_594_812_9;
const SQRT3_OVER_12: f64 = 0.144_337_567_297_406_4;

#[inline]
fn magnus_step<T: Real, S: Field<Real = T>>(
    v: &PotentialField<T>,
    x0: T,
    h: T,
    energy: S,
    psi: &mut S,
    dpsi: &mut S,
) {
    let mid = x0 + h * T::lit(0.5);
    let off = h * T::lit(SQRT3_OVER_6);
    let v1 = v.eval(mid - off);
    let v2 = v.eval(mid + off);
    let a = S::from_real(T::lit(SQRT3_OVER_12) * h * h * (v1 - v2));
    let b = S::from_real(T::lit(0.5) * h * (v1 + v2)) - energy * S::from_real(h);
    let hs = S::from_real(h);
    let (c, s) = S::cosh_sinhc(a * a + hs * b);
    let p = *psi;
    let d = *dpsi;
    *psi = (c + s * a) * p + s * hs * d;
    *dpsi = s * b * p + (c - s * a) * d;
}

/// Advances over `[x0, x1]`, splitting at potential nodes when the potential
/// is piecewise constant so that no step straddles a jump.
#[inline]
fn advance<T: Real, S: Field<Real = T>>(
    v: &PotentialField<T>,
    x0: T,
    x1: T,
    energy: S,
    psi: &mut S,
    dpsi: &mut S,
) {
    if v.rule() == InterpRule::PiecewiseConstant {
        let n = T::from_usize_lossy(v.cells());
        let eps = T::lit(1e-12);
        let mut a = x0;
        let mut k = (x0 * n + eps).floor() + T::one();
        loop {
            let node = k / n;
            if node >= x1 - eps {
                break;
            }
            magnus_step(v, a, node - a, energy, psi, dpsi);
            a = node;
            k += T::one();
        }
        magnus_step(v, a, x1 - a, energy, psi, dpsi);
    } else {
        magnus_step(v, x0, x1 - x0, energy, psi, dpsi);
    }
}

/// Integrates from `x = 0` to `x_end` on the uniform grid of `n_steps` cells
/// over `[0, 1]` (plus a final partial step), calling `visit(j, x_j, psi, dpsi)`
/// at every full grid node including `j = 0`. Returns the state at `x_end`.
pub fn march<T: Real, S: Field<Real = T>>(
    v: &PotentialField<T>,
    energy: S,
    x_end: T,
    n_steps: usize,
    visit: impl FnMut(usize, T, S, S),
) -> Result<(S, S)> {
    march_from(
        v,
        energy,
        (S::from_real(T::zero()), S::from_real(T::one())),
        x_end,
        n_steps,
        visit,
    )
}

/// As [`march`], starting from arbitrary Cauchy data `(y(0), y'(0))`.
pub fn march_from<T: Real, S: Field<Real = T>>(
    v: &PotentialField<T>,
    energy: S,
    init: (S, S),
    x_end: T,
    n_steps: usize,
    mut visit: impl FnMut(usize, T, S, S),
) -> Result<(S, S)> {
    let (mut psi, mut dpsi) = init;
    visit(0, T::zero(), psi, dpsi);
    let nf = T::from_usize_lossy(n_steps);
    let eps = T::lit(1e-12);
    let mut x = T::zero();
    let mut j = 0usize;
    while x < x_end - eps {
        let next_node = T::from_usize_lossy(j + 1) / nf;
        let full = next_node <= x_end + eps;
        let x1 = if full { next_node } else { x_end };
        advance(v, x, x1, energy, &mut psi, &mut dpsi);
        if !psi.is_finite() || !dpsi.is_finite() {
            return Err(Error::Overflow { x: x1.as_f64() });
        }
        x = x1;
        if full {
            j += 1;
            visit(j, x, psi, dpsi);
        }
    }
    Ok((psi, dpsi))
}

/// Integrates from `x = 0` on the uniform grid of `n_steps` cells over
/// `[0, x_end]`, calling `visit(j, x_j, psi, dpsi)` at every node.
pub fn march_uniform<T: Real, S: Field<Real = T>>(
    v: &PotentialField<T>,
    energy: S,
    x_end: T,
    n_steps: usize,
    mut visit: impl FnMut(usize, T, S, S),
) -> Result<(S, S)> {
    let (mut psi, mut dpsi) = (S::from_real(T::zero()), S::from_real(T::one()));
    visit(0, T::zero(), psi, dpsi);
    let nf = T::from_usize_lossy(n_steps);
    let mut x = T::zero();
    for j in 1..=n_steps {
        let x1 = x_end * T::from_usize_lossy(j) / nf;
        advance(v, x, x1, energy, &mut psi, &mut dpsi);
        if !psi.is_finite() || !dpsi.is_finite() {
            return Err(Error::Overflow { x: x1.as_f64() });
        }
        x = x1;
        visit(j, x, psi, dpsi);
    }
    Ok((psi, dpsi))
}

/// Step count for momentum modulus `z_abs`: the potential grid (at least
/// [`MIN_STEPS`]) doubled until a wavelength spans at least 32 steps. Doubling
/// keeps step boundaries on potential nodes.
pub fn resolved_steps(cells: usize, z_abs: f64) -> usize {
    let need = (z_abs * 16.0 / std::f64::consts::PI).ceil() as usize;
    let mut n = cells.max(MIN_STEPS);
    while n < need {
        n *= 2;
    }
    n
}

/// `(psi(x_end), psi'(x_end))` without storing the trajectory.
pub fn shoot<T: Real, S: Field<Real = T>>(
    v: &PotentialField<T>,
    energy: S,
    x_end: T,
    n_steps: usize,
) -> Result<(S, S)> {
    march(v, energy, x_end, n_steps, |_, _, _, _| {})
}

/// Complex solution on `[0, 1]` with `n_steps` uniform steps.
pub fn solve_ivp<T: Real>(
    v: &PotentialField<T>,
    p: SpectralParam<T>,
    n_steps: usize,
) -> Result<SolutionAtZ<T>> {
    if n_steps < MIN_STEPS {
        return invalid(format!(
            "n_steps must be at least {MIN_STEPS}, got {n_steps}"
        ));
    }
    if !(p.energy.re.is_finite() && p.energy.im.is_finite()) {
        return invalid("spectral parameter is not finite");
    }
    let mut psi = vec![Complex::new(T::zero(), T::zero()); n_steps + 1];
    let mut dpsi = psi.clone();
    march(v, p.energy, T::one(), n_steps, |j, _, a, b| {
        psi[j] = a;
        dpsi[j] = b;
    })?;
    // exact initial data
    psi[0] = Complex::new(T::zero(), T::zero());
    dpsi[0] = Complex::new(T::one(), T::zero());
    Ok(SolutionAtZ {
        param: p,
        psi,
        dpsi,
    })
}

/// Real solution at a real energy, sampled on the `n_steps` grid.
pub fn solve_real<T: Real>(
    v: &PotentialField<T>,
    e: T,
    n_steps: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let mut psi = vec![T::zero(); n_steps + 1];
    let mut dpsi = vec![T::zero(); n_steps + 1];
    march(v, e, T::one(), n_steps, |j, _, a, b| {
        psi[j] = a;
        dpsi[j] = b;
    })?;
    Ok((psi, dpsi))
}

/// Solution with an arbitrary real or complex energy at a single point.
pub fn psi_at<T: Real>(
    v: &PotentialField<T>,
    p: SpectralParam<T>,
    x: T,
) -> Result<(Complex<T>, Complex<T>)> {
    shoot(v, p.energy, x, v.cells().max(MIN_STEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::sinc_scaled;

    #[test]
    fn free_solution_is_exact() {
        let v = PotentialField::<f64>::zero(64).unwrap();
        let z = Complex::new(std::f64::consts::PI, 0.0);
        let sol = solve_ivp(&v, SpectralParam::momentum(z), 256).unwrap();
        for (j, p) in sol.psi.iter().enumerate() {
            let x = j as f64 / 256.0;
            assert!((p - sinc_scaled(z, x)).norm() < 1e-12);
        }
        assert!(sol.at_end().0.norm() < 1e-8);
    }

    #[test]
    fn constant_potential_closed_form() {
        let c = 3.5;
        let v = PotentialField::<f64>::constant(32, c).unwrap();
        let z = Complex::new(4.0, 1.5);
        let sol = solve_ivp(&v, SpectralParam::momentum(z), 128).unwrap();
        let w = (z * z - c).sqrt();
        for (j, p) in sol.psi.iter().enumerate() {
            let x = j as f64 / 128.0;
            assert!((p - (w * x).sin() / w).norm() < 1e-12);
            assert!((sol.dpsi[j] - (w * x).cos()).norm() < 1e-11);
        }
    }

    #[test]
    fn initial_data_exact_and_short_grids_rejected() {
        let v = PotentialField::<f64>::zero(32).unwrap();
        assert!(solve_ivp(&v, SpectralParam::real_energy(1.0), 32).is_err());
        let sol = solve_ivp(&v, SpectralParam::real_energy(3.0), 64).unwrap();
        assert_eq!(sol.psi[0], Complex::new(0.0, 0.0));
        assert_eq!(sol.dpsi[0], Complex::new(1.0, 0.0));
    }

    #[test]
    fn overflow_reports_position() {
        let v = PotentialField::<f64>::zero(64).unwrap();
        let z = Complex::new(0.0, 2000.0);
        match solve_ivp(&v, SpectralParam::momentum(z), 64) {
            Err(Error::Overflow { x }) => assert!(x > 0.0 && x <= 1.0),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn momentum_round_trip_on_principal_branch() {
        for &(re, im) in &[(3.0, 2.0), (0.5, -4.0), (0.0, 1.0), (7.0, 0.0)] {
            let z = Complex::new(re, im);
            let back = SpectralParam::momentum(z).to_momentum();
            assert!((back - z).norm() < 1e-12, "{z} -> {back}");
        }
    }

    #[test]
    fn piecewise_constant_jump_is_not_straddled() {
        let step = PotentialField::<f64>::from_fn(20, InterpRule::PiecewiseConstant, |x| {
            if x < 0.5 {
                4.0
            } else {
                0.0
            }
        })
        .unwrap();
        let e = 30.0_f64;
        let (p, d) = shoot(&step, e, 0.8, 64).unwrap();
        let k1 = (e - 4.0).sqrt();
        let k2 = e.sqrt();
        let (p5, d5) = ((k1 * 0.5).sin() / k1, (k1 * 0.5).cos());
        let pe = p5 * (k2 * 0.3).cos() + d5 * (k2 * 0.3).sin() / k2;
        let de = -p5 * k2 * (k2 * 0.3).sin() + d5 * (k2 * 0.3).cos();
        assert!((p - pe).abs() < 1e-12 && (d - de).abs() < 1e-11);
    }
}
