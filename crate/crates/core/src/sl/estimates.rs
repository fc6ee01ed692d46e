//! Empirical witnesses for eigenvalue asymptotics and the pointwise bounds on
//! `psi(x, z)`, plus expansion coefficients in the eigenbasis.

use num_complex::Complex;
use rayon::prelude::*;

use super::eigen::{EigenPair, EigenSolver};
use super::ivp::{march, resolved_steps};
use super::potential::PotentialField;
use crate::error::{invalid, Error, Result};
use crate::quad::trapezoid_product;
use crate::scalar::{sinc_scaled, Real};

/// Which pointwise estimate to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// `|psi - sin(zx)/z| (1 + |z|^2) e^{-|Im z| x}`.
    Value,
    /// `|psi' - cos(zx)| (1 + |z|) e^{-|Im z| x}`.
    Derivative,
}

/// `k |sqrt(lambda_k) - k pi|` for `k = 2..=K`.
pub fn asymptotic_profile<T: Real>(v: &PotentialField<T>, k_max: usize) -> Result<Vec<(usize, T)>> {
    if k_max < 2 {
        return invalid("asymptotic witness needs K >= 2");
    }
    let vals = EigenSolver::new(v)?.eigenvalues(k_max)?;
    let mut out = Vec::with_capacity(k_max - 1);
    for (i, &l) in vals.iter().enumerate().skip(1) {
        let k = i + 1;
        if l <= T::zero() {
            return Err(Error::ShiftRequired {
                index: k,
                lambda: l.as_f64(),
            });
        }
        let kk = T::from_usize_lossy(k);
        out.push((k, kk * (l.sqrt() - kk * T::PI()).abs()));
    }
    Ok(out)
}

/// Supremum over `2 <= k <= K` of `k |sqrt(lambda_k) - k pi|`.
pub fn verify_asymptotics<T: Real>(v: &PotentialField<T>, k_max: usize) -> Result<T> {
    Ok(asymptotic_profile(v, k_max)?
        .into_iter()
        .fold(T::zero(), |m, (_, w)| m.max(w)))
}

/// Largest weighted deviation of a single potential over the momentum grid.
pub fn psi_estimate_constant<T: Real>(
    v: &PotentialField<T>,
    z_grid: &[Complex<T>],
    kind: EstimateKind,
) -> Result<T> {
    if z_grid
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return invalid("z grid must be finite");
    }
    let worst = z_grid
        .par_iter()
        .map(|&z| -> Result<T> {
            let n = resolved_steps(v.cells(), z.norm().as_f64());
            let az = z.norm();
            let weight = match kind {
                EstimateKind::Value => T::one() + az * az,
                EstimateKind::Derivative => T::one() + az,
            };
            let mut m = T::zero();
            march(
                v,
                z * z,
                T::one(),
                n,
                |j, x, psi: Complex<T>, dpsi: Complex<T>| {
                    if j == 0 {
                        return;
                    }
                    let free = match kind {
                        EstimateKind::Value => sinc_scaled(z, x),
                        EstimateKind::Derivative => (z * x).cos(),
                    };
                    let got = match kind {
                        EstimateKind::Value => psi,
                        EstimateKind::Derivative => dpsi,
                    };
                    let d = (got - free).norm() * weight * (-(z.im.abs()) * x).exp();
                    if d > m {
                        m = d;
                    }
                },
            )?;
            Ok(m)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(worst.into_iter().fold(T::zero(), |a, b| a.max(b)))
}

/// Smallest empirical constant valid for both potentials over `z_grid`.
pub fn verify_psi_estimates<T: Real>(
    v1: &PotentialField<T>,
    v2: &PotentialField<T>,
    z_grid: &[Complex<T>],
    kind: EstimateKind,
) -> Result<T> {
    let a = psi_estimate_constant(v1, z_grid, kind)?;
    let b = psi_estimate_constant(v2, z_grid, kind)?;
    Ok(a.max(b))
}

/// Coefficients `a_k = (f, phi_k) / ||phi_k||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoeffs<T: Real> {
    pub coeffs: Vec<T>,
    /// Raw inner products `(f, phi_k)`.
    pub inner: Vec<T>,
    /// Set when the grid has fewer than `8 K` cells.
    pub under_resolved: bool,
}

/// Coefficients against precomputed eigenpairs sharing the grid of `f`.
pub fn coeffs_from_pairs<T: Real>(f: &[T], pairs: &[EigenPair<T>]) -> Result<ExpansionCoeffs<T>> {
    let mut coeffs = Vec::with_capacity(pairs.len());
    let mut inner = Vec::with_capacity(pairs.len());
    for p in pairs {
        if p.phi.len() != f.len() {
            return invalid(format!(
                "f has {} samples but eigenfunctions have {}",
                f.len(),
                p.phi.len()
            ));
        }
        let h = T::one() / T::from_usize_lossy(f.len() - 1);
        let ip = trapezoid_product(f, &p.phi, h);
        inner.push(ip);
        coeffs.push(ip / p.norm_sq);
    }
    let under_resolved = f.len() - 1 < 8 * pairs.len();
    Ok(ExpansionCoeffs {
        coeffs,
        inner,
        under_resolved,
    })
}

/// Expansion coefficients of `f` (sampled on the potential grid) in the first `K` eigenfunctions.
pub fn expansion_coeffs<T: Real>(
    f: &[T],
    v: &PotentialField<T>,
    k: usize,
) -> Result<ExpansionCoeffs<T>> {
    if f.len() != v.cells() + 1 {
        return invalid("f must be sampled on the potential grid");
    }
    let scale = f
        .iter()
        .fold(T::zero(), |m, x| m.max(x.abs()))
        .max(T::min_positive_value());
    let tol = T::lit(1e-10) * scale;
    if f[0].abs() > tol || f[f.len() - 1].abs() > tol {
        return invalid("f must vanish at both endpoints");
    }
    let pairs = EigenSolver::new(v)?.pairs(k)?;
    coeffs_from_pairs(f, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl::potential::InterpRule;
    use std::f64::consts::PI;

    #[test]
    fn free_potential_has_zero_witnesses() {
        let v = PotentialField::<f64>::zero(256).unwrap();
        assert!(verify_asymptotics(&v, 12).unwrap() < 1e-9);
        let zs: Vec<Complex<f64>> = (1..20)
            .map(|r| Complex::from_polar(r as f64 * 2.0, 0.7))
            .collect();
        let c = verify_psi_estimates(&v, &v, &zs, EstimateKind::Value).unwrap();
        assert!(c < 1e-9, "{c}");
    }

    #[test]
    fn unit_potential_asymptotics() {
        let v = PotentialField::<f64>::constant(512, 1.0).unwrap();
        let w = verify_asymptotics(&v, 30).unwrap();
        assert!(w <= 0.165 && w > 0.15, "{w}");
    }

    #[test]
    fn negative_second_eigenvalue_requires_shift() {
        let v = PotentialField::<f64>::constant(256, -60.0).unwrap();
        assert!(matches!(
            verify_asymptotics(&v, 4),
            Err(Error::ShiftRequired { index: 2, .. })
        ));
    }

    #[test]
    fn unit_potential_value_constant_is_bounded() {
        let v = PotentialField::<f64>::constant(256, 1.0).unwrap();
        let zs: Vec<Complex<f64>> = (1..=100).map(|r| Complex::new(r as f64, 0.0)).collect();
        let c = verify_psi_estimates(&v, &v, &zs, EstimateKind::Value).unwrap();
        assert!(c > 0.1 && c <= 2.0, "{c}");
    }

    #[test]
    fn sine_expansion_is_a_unit_vector() {
        let n = 512;
        let v = PotentialField::<f64>::zero(n).unwrap();
        let f: Vec<f64> = (0..=n).map(|i| (PI * i as f64 / n as f64).sin()).collect();
        let a = expansion_coeffs(&f, &v, 6).unwrap();
        assert!((a.coeffs[0] - PI).abs() < 1e-8);
        for c in &a.coeffs[1..] {
            assert!(c.abs() < 1e-8);
        }
        assert!(!a.under_resolved);
        let g: Vec<f64> = (0..=n)
            .map(|i| (2.0 * PI * i as f64 / n as f64).sin())
            .collect();
        let b = expansion_coeffs(&g, &v, 4).unwrap();
        assert!((b.coeffs[1] - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn eigenfunction_expands_to_itself() {
        let v = PotentialField::<f64>::from_fn(512, InterpRule::PiecewiseLinear, |x| 4.0 * x * x)
            .unwrap();
        let pairs = EigenSolver::new(&v).unwrap().pairs(8).unwrap();
        let a = coeffs_from_pairs(&pairs[2].phi, &pairs).unwrap();
        for (i, c) in a.coeffs.iter().enumerate() {
            let want = if i == 2 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-5, "{i}: {c}");
        }
    }

    #[test]
    fn under_resolution_is_flagged() {
        let v = PotentialField::<f64>::zero(64).unwrap();
        let f: Vec<f64> = (0..=64).map(|i| (PI * i as f64 / 64.0).sin()).collect();
        assert!(expansion_coeffs(&f, &v, 10).unwrap().under_resolved);
    }
}
