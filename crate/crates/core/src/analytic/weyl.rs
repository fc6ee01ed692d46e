use rayon::prelude::*;

use super::C64;
use crate::error::{invalid, Error, Result};
use crate::sl::{resolved_steps, shoot};
use crate::Potential;

/// `m(z) = psi'(x0, z) / psi(x0, z)` in the momentum convention.
pub fn weyl_m(v: &Potential, x0: f64, z_grid: &[C64]) -> Result<Vec<C64>> {
    if !(x0 > 0.0 && x0 <= 1.0) {
        return invalid(format!("x0 = {x0} must lie in (0, 1]"));
    }
    z_grid
        .par_iter()
        .map(|&z| {
            let (psi, dpsi) = shoot(v, z * z, x0, resolved_steps(v.cells(), z.norm()))?;
            if psi.norm() < 1e-12 * (1.0 + dpsi.norm()) {
                return Err(Error::PoleProximity { re: z.re, im: z.im });
            }
            Ok(dpsi / psi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_weyl_function() {
        let v = Potential::zero(128).unwrap();
        let zs = [C64::new(2.0, 0.5), C64::new(11.0, -3.0), C64::new(0.3, 0.0)];
        let m = weyl_m(&v, 0.7, &zs).unwrap();
        for (z, got) in zs.iter().zip(&m) {
            let want = z * (z * 0.7).cos() / (z * 0.7).sin();
            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0));
        }
    }

    #[test]
    fn pole_is_reported() {
        let v = Potential::zero(128).unwrap();
        let z = C64::new(std::f64::consts::PI / 0.5, 0.0);
        assert!(matches!(
            weyl_m(&v, 0.5, &[z]),
            Err(Error::PoleProximity { .. })
        ));
    }
}
