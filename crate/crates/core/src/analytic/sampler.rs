use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{invalid, Result};
use crate::sl::{resolved_steps, shoot, PotentialField};
use crate::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// `psi_1(x0, z) - psi_2(x0, z)`.
    PsiDifference,
    /// `psi_1'(x0, z) - psi_2'(x0, z)`.
    DerivativeDifference,
    /// A formula supplied directly.
    ClosedForm,
}

type Eval = dyn Fn(C64, f64) -> Result<(C64, f64)> + Send + Sync;

/// An entire function of the momentum `z`, evaluated together with a
/// magnitude scale used for relative zero tests.
#[derive(Clone)]
pub struct EntireSampler {
    pub kind: SamplerKind,
    pub x0: f64,
    pub label: String,
    eval: Arc<Eval>,
}

impl fmt::Debug for EntireSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntireSampler")
            .field("kind", &self.kind)
            .field("x0", &self.x0)
            .field("label", &self.label)
            .finish()
    }
}

impl EntireSampler {
    /// Wraps a closed-form function; its scale is taken as 1.
    pub fn closed_form(
        label: impl Into<String>,
        x0: f64,
        f: impl Fn(C64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: SamplerKind::ClosedForm,
            x0,
            label: label.into(),
            eval: Arc::new(move |z, _| Ok((f(z), 1.0))),
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        Ok((self.eval)(z, z.norm())?.0)
    }

    /// Value and scale, resolving the underlying ODE for momenta up to `z_scale`.
    pub fn eval_scaled(&self, z: C64, z_scale: f64) -> Result<(C64, f64)> {
        (self.eval)(z, z_scale.max(z.norm()))
    }
}

fn difference(v1: &Potential, v2: &Potential, x0: f64, kind: SamplerKind) -> Result<EntireSampler> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return invalid(format!("x0 = {x0} must lie in (0, 1)"));
    }
    let (a, b) = (v1.clone(), v2.clone());
    let label = match kind {
        SamplerKind::PsiDifference => "F",
        _ => "G",
    };
    let eval = move |z: C64, z_scale: f64| -> Result<(C64, f64)> {
        let e = z * z;
        let pa = shoot(&a, e, x0, resolved_steps(a.cells(), z_scale))?;
        let pb = shoot(&b, e, x0, resolved_steps(b.cells(), z_scale))?;
        Ok(match kind {
            SamplerKind::PsiDifference => (pa.0 - pb.0, pa.0.norm() + pb.0.norm()),
            _ => (pa.1 - pb.1, pa.1.norm() + pb.1.norm()),
        })
    };
    Ok(EntireSampler {
        kind,
        x0,
        label: label.into(),
        eval: Arc::new(eval),
    })
}

/// `F(z) = psi_1(x0, z) - psi_2(x0, z)` in the momentum convention.
pub fn build_f(
    v1: &PotentialField<f64>,
    v2: &PotentialField<f64>,
    x0: f64,
) -> Result<EntireSampler> {
    difference(v1, v2, x0, SamplerKind::PsiDifference)
}

/// `G(z) = psi_1'(x0, z) - psi_2'(x0, z)`.
pub fn build_g(
    v1: &PotentialField<f64>,
    v2: &PotentialField<f64>,
    x0: f64,
) -> Result<EntireSampler> {
    difference(v1, v2, x0, SamplerKind::DerivativeDifference)
}
