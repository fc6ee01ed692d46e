use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Rule used to evaluate a sampled potential between grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InterpRule {
    #[default]
    PiecewiseLinear,
    /// `V(x) = samples[i]` on `[x_i, x_{i+1})`; the last sample is used only at `x = 1`.
    PiecewiseConstant,
}

/// Real potential sampled on the uniform grid `x_i = i / n` of `[0, 1]`.
///
/// Immutable after construction; `sup_bound` is cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PotentialRepr<T>",
    into = "PotentialRepr<T>",
    bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>")
)]
pub struct PotentialField<T: Real> {
    samples: Vec<T>,
    rule: InterpRule,
    sup_bound: T,
}

pub const MIN_CELLS: usize = 16;

#[derive(Serialize, Deserialize)]
struct PotentialRepr<T> {
    samples: Vec<T>,
    #[serde(default)]
    rule: InterpRule,
}

impl<T: Real> TryFrom<PotentialRepr<T>> for PotentialField<T> {
    type Error = crate::error::Error;
    fn try_from(r: PotentialRepr<T>) -> Result<Self> {
        Self::new(r.samples, r.rule)
    }
}

impl<T: Real> From<PotentialField<T>> for PotentialRepr<T> {
    fn from(v: PotentialField<T>) -> Self {
        Self {
            samples: v.samples,
            rule: v.rule,
        }
    }
}

impl<T: Real> PotentialField<T> {
    pub fn new(samples: Vec<T>, rule: InterpRule) -> Result<Self> {
        if samples.len() < MIN_CELLS + 1 {
            return invalid(format!(
                "potential needs at least {} samples, got {}",
                MIN_CELLS + 1,
                samples.len()
            ));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid(format!("potential sample {i} is not finite"));
        }
        let sup_bound = samples.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        Ok(Self {
            samples,
            rule,
            sup_bound,
        })
    }

    /// Samples `f` at the `n + 1` grid nodes.
    pub fn from_fn(n: usize, rule: InterpRule, f: impl Fn(T) -> T) -> Result<Self> {
        let nf = T::from_usize_lossy(n);
        let samples = (0..=n).map(|i| f(T::from_usize_lossy(i) / nf)).collect();
        Self::new(samples, rule)
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        Self::new(vec![c; n + 1], InterpRule::PiecewiseLinear)
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::constant(n, T::zero())
    }

    /// Number of grid cells.
    pub fn cells(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn rule(&self) -> InterpRule {
        self.rule
    }

    /// Cached `max |V|` over the samples.
    pub fn sup_bound(&self) -> T {
        self.sup_bound
    }

    pub fn spacing(&self) -> T {
        T::one() / T::from_usize_lossy(self.cells())
    }

    pub fn node(&self, i: usize) -> T {
        T::from_usize_lossy(i) / T::from_usize_lossy(self.cells())
    }

    pub fn grid(&self) -> Vec<T> {
        (0..=self.cells()).map(|i| self.node(i)).collect()
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.cells();
        let s = x.max(T::zero()).min(T::one()) * T::from_usize_lossy(n);
        let i = s.floor().to_usize().unwrap_or(0).min(n - 1);
        match self.rule {
            InterpRule::PiecewiseConstant => {
                if x >= T::one() {
                    self.samples[n]
                } else {
                    self.samples[i]
                }
            }
            InterpRule::PiecewiseLinear => {
                let t = s - T::from_usize_lossy(i);
                self.samples[i] * (T::one() - t) + self.samples[i + 1] * t
            }
        }
    }

    /// Same potential plus a constant.
    pub fn shifted(&self, c: T) -> Self {
        let samples = self.samples.iter().map(|&v| v + c).collect();
        Self::new(samples, self.rule).expect("shift of a valid potential")
    }

    /// Resamples onto a grid with `n` cells through [`Self::eval`].
    pub fn resampled(&self, n: usize) -> Result<Self> {
        Self::from_fn(n, self.rule, |x| self.eval(x))
    }

    pub fn map_samples(&self, f: impl Fn(usize, T) -> T) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i, v))
            .collect();
        Self::new(samples, self.rule)
    }

    pub fn cast<U: Real>(&self) -> PotentialField<U> {
        let samples = self.samples.iter().map(|v| U::lit(v.as_f64())).collect();
        PotentialField::new(samples, self.rule).expect("cast of a valid potential")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_or_non_finite_samples() {
        assert!(PotentialField::<f64>::new(vec![0.0; 10], InterpRule::PiecewiseLinear).is_err());
        let mut s = vec![0.0; 33];
        s[4] = f64::NAN;
        assert!(PotentialField::new(s, InterpRule::PiecewiseLinear).is_err());
    }

    #[test]
    fn sup_bound_is_max_abs_sample() {
        let v = PotentialField::from_fn(32, InterpRule::PiecewiseLinear, |x: f64| 3.0 - 7.0 * x)
            .unwrap();
        assert_eq!(v.sup_bound(), 4.0);
        assert_eq!(v.shifted(1.0).sup_bound(), 4.0);
        assert_eq!(v.shifted(-1.0).sup_bound(), 5.0);
    }

    #[test]
    fn linear_and_constant_interpolation() {
        let v = PotentialField::from_fn(16, InterpRule::PiecewiseLinear, |x: f64| x * x).unwrap();
        let x = 0.5 / 16.0;
        assert!((v.eval(x) - 0.5 / 256.0).abs() < 1e-15);
        let step = PotentialField::from_fn(16, InterpRule::PiecewiseConstant, |x: f64| {
            if x < 0.5 {
                4.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(step.eval(0.4999), 4.0);
        assert_eq!(step.eval(0.5), 0.0);
        assert_eq!(step.eval(1.0), 0.0);
    }
}
