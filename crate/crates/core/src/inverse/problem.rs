use serde::{Deserialize, Serialize};

use super::IndexSet;
use crate::error::{invalid, Result};
use crate::sl::{InterpRule, SpectralDatum};
use crate::Potential;

pub const PROBLEM_SCHEMA: u32 = 1;

/// Known potential on `[1 - eps, 1]`, sampled uniformly across that interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub epsilon: f64,
    pub values: Vec<f64>,
}

impl Tail {
    pub fn new(epsilon: f64, values: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("epsilon = {epsilon} must lie in (0, 1)"));
        }
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return invalid("tail needs at least two finite samples");
        }
        Ok(Self { epsilon, values })
    }

    /// Tail of `v` with `samples` points.
    pub fn of(v: &Potential, epsilon: f64, samples: usize) -> Result<Self> {
        let start = 1.0 - epsilon;
        let m = samples.max(2) - 1;
        let values = (0..=m)
            .map(|j| v.eval(start + epsilon * j as f64 / m as f64))
            .collect();
        Self::new(epsilon, values)
    }

    pub fn start(&self) -> f64 {
        1.0 - self.epsilon
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.values.len() - 1;
        let s = ((x - self.start()) / self.epsilon).clamp(0.0, 1.0) * m as f64;
        let i = (s.floor() as usize).min(m - 1);
        let u = s - i as f64;
        self.values[i] * (1.0 - u) + self.values[i + 1] * u
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            epsilon: self.epsilon,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

/// Unknowns `theta_j = V(y_j)` at `y_j = j (1 - eps) / m`, `j < m`; the node
/// `y_m = 1 - eps` carries the known tail value. The potential on the
/// inversion grid interpolates the coarse nodes linearly below `1 - eps` and
/// copies the tail above.
#[derive(Debug, Clone, PartialEq)]
pub struct Parametrization {
    pub cells: usize,
    pub unknowns: usize,
    pub tail: Tail,
}

impl Parametrization {
    pub fn new(cells: usize, unknowns: usize, tail: Tail) -> Result<Self> {
        if unknowns < 2 {
            return invalid("need at least two unknowns");
        }
        Ok(Self {
            cells,
            unknowns,
            tail,
        })
    }

    fn coarse_step(&self) -> f64 {
        self.tail.start() / self.unknowns as f64
    }

    /// Coarse-grid hat weights `(j, w)` at `x < 1 - eps`.
    fn hat_weights(&self, x: f64) -> [(usize, f64); 2] {
        let s = x / self.coarse_step();
        let j = (s.floor() as usize).min(self.unknowns - 1);
        let u = s - j as f64;
        [(j, 1.0 - u), (j + 1, u)]
    }

    pub fn potential(&self, theta: &[f64]) -> Result<Potential> {
        if theta.len() != self.unknowns {
            return invalid(format!(
                "expected {} unknowns, got {}",
                self.unknowns,
                theta.len()
            ));
        }
        let start = self.tail.start();
        let anchor = self.tail.eval(start);
        let samples = (0..=self.cells)
            .map(|i| {
                let x = i as f64 / self.cells as f64;
                if x >= start {
                    self.tail.eval(x)
                } else {
                    self.hat_weights(x)
                        .iter()
                        .map(|&(j, w)| w * if j < self.unknowns { theta[j] } else { anchor })
                        .sum()
                }
            })
            .collect();
        Potential::new(samples, InterpRule::PiecewiseLinear)
    }

    /// Sample-space image of each unknown.
    pub fn basis(&self) -> Vec<Vec<f64>> {
        let start = self.tail.start();
        let mut cols = vec![vec![0.0; self.cells + 1]; self.unknowns];
        for i in 0..=self.cells {
            let x = i as f64 / self.cells as f64;
            if x >= start {
                continue;
            }
            for (j, w) in self.hat_weights(x) {
                if j < self.unknowns {
                    cols[j][i] += w;
                }
            }
        }
        cols
    }

    /// Point values of `v` at the coarse nodes.
    pub fn project(&self, v: &Potential) -> Vec<f64> {
        (0..self.unknowns)
            .map(|j| v.eval(j as f64 * self.coarse_step()))
            .collect()
    }

    /// Second differences of `(theta, tail(1 - eps))` and the constant part
    /// contributed by the anchor.
    pub fn second_difference(&self, theta: &[f64]) -> Vec<f64> {
        let anchor = self.tail.eval(self.tail.start());
        let at = |j: usize| if j < self.unknowns { theta[j] } else { anchor };
        (1..self.unknowns)
            .map(|j| at(j - 1) - 2.0 * at(j) + at(j + 1))
            .collect()
    }

    pub fn second_difference_matrix(&self) -> nalgebra::DMatrix<f64> {
        let m = self.unknowns;
        let mut d = nalgebra::DMatrix::zeros(m - 1, m);
        for r in 0..m - 1 {
            let j = r + 1;
            d[(r, j - 1)] = 1.0;
            d[(r, j)] = -2.0;
            if j + 1 < m {
                d[(r, j + 1)] = 1.0;
            }
        }
        d
    }
}

fn default_schema() -> u32 {
    PROBLEM_SCHEMA
}
fn default_grid() -> usize {
    256
}
fn default_unknowns() -> usize {
    64
}
fn default_derivative_weight() -> f64 {
    1.0
}

/// Partial spectral data plus the known tail; serialized as the problem JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionProblem {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub data: Vec<SpectralDatum>,
    pub epsilon: f64,
    /// Samples of `V` spread uniformly over `[1 - eps, 1]`.
    pub tail: Vec<f64>,
    /// Tikhonov weight; `None` selects `1e-6` times the squared initial weighted residual.
    #[serde(default)]
    pub reg: Option<f64>,
    /// Per-datum weights, applied to both the eigenvalue and the derivative row.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Extra factor on derivative rows (which are already multiplied by `k`).
    #[serde(default = "default_derivative_weight")]
    pub derivative_weight: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_unknowns")]
    pub unknowns: usize,
}

impl ReconstructionProblem {
    pub fn new(data: Vec<SpectralDatum>, tail: Tail) -> Self {
        Self {
            schema_version: PROBLEM_SCHEMA,
            data,
            epsilon: tail.epsilon,
            tail: tail.values,
            reg: None,
            weights: None,
            derivative_weight: 1.0,
            grid: default_grid(),
            unknowns: default_unknowns(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != PROBLEM_SCHEMA {
            return invalid(format!(
                "unsupported problem schema {}",
                self.schema_version
            ));
        }
        if self.data.is_empty() {
            return invalid("no data");
        }
        Tail::new(self.epsilon, self.tail.clone())?;
        let s = self.index_set()?;
        if s.len() != self.data.len() {
            return invalid("duplicate datum indices");
        }
        if let Some(w) = &self.weights {
            if w.len() != self.data.len() || w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return invalid("weights must be finite, non-negative and one per datum");
            }
        }
        if let Some(r) = self.reg {
            if !(r >= 0.0 && r.is_finite()) {
                return invalid("reg must be finite and non-negative");
            }
        }
        if !(self.derivative_weight >= 0.0 && self.derivative_weight.is_finite()) {
            return invalid("derivative_weight must be finite and non-negative");
        }
        if self.grid < 64 {
            return invalid("inversion grid needs at least 64 cells");
        }
        if 2 * self.data.len() < self.unknowns {
            return invalid(format!(
                "{} data for {} unknowns: the weighted system is too underdetermined",
                2 * self.data.len(),
                self.unknowns
            ));
        }
        Ok(())
    }

    pub fn index_set(&self) -> Result<IndexSet> {
        IndexSet::new(self.data.iter().map(|d| d.index).collect())
    }

    pub fn tail(&self) -> Result<Tail> {
        Tail::new(self.epsilon, self.tail.clone())
    }

    pub fn parametrization(&self) -> Result<Parametrization> {
        Parametrization::new(self.grid, self.unknowns, self.tail()?)
    }

    /// `v` below `1 - eps` (sampled at the coarse nodes) joined to the known tail.
    pub fn initial_guess(&self, v: &Potential) -> Result<Potential> {
        let p = self.parametrization()?;
        p.potential(&p.project(v))
    }

    /// Data sorted by index, paired with their datum weights.
    pub(crate) fn sorted(&self) -> Vec<(SpectralDatum, f64)> {
        let mut v: Vec<(SpectralDatum, f64)> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, d)| (*d, self.weights.as_ref().map_or(1.0, |w| w[i])))
            .collect();
        v.sort_by_key(|(d, _)| d.index);
        v
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub v_hat: Potential,
    /// Objective after each accepted step, starting with the initial value.
    pub residual_history: Vec<f64>,
    /// Weighted data misfit `||W r||^2` of the returned iterate.
    pub data_misfit: f64,
    /// `||D^2 theta||^2` of the returned iterate.
    pub regularity_penalty: f64,
    pub iterations: usize,
    pub final_reg: f64,
    /// Set when the line search gave up; the best iterate is returned.
    pub stagnated: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parametrization_respects_the_tail() {
        let tail = Tail::new(0.3, vec![1.0, 2.0, 3.0]).unwrap();
        let p = Parametrization::new(100, 7, tail).unwrap();
        let v = p.potential(&[0.0; 7]).unwrap();
        assert!((v.eval(0.7) - 1.0).abs() < 1e-12);
        assert!((v.eval(0.85) - 2.0).abs() < 1e-12);
        assert_eq!(v.samples()[100], 3.0);
        // basis columns reproduce the linear map
        let theta: Vec<f64> = (0..7).map(|j| j as f64).collect();
        let w = p.potential(&theta).unwrap();
        let base = p.basis();
        for i in 0..=100 {
            let lin: f64 = base.iter().zip(&theta).map(|(b, t)| b[i] * t).sum();
            assert!((w.samples()[i] - v.samples()[i] - lin).abs() < 1e-12);
        }
    }

    #[test]
    fn problem_json_round_trip_and_validation() {
        let data = (1..=40)
            .map(|k| SpectralDatum {
                index: k,
                lambda: 1.0,
                dphi_at_1: 1.0,
            })
            .collect();
        let p = ReconstructionProblem::new(data, Tail::new(0.3, vec![0.0, 0.0]).unwrap());
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(ReconstructionProblem::from_json(&text).unwrap(), p);
        let mut q = p.clone();
        q.data.truncate(10);
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.epsilon = 1.5;
        assert!(q.validate().is_err());
    }
}
