//! Potentials, grid functions and index sets as they appear in spec files.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use slip::inverse::IndexSet;
use slip::sl::InterpRule;
use slip::Potential;

fn five() -> f64 {
    5.0
}
fn one() -> f64 {
    1.0
}
fn center() -> f64 {
    0.3
}
fn width() -> f64 {
    50.0
}
fn bump_hi() -> f64 {
    0.6
}
fn six() -> usize {
    6
}

/// A potential on `[0, 1]`, sampled on the requested grid unless it
/// carries its own samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-width (x - center)^2)`.
    Gaussian {
        #[serde(default = "five")]
        amplitude: f64,
        #[serde(default = "center")]
        center: f64,
        #[serde(default = "width")]
        width: f64,
    },
    /// Smooth bump supported in `[lo, hi]` with peak `amplitude`.
    CompactBump {
        #[serde(default = "five")]
        amplitude: f64,
        #[serde(default)]
        lo: f64,
        #[serde(default = "bump_hi")]
        hi: f64,
    },
    /// `value` on `[0, until)`, zero after, piecewise constant.
    Step {
        value: f64,
        until: f64,
    },
    Samples {
        values: Vec<f64>,
        #[serde(default)]
        rule: InterpRule,
    },
    /// Two-column `(x, V)` CSV on a uniform grid.
    Csv {
        path: PathBuf,
        #[serde(default)]
        rule: InterpRule,
    },
    /// Random cosine series with sup norm `amplitude` drawn from the run's generator.
    Random {
        #[serde(default = "five")]
        amplitude: f64,
        #[serde(default = "six")]
        modes: usize,
    },
}

impl PotentialSpec {
    pub fn build(&self, cells: usize, rng: &mut ChaCha8Rng) -> Result<Potential> {
        let lin = InterpRule::PiecewiseLinear;
        let v = match self {
            PotentialSpec::Zero => Potential::zero(cells)?,
            PotentialSpec::Constant { value } => Potential::constant(cells, *value)?,
            PotentialSpec::Gaussian {
                amplitude,
                center,
                width,
            } => Potential::from_fn(cells, lin, |x| {
                amplitude * (-width * (x - center).powi(2)).exp()
            })?,
            PotentialSpec::CompactBump { amplitude, lo, hi } => {
                if !(lo < hi) {
                    bail!("compact-bump needs lo < hi");
                }
                let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                Potential::from_fn(cells, lin, |x| {
                    let s = (x - m) / r;
                    if s.abs() >= 1.0 {
                        0.0
                    } else {
                        amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                    }
                })?
            }
            PotentialSpec::Step { value, until } => {
                Potential::from_fn(cells, InterpRule::PiecewiseConstant, |x| {
                    if x < *until {
                        *value
                    } else {
                        0.0
                    }
                })?
            }
            PotentialSpec::Samples { values, rule } => Potential::new(values.clone(), *rule)?,
            PotentialSpec::Csv { path, rule } => slip::io::load_potential(path, *rule)
                .with_context(|| format!("reading {}", path.display()))?,
            PotentialSpec::Random { amplitude, modes } => {
                let c: Vec<f64> = (1..=*modes)
                    .map(|k| rng.gen_range(-1.0..1.0) / k as f64)
                    .collect();
                let raw = Potential::from_fn(cells, lin, |x| {
                    c.iter()
                        .enumerate()
                        .map(|(k, a)| a * ((k + 1) as f64 * PI * x).cos())
                        .sum()
                })?;
                let sup = raw.sup_bound();
                if sup == 0.0 {
                    raw
                } else {
                    raw.map_samples(|_, y| y * amplitude / sup)?
                }
            }
        };
        Ok(v)
    }

    /// Constant value for the closed-form spectrum `k^2 pi^2 + c`.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            PotentialSpec::Zero => Some(0.0),
            PotentialSpec::Constant { value } => Some(*value),
            _ => None,
        }
    }
}

/// A real function on `[0, 1]` sampled on the potential grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    /// `amplitude * sin(mode pi x)`.
    Sine {
        mode: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `scale * x^a (1 - x)^b`.
    Poly {
        a: i32,
        b: i32,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `value` on `[lo, hi]`.
    Indicator {
        lo: f64,
        hi: f64,
        #[serde(default = "one")]
        value: f64,
    },
    Samples {
        values: Vec<f64>,
    },
    Sum {
        terms: Vec<FunctionSpec>,
    },
}

impl FunctionSpec {
    pub fn sample(&self, cells: usize) -> Result<Vec<f64>> {
        let grid = |f: &dyn Fn(f64) -> f64| {
            (0..=cells)
                .map(|i| f(i as f64 / cells as f64))
                .collect::<Vec<_>>()
        };
        Ok(match self {
            FunctionSpec::Zero => vec![0.0; cells + 1],
            FunctionSpec::Sine { mode, amplitude } => {
                grid(&|x| amplitude * (*mode as f64 * PI * x).sin())
            }
            FunctionSpec::Poly { a, b, scale } => {
                grid(&|x| scale * x.powi(*a) * (1.0 - x).powi(*b))
            }
            FunctionSpec::Indicator { lo, hi, value } => {
                grid(&|x| if x >= *lo && x <= *hi { *value } else { 0.0 })
            }
            FunctionSpec::Samples { values } => {
                if values.len() != cells + 1 {
                    bail!(
                        "function samples have length {}, grid needs {}",
                        values.len(),
                        cells + 1
                    );
                }
                values.clone()
            }
            FunctionSpec::Sum { terms } => {
                let mut out = vec![0.0; cells + 1];
                for t in terms {
                    for (o, y) in out.iter_mut().zip(t.sample(cells)?) {
                        *o += y;
                    }
                }
                out
            }
        })
    }
}

/// Index set as an explicit list or an arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSpec {
    List(Vec<usize>),
    Range {
        from: usize,
        to: usize,
        #[serde(default = "one_usize")]
        step: usize,
    },
}

fn one_usize() -> usize {
    1
}

impl IndexSpec {
    pub fn build(&self) -> Result<IndexSet> {
        let v = match self {
            IndexSpec::List(v) => v.clone(),
            IndexSpec::Range { from, to, step } => {
                if *step == 0 {
                    bail!("index range step must be positive");
                }
                (*from..=*to).step_by(*step).collect()
            }
        };
        if v.is_empty() {
            bail!("index set is empty");
        }
        Ok(IndexSet::new(v)?)
    }
}

/// One index or several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            OneOrMany::One(m) => vec![*m],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}
