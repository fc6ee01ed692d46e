//! Experiment spec documents, their parameter blocks and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::inputs::{FunctionSpec, IndexSpec, OneOrMany, PotentialSpec};

pub const SCHEMA_VERSION: u32 = 1;
const TOP_LEVEL: [&str; 5] = ["schema_version", "kind", "parameters", "seed", "output_dir"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Eigs,
    Zeros,
    Reconstruct,
    WaveTrace,
    SchrodTrace,
    Windows,
    Interp,
    Theorem1Pipeline,
    Theorem2Pipeline,
    Theorem4Pipeline,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Eigs,
        Kind::Zeros,
        Kind::Reconstruct,
        Kind::WaveTrace,
        Kind::SchrodTrace,
        Kind::Windows,
        Kind::Interp,
        Kind::Theorem1Pipeline,
        Kind::Theorem2Pipeline,
        Kind::Theorem4Pipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Eigs => "eigs",
            Kind::Zeros => "zeros",
            Kind::Reconstruct => "reconstruct",
            Kind::WaveTrace => "wave-trace",
            Kind::SchrodTrace => "schrod-trace",
            Kind::Windows => "windows",
            Kind::Interp => "interp",
            Kind::Theorem1Pipeline => "theorem1-pipeline",
            Kind::Theorem2Pipeline => "theorem2-pipeline",
            Kind::Theorem4Pipeline => "theorem4-pipeline",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn required(self) -> &'static [&'static str] {
        match self {
            Kind::Eigs => &["potential", "K"],
            Kind::Zeros => &["potential1", "potential2", "x0"],
            Kind::Reconstruct => &["truth", "epsilon", "S"],
            Kind::WaveTrace => &["potential", "f", "T"],
            Kind::SchrodTrace => &["potential", "f", "source", "delta", "T"],
            Kind::Windows => &["family", "potential1", "potential2", "m", "K"],
            Kind::Interp => &["P", "epsilon", "K"],
            Kind::Theorem1Pipeline => &["epsilon", "S"],
            Kind::Theorem2Pipeline => &["potential1", "potential2", "f", "T", "K", "m"],
            Kind::Theorem4Pipeline => &["potential", "f", "source", "delta", "K"],
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One field-level validation message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn cells_default() -> usize {
    1024
}
fn recon_truth_cells() -> usize {
    1024
}
fn recon_grid() -> usize {
    256
}
fn recon_iters() -> usize {
    14
}
fn recon_dw() -> f64 {
    0.05
}
fn tail_samples() -> usize {
    65
}
fn cert_tol() -> f64 {
    1e-8
}
fn radii_default() -> Vec<f64> {
    vec![50.0, 100.0, 200.0]
}
fn zero_cells() -> usize {
    1000
}
fn modes_default() -> usize {
    128
}
fn samples_default() -> usize {
    4096
}
fn window_samples() -> usize {
    16385
}
fn trace_cells() -> usize {
    256
}
fn exceptional_k() -> usize {
    400
}
fn exceptional_cells() -> usize {
    2048
}
fn ensemble_default() -> usize {
    0
}
fn interp_cells() -> usize {
    128
}
fn zero_pot() -> PotentialSpec {
    PotentialSpec::Zero
}
fn unit_pot() -> PotentialSpec {
    PotentialSpec::Constant { value: 1.0 }
}
fn bump_pot() -> PotentialSpec {
    PotentialSpec::CompactBump {
        amplitude: 5.0,
        lo: 0.0,
        hi: 0.6,
    }
}
fn perturbation_amplitude() -> f64 {
    2.0
}
fn gauge_default() -> FunctionSpec {
    FunctionSpec::Sine {
        mode: 2,
        amplitude: 1.0,
    }
}
fn gauge_cells() -> usize {
    4096
}
fn no_fn() -> FunctionSpec {
    FunctionSpec::Zero
}
fn oracle_dt() -> f64 {
    1e-4
}
fn oracle_tol() -> f64 {
    1e-3
}
fn tol_extract() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    #[default]
    F,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigsParams {
    pub potential: PotentialSpec,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "cells_default")]
    pub cells: usize,
    /// Solver steps; the solver picks its own when absent.
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZerosParams {
    pub potential1: PotentialSpec,
    pub potential2: PotentialSpec,
    pub x0: f64,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default = "radii_default")]
    pub radii: Vec<f64>,
    #[serde(default = "zero_cells")]
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructParams {
    pub truth: PotentialSpec,
    pub epsilon: f64,
    #[serde(rename = "S")]
    pub s: IndexSpec,
    /// Grid of the data-generating potential.
    #[serde(default = "recon_truth_cells")]
    pub truth_cells: usize,
    /// Reconstruction grid.
    #[serde(default = "recon_grid")]
    pub grid: usize,
    #[serde(default)]
    pub unknowns: Option<usize>,
    #[serde(default = "recon_dw")]
    pub derivative_weight: f64,
    #[serde(default)]
    pub reg: Option<f64>,
    #[serde(default = "recon_iters")]
    pub iterations: usize,
    #[serde(default = "tail_samples")]
    pub tail_samples: usize,
    #[serde(default = "zero_pot")]
    pub init: PotentialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveTraceParams {
    pub potential: PotentialSpec,
    pub f: FunctionSpec,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "K", default = "modes_default")]
    pub k: usize,
    #[serde(default = "samples_default")]
    pub samples: usize,
    #[serde(default = "cells_default")]
    pub cells: usize,
    /// Spatial cells of the leapfrog cross-check; skipped when absent.
    #[serde(default)]
    pub oracle_cells: Option<usize>,
    #[serde(default = "oracle_tol")]
    pub oracle_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodTraceParams {
    pub potential: PotentialSpec,
    pub f: FunctionSpec,
    #[serde(default = "no_fn")]
    pub f_im: FunctionSpec,
    pub source: FunctionSpec,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "K", default = "modes_default")]
    pub k: usize,
    #[serde(default = "samples_default")]
    pub samples: usize,
    #[serde(default = "cells_default")]
    pub cells: usize,
    /// Spatial cells of the Crank-Nicolson cross-check; skipped when absent.
    #[serde(default)]
    pub oracle_cells: Option<usize>,
    #[serde(default = "oracle_dt")]
    pub oracle_dt: f64,
    #[serde(default = "oracle_tol")]
    pub oracle_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowsParams {
    pub family: Family,
    pub potential1: PotentialSpec,
    pub potential2: PotentialSpec,
    pub m: OneOrMany,
    #[serde(rename = "K")]
    pub k: usize,
    /// Horizon of the cosine family.
    #[serde(rename = "T", default)]
    pub t: Option<f64>,
    /// Horizon of the exponential family.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "trace_cells")]
    pub cells: usize,
    /// Horizons at which the cosine residual curve is reported.
    #[serde(default)]
    pub residual_curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpParams {
    #[serde(rename = "P")]
    pub p: IndexSpec,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "zero_pot")]
    pub potential: PotentialSpec,
    #[serde(default = "interp_cells")]
    pub cells: usize,
    /// Explicit coefficients indexed like `P`.
    #[serde(default)]
    pub c: Option<Vec<f64>>,
    /// Number of random unit coefficient vectors for the norm-witness spread.
    #[serde(default = "ensemble_default")]
    pub ensemble: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem1Params {
    pub epsilon: f64,
    #[serde(rename = "S")]
    pub s: IndexSpec,
    #[serde(default = "bump_pot")]
    pub truth: PotentialSpec,
    /// Sup norm of the seeded perturbation added on `[0, 1 - epsilon)`.
    #[serde(default = "perturbation_amplitude")]
    pub perturbation: f64,
    #[serde(default = "recon_truth_cells")]
    pub truth_cells: usize,
    #[serde(default = "recon_grid")]
    pub grid: usize,
    #[serde(default = "recon_dw")]
    pub derivative_weight: f64,
    #[serde(default = "recon_iters")]
    pub iterations: usize,
    #[serde(default = "tail_samples")]
    pub tail_samples: usize,
    #[serde(default = "cert_tol")]
    pub certificate_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem2Params {
    pub potential1: PotentialSpec,
    pub potential2: PotentialSpec,
    pub f: FunctionSpec,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub m: OneOrMany,
    #[serde(default = "trace_cells")]
    pub cells: usize,
    #[serde(default = "window_samples")]
    pub samples: usize,
    #[serde(default = "tol_extract")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem4Params {
    pub potential: PotentialSpec,
    pub f: FunctionSpec,
    #[serde(default = "no_fn")]
    pub f_im: FunctionSpec,
    pub source: FunctionSpec,
    pub delta: f64,
    #[serde(rename = "K")]
    pub k: usize,
    /// Comparison potential for the window extraction.
    #[serde(default = "unit_pot")]
    pub potential2: PotentialSpec,
    #[serde(default)]
    pub m: Option<OneOrMany>,
    #[serde(default = "trace_cells")]
    pub cells: usize,
    #[serde(default = "window_samples")]
    pub samples: usize,
    #[serde(default = "exceptional_k")]
    pub exceptional_k: usize,
    #[serde(default = "exceptional_cells")]
    pub exceptional_cells: usize,
    #[serde(default = "gauge_default")]
    pub gauge: FunctionSpec,
    /// Grid of the gauge check, which needs a finer second difference than the traces.
    #[serde(default = "gauge_cells")]
    pub gauge_cells: usize,
    #[serde(default = "tol_extract")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Eigs(EigsParams),
    Zeros(ZerosParams),
    Reconstruct(ReconstructParams),
    WaveTrace(WaveTraceParams),
    SchrodTrace(SchrodTraceParams),
    Windows(WindowsParams),
    Interp(InterpParams),
    Theorem1(Theorem1Params),
    Theorem2(Theorem2Params),
    Theorem4(Theorem4Params),
}

impl Params {
    pub fn to_value(&self) -> Value {
        let v = match self {
            Params::Eigs(p) => serde_json::to_value(p),
            Params::Zeros(p) => serde_json::to_value(p),
            Params::Reconstruct(p) => serde_json::to_value(p),
            Params::WaveTrace(p) => serde_json::to_value(p),
            Params::SchrodTrace(p) => serde_json::to_value(p),
            Params::Windows(p) => serde_json::to_value(p),
            Params::Interp(p) => serde_json::to_value(p),
            Params::Theorem1(p) => serde_json::to_value(p),
            Params::Theorem2(p) => serde_json::to_value(p),
            Params::Theorem4(p) => serde_json::to_value(p),
        };
        v.expect("parameter blocks serialize")
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub params: Params,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

fn typed<T: DeserializeOwned>(v: &Value, diags: &mut Vec<Diagnostic>) -> Option<T> {
    match serde_json::from_value(v.clone()) {
        Ok(p) => Some(p),
        Err(e) => {
            diags.push(Diagnostic::new("parameters", e.to_string()));
            None
        }
    }
}

fn parse_params(kind: Kind, v: &Value, diags: &mut Vec<Diagnostic>) -> Option<Params> {
    Some(match kind {
        Kind::Eigs => Params::Eigs(typed(v, diags)?),
        Kind::Zeros => Params::Zeros(typed(v, diags)?),
        Kind::Reconstruct => Params::Reconstruct(typed(v, diags)?),
        Kind::WaveTrace => Params::WaveTrace(typed(v, diags)?),
        Kind::SchrodTrace => Params::SchrodTrace(typed(v, diags)?),
        Kind::Windows => Params::Windows(typed(v, diags)?),
        Kind::Interp => Params::Interp(typed(v, diags)?),
        Kind::Theorem1Pipeline => Params::Theorem1(typed(v, diags)?),
        Kind::Theorem2Pipeline => Params::Theorem2(typed(v, diags)?),
        Kind::Theorem4Pipeline => Params::Theorem4(typed(v, diags)?),
    })
}

struct Checker<'a>(&'a mut Vec<Diagnostic>);

impl Checker<'_> {
    fn that(&mut self, ok: bool, field: &str, message: &str) {
        if !ok {
            self.0
                .push(Diagnostic::new(format!("parameters.{field}"), message));
        }
    }
    fn positive(&mut self, x: f64, field: &str) {
        self.that(x.is_finite() && x > 0.0, field, "must be a positive number");
    }
    fn unit(&mut self, x: f64, field: &str) {
        self.that(x > 0.0 && x < 1.0, field, "must lie in (0, 1)");
    }
    fn count(&mut self, n: usize, min: usize, field: &str) {
        self.that(n >= min, field, &format!("must be at least {min}"));
    }
    fn index(&mut self, s: &IndexSpec, field: &str) {
        if let Err(e) = s.build() {
            self.0.push(Diagnostic::new(
                format!("parameters.{field}"),
                e.to_string(),
            ));
        }
    }
    fn modes(&mut self, m: &OneOrMany, k: usize, field: &str) {
        let v = m.to_vec();
        self.that(
            !v.is_empty() && v.iter().all(|&j| j >= 1 && j <= k),
            field,
            "entries must lie in 1..=K",
        );
    }
}

fn semantic(params: &Params, diags: &mut Vec<Diagnostic>) {
    let mut c = Checker(diags);
    match params {
        Params::Eigs(p) => {
            c.count(p.k, 1, "K");
            c.count(p.cells, 1, "cells");
        }
        Params::Zeros(p) => {
            c.that(p.x0 > 0.0 && p.x0 < 1.0, "x0", "must lie in (0, 1)");
            c.that(
                !p.radii.is_empty() && p.radii.iter().all(|r| r.is_finite() && *r > 0.0),
                "radii",
                "must be positive",
            );
            c.count(p.cells, 1, "cells");
        }
        Params::Reconstruct(p) => {
            c.unit(p.epsilon, "epsilon");
            c.index(&p.s, "S");
            c.count(p.grid, 2, "grid");
            c.count(p.truth_cells, 2, "truth_cells");
            c.count(p.iterations, 1, "iterations");
        }
        Params::WaveTrace(p) => {
            c.positive(p.t, "T");
            c.count(p.k, 1, "K");
            c.count(p.samples, 2, "samples");
        }
        Params::SchrodTrace(p) => {
            c.positive(p.t, "T");
            c.unit(p.delta, "delta");
            c.count(p.k, 1, "K");
            c.count(p.samples, 2, "samples");
        }
        Params::Windows(p) => {
            c.count(p.k, 1, "K");
            c.modes(&p.m, p.k, "m");
            match p.family {
                Family::Cos => {
                    c.that(p.t.is_some(), "T", "required for the cos family");
                    if let Some(t) = p.t {
                        c.positive(t, "T");
                    }
                }
                Family::Exp => {
                    c.that(p.delta.is_some(), "delta", "required for the exp family");
                    if let Some(d) = p.delta {
                        c.unit(d, "delta");
                    }
                }
            }
        }
        Params::Interp(p) => {
            c.positive(p.epsilon, "epsilon");
            c.that(p.epsilon <= 1.0, "epsilon", "must not exceed 1");
            c.index(&p.p, "P");
            c.count(p.k, 1, "K");
            if let Ok(set) = p.p.build() {
                c.that(p.k <= set.len(), "K", "must not exceed the size of P");
                if let Some(v) = &p.c {
                    c.that(
                        v.len() == set.len(),
                        "c",
                        "must have one entry per index in P",
                    );
                }
            }
            c.that(
                p.c.is_some() || p.ensemble > 0,
                "c",
                "give coefficients or a positive ensemble size",
            );
        }
        Params::Theorem1(p) => {
            c.unit(p.epsilon, "epsilon");
            c.index(&p.s, "S");
            c.positive(p.perturbation, "perturbation");
            c.count(p.iterations, 1, "iterations");
        }
        Params::Theorem2(p) => {
            c.positive(p.t, "T");
            c.count(p.k, 1, "K");
            c.modes(&p.m, p.k, "m");
        }
        Params::Theorem4(p) => {
            c.unit(p.delta, "delta");
            c.count(p.k, 1, "K");
            if let Some(m) = &p.m {
                c.modes(m, p.k, "m");
            }
            c.count(p.exceptional_k, 1, "exceptional_k");
        }
    }
}

/// Schema and semantic checks; no computation.
pub fn validate_value(doc: &Value) -> (Vec<Diagnostic>, Option<ExperimentSpec>) {
    let mut diags = Vec::new();
    let Some(obj) = doc.as_object() else {
        diags.push(Diagnostic::new("$", "spec must be a JSON object"));
        return (diags, None);
    };
    for key in obj.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) {
            diags.push(Diagnostic::new(key, "unknown top-level key"));
        }
    }
    match obj.get("schema_version") {
        None => diags.push(Diagnostic::new("schema_version", "missing")),
        Some(v) if v.as_u64() != Some(SCHEMA_VERSION as u64) => diags.push(Diagnostic::new(
            "schema_version",
            format!("unsupported, expected {SCHEMA_VERSION}"),
        )),
        _ => {}
    }
    let seed = match obj.get("seed") {
        None => 0,
        Some(v) => v.as_u64().unwrap_or_else(|| {
            diags.push(Diagnostic::new("seed", "must be a non-negative integer"));
            0
        }),
    };
    let output_dir = match obj.get("output_dir") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => {
            diags.push(Diagnostic::new("output_dir", "must be a string"));
            None
        }
    };
    let kind = match obj.get("kind") {
        None => {
            diags.push(Diagnostic::new("kind", "missing"));
            return (diags, None);
        }
        Some(Value::String(s)) => match Kind::parse(s) {
            Some(k) => k,
            None => {
                let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
                diags.push(Diagnostic::new(
                    "kind",
                    format!("unknown kind {s:?}, expected one of {}", names.join(", ")),
                ));
                return (diags, None);
            }
        },
        Some(_) => {
            diags.push(Diagnostic::new("kind", "must be a string"));
            return (diags, None);
        }
    };
    let empty = Value::Object(Map::new());
    let params = obj.get("parameters").unwrap_or(&empty);
    let Some(pobj) = params.as_object() else {
        diags.push(Diagnostic::new("parameters", "must be an object"));
        return (diags, None);
    };
    let missing: Vec<&str> = kind
        .required()
        .iter()
        .copied()
        .filter(|k| !pobj.contains_key(*k))
        .collect();
    for key in &missing {
        diags.push(Diagnostic::new(
            format!("parameters.{key}"),
            format!("required for kind {kind}"),
        ));
    }
    if !missing.is_empty() {
        return (diags, None);
    }
    let Some(params) = parse_params(kind, params, &mut diags) else {
        return (diags, None);
    };
    semantic(&params, &mut diags);
    if diags.is_empty() {
        (
            diags,
            Some(ExperimentSpec {
                kind,
                params,
                seed,
                output_dir,
            }),
        )
    } else {
        (diags, None)
    }
}

pub fn validate_text(text: &str) -> (Vec<Diagnostic>, Option<ExperimentSpec>) {
    match serde_json::from_str::<Value>(text) {
        Ok(doc) => validate_value(&doc),
        Err(e) => (
            vec![Diagnostic::new("$", format!("invalid JSON: {e}"))],
            None,
        ),
    }
}

pub fn validate_file(path: &Path) -> (Vec<Diagnostic>, Option<ExperimentSpec>) {
    match std::fs::read_to_string(path) {
        Ok(text) => validate_text(&text),
        Err(e) => (
            vec![Diagnostic::new(
                "$",
                format!("cannot read {}: {e}", path.display()),
            )],
            None,
        ),
    }
}
