//! Run summaries: metrics, check outcomes and artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use crate::spec::Kind;

pub const BUILD_ID: &str = env!("SLIP_BUILD_ID");

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub criterion: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub build: String,
    pub kind: Kind,
    pub seed: u64,
    pub parameters: Value,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(kind: Kind, seed: u64, parameters: Value) -> Self {
        Self {
            build: BUILD_ID.to_string(),
            kind,
            seed,
            parameters,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            artifacts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "slip {} ({})", self.kind, self.build);
        let _ = writeln!(s, "seed: {}", self.seed);
        let params = serde_json::to_string_pretty(&self.parameters).unwrap_or_default();
        let _ = writeln!(s, "parameters:");
        for line in params.lines() {
            let _ = writeln!(s, "  {line}");
        }
        if !self.metrics.is_empty() {
            let _ = writeln!(s, "metrics:");
            for (k, v) in &self.metrics {
                let _ = writeln!(s, "  {k} = {v:.6e}");
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(s, "checks:");
            for c in &self.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "  {tag} {} ({:.6e}; {})", c.name, c.value, c.criterion);
            }
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(s, "warnings:");
            for w in &self.warnings {
                let _ = writeln!(s, "  {w}");
            }
        }
        let _ = writeln!(s, "artifacts:");
        for a in &self.artifacts {
            let _ = writeln!(s, "  {a}");
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "result: {verdict}");
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(dir.join("summary.json"), json)?;
        std::fs::write(dir.join("summary.txt"), self.text())?;
        Ok(())
    }
}
