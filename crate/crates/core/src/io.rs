//! CSV readers and writers for potentials and eigendata.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sl::{EigenPair, InterpRule, PotentialField};

#[derive(Debug, Serialize, Deserialize)]
struct PotentialRow {
    x: f64,
    #[serde(rename = "V")]
    v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub k: usize,
    pub lambda: f64,
    pub dphi_at_1: f64,
    pub norm_sq: f64,
}

impl From<&EigenPair<f64>> for EigenRow {
    fn from(p: &EigenPair<f64>) -> Self {
        Self {
            k: p.index,
            lambda: p.lambda,
            dphi_at_1: p.dphi_at_1,
            norm_sq: p.norm_sq,
        }
    }
}

/// Formats values with the shortest round-trip representation.
pub fn write_rows<W: Write, R: Serialize>(w: W, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for row in rd.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_potential<W: Write>(w: W, v: &PotentialField<f64>) -> Result<()> {
    let rows = v
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &s)| PotentialRow { x: v.node(i), v: s });
    write_rows(w, rows)
}

/// Reads `(x, V)` rows; the `x` column must be the uniform grid on `[0, 1]`.
pub fn read_potential<R: Read>(r: R, rule: InterpRule) -> Result<PotentialField<f64>> {
    let rows: Vec<PotentialRow> = read_rows(r)?;
    if rows.len() < 2 {
        return invalid("potential CSV needs at least two rows");
    }
    let n = (rows.len() - 1) as f64;
    for (i, row) in rows.iter().enumerate() {
        if (row.x - i as f64 / n).abs() > 1e-9 {
            return invalid(format!("row {i}: x = {} is off the uniform grid", row.x));
        }
    }
    PotentialField::new(rows.into_iter().map(|r| r.v).collect(), rule)
}

pub fn write_eigendata<W: Write>(w: W, pairs: &[EigenPair<f64>]) -> Result<()> {
    write_rows(w, pairs.iter().map(EigenRow::from))
}

pub fn read_eigendata<R: Read>(r: R) -> Result<Vec<EigenRow>> {
    read_rows(r)
}

pub fn save_potential(path: impl AsRef<Path>, v: &PotentialField<f64>) -> Result<()> {
    write_potential(std::fs::File::create(path)?, v)
}

pub fn load_potential(path: impl AsRef<Path>, rule: InterpRule) -> Result<PotentialField<f64>> {
    read_potential(std::fs::File::open(path)?, rule)
}
