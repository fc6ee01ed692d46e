use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::C64;
use crate::error::{invalid, Result};
use crate::io::{read_rows, write_rows};
use crate::quad::trapezoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// Wave traces; imaginary parts are zero.
    Real,
    /// Schrödinger traces.
    Complex,
}

/// Endpoint derivative signals `u_x(t, 0)` and `u_x(t, 1)` on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    pub t: Vec<f64>,
    pub left: Vec<C64>,
    pub right: Vec<C64>,
    pub kind: FieldKind,
    /// Non-fatal diagnostics, e.g. truncation tails above budget.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub left_re: f64,
    pub left_im: f64,
    pub right_re: f64,
    pub right_im: f64,
}

impl TimeTrace {
    pub fn new(t: Vec<f64>, left: Vec<C64>, right: Vec<C64>, kind: FieldKind) -> Result<Self> {
        if t.len() < 2 || left.len() != t.len() || right.len() != t.len() {
            return invalid("trace grids must match and hold at least two samples");
        }
        if left
            .iter()
            .chain(&right)
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return invalid("trace values must be finite");
        }
        Ok(Self {
            t,
            left,
            right,
            kind,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn rows(&self) -> impl Iterator<Item = TraceRow> + '_ {
        (0..self.t.len()).map(|j| TraceRow {
            t: self.t[j],
            left_re: self.left[j].re,
            left_im: self.left[j].im,
            right_re: self.right[j].re,
            right_im: self.right[j].im,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, self.rows())
    }

    /// Reads a trace; the kind is `Complex` unless every imaginary part is zero.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let rows: Vec<TraceRow> = read_rows(r)?;
        let t = rows.iter().map(|r| r.t).collect();
        let left = rows
            .iter()
            .map(|r| C64::new(r.left_re, r.left_im))
            .collect();
        let right = rows
            .iter()
            .map(|r| C64::new(r.right_re, r.right_im))
            .collect();
        let real = rows.iter().all(|r| r.left_im == 0.0 && r.right_im == 0.0);
        Self::new(
            t,
            left,
            right,
            if real {
                FieldKind::Real
            } else {
                FieldKind::Complex
            },
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Pointwise difference `self - other` on a shared grid.
    pub fn difference(&self, other: &TimeTrace) -> Result<TimeTrace> {
        same_grid(self, other)?;
        let left = self
            .left
            .iter()
            .zip(&other.left)
            .map(|(a, b)| a - b)
            .collect();
        let right = self
            .right
            .iter()
            .zip(&other.right)
            .map(|(a, b)| a - b)
            .collect();
        let kind = if self.kind == FieldKind::Real && other.kind == FieldKind::Real {
            FieldKind::Real
        } else {
            FieldKind::Complex
        };
        TimeTrace::new(self.t.clone(), left, right, kind)
    }

    /// Largest modulus over both channels.
    pub fn sup(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

fn same_grid(a: &TimeTrace, b: &TimeTrace) -> Result<()> {
    if a.t.len() != b.t.len()
        || a.t
            .iter()
            .zip(&b.t)
            .any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs()))
    {
        return invalid("traces live on different time grids");
    }
    Ok(())
}

/// `sqrt(int_0^T |dl|^2 + |dr|^2 dt)`, trapezoid in time.
pub fn trace_l2_distance(a: &TimeTrace, b: &TimeTrace) -> Result<f64> {
    same_grid(a, b)?;
    let sq: Vec<f64> = (0..a.len())
        .map(|j| (a.left[j] - b.left[j]).norm_sqr() + (a.right[j] - b.right[j]).norm_sqr())
        .collect();
    Ok(trapezoid(&sq, a.dt()).sqrt())
}
