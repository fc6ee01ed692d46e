//! Uniformly discrete frequency sets and their upper Beurling density.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sorted real sequence with a positive minimal gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    values: Vec<f64>,
    separation: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ValueRow {
    value: f64,
}

impl FrequencySet {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return invalid("a frequency set needs at least two values");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("frequency set has non-finite values");
        }
        values.sort_by(f64::total_cmp);
        let separation = values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if separation <= 0.0 {
            return invalid("frequency set is not uniformly discrete (repeated value)");
        }
        Ok(Self { values, separation })
    }

    /// `{ start + k step : k = 0..count }`.
    pub fn progression(start: f64, step: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|k| start + step * k as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }

    /// `max_x |G ∩ (x, x + r)|`.
    pub fn max_count(&self, r: f64) -> usize {
        let v = &self.values;
        let mut best = 0;
        let mut hi = 0;
        for lo in 0..v.len() {
            hi = hi.max(lo);
            while hi < v.len() && v[hi] < v[lo] + r {
                hi += 1;
            }
            best = best.max(hi - lo);
        }
        best
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        crate::io::write_rows(w, self.values.iter().map(|&value| ValueRow { value }))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let rows: Vec<ValueRow> = crate::io::read_rows(r)?;
        Self::new(rows.into_iter().map(|r| r.value).collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Window counts per radius with the largest radius taken as the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    /// `(r, max_x |G ∩ (x, x + r)| / r)` in the order given.
    pub profile: Vec<(f64, f64)>,
    pub estimate: f64,
}

pub fn beurling_density(g: &FrequencySet, radii: &[f64]) -> Result<DensityEstimate> {
    if radii.is_empty() {
        return invalid("no window radii given");
    }
    let limit = g.span() / 2.0;
    let mut profile = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("window radius must be positive, got {r}"));
        }
        if r > limit * (1.0 + 1e-12) {
            return invalid(format!(
                "window radius {r} exceeds half the span {limit} of the truncated set"
            ));
        }
        profile.push((r, g.max_count(r) as f64 / r));
    }
    let estimate = profile
        .iter()
        .fold((f64::NEG_INFINITY, 0.0), |best, &(r, d)| {
            if r > best.0 {
                (r, d)
            } else {
                best
            }
        })
        .1;
    Ok(DensityEstimate { profile, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn progression_density_is_inverse_step() {
        let g = FrequencySet::progression(0.3, 0.25, 1000).unwrap();
        let d = beurling_density(&g, &[10.0, 50.0, 120.0]).unwrap();
        assert!((d.estimate - 4.0).abs() < 1e-2);
        assert!((g.separation() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_repeats_and_large_radii() {
        assert!(FrequencySet::new(vec![1.0, 2.0, 2.0]).is_err());
        let g = FrequencySet::progression(0.0, 1.0, 11).unwrap();
        assert!(beurling_density(&g, &[6.0]).is_err());
        assert!(beurling_density(&g, &[5.0]).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let g = FrequencySet::new(vec![3.5, -1.0, 2.25]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("value\n"));
        assert_eq!(FrequencySet::read_csv(buf.as_slice()).unwrap(), g);
    }
}
