//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the shooting solver: potentials are only evaluated
//! pointwise through `PotentialField::eval`.

#![allow(dead_code)]

use slip::Potential;

pub fn bump(x: f64) -> f64 {
    5.0 * (-50.0 * (x - 0.3) * (x - 0.3)).exp()
}

pub fn bump_potential(n: usize) -> Potential {
    Potential::from_fn(n, Default::default(), bump).unwrap()
}

/// Second-order central-difference marching for `psi(1, E)` with `n` cells.
pub fn fd_psi_end(v: &Potential, e: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut prev = 0.0;
    // Taylor start: psi(h) = h + h^3 (V(0) - E) psi'(0) / 6 is O(h^3) accurate
    let mut cur = h + h * h * h * (v.eval(0.0) - e) / 6.0;
    for i in 1..n {
        let x = i as f64 * h;
        let next = 2.0 * cur - prev + h * h * (v.eval(x) - e) * cur;
        prev = cur;
        cur = next;
    }
    cur
}

/// Symmetric tridiagonal FD operator `-D^2 + V` on the `n - 1` interior nodes.
pub struct FdOperator {
    pub diag: Vec<f64>,
    pub off: f64,
    pub h: f64,
}

impl FdOperator {
    pub fn new(v: &Potential, n: usize) -> Self {
        let h = 1.0 / n as f64;
        let diag = (1..n)
            .map(|i| 2.0 / (h * h) + v.eval(i as f64 * h))
            .collect();
        Self {
            diag,
            off: -1.0 / (h * h),
            h,
        }
    }

    /// Eigenvalues strictly below `x` (Sturm count on the LDL^T pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for (i, &a) in self.diag.iter().enumerate() {
            d = if i == 0 {
                a - x
            } else {
                a - x - self.off * self.off / d
            };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        let bound = self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs())) + 2.0 * self.off.abs();
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for `lambda` by inverse iteration, padded with the Dirichlet
    /// zeros and scaled so the one-sided slope at 0 approximates 1.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let m = self.diag.len();
        let shift = lambda * (1.0 + 1e-10) + 1e-10;
        let mut x: Vec<f64> = (0..m)
            .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64)
            .collect();
        for _ in 0..4 {
            x = thomas(&self.diag, self.off, shift, &x);
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        let mut out = Vec::with_capacity(m + 2);
        out.push(0.0);
        out.extend(x);
        out.push(0.0);
        let h = self.h;
        // fourth-order one-sided derivative at x = 0
        let slope = (-25.0 * out[0] + 48.0 * out[1] - 36.0 * out[2] + 16.0 * out[3] - 3.0 * out[4])
            / (12.0 * h);
        out.iter_mut().for_each(|v| *v /= slope);
        out
    }
}

fn thomas(diag: &[f64], off: f64, shift: f64, rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut b = diag[0] - shift;
    c[0] = off / b;
    d[0] = rhs[0] / b;
    for i in 1..m {
        b = diag[i] - shift - off * c[i - 1];
        c[i] = off / b;
        d[i] = (rhs[i] - off * d[i - 1]) / b;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Removes the leading `h^2` error term from results at `n` and `2n`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// First `k` FD eigenvalues, Richardson-extrapolated from grids `n` and `2n`.
pub fn fd_eigenvalues(v: &Potential, n: usize, k: usize) -> Vec<f64> {
    let a = FdOperator::new(v, n);
    let b = FdOperator::new(v, 2 * n);
    (1..=k)
        .map(|j| richardson(a.eigenvalue(j), b.eigenvalue(j)))
        .collect()
}

pub fn trapezoid(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    h * (y[1..n - 1].iter().sum::<f64>() + 0.5 * (y[0] + y[n - 1]))
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Smooth compactly supported bump of height 5 on `[0, 0.6]`.
pub fn smooth_bump(x: f64) -> f64 {
    let s = (x - 0.3) / 0.3;
    if s.abs() >= 1.0 {
        0.0
    } else {
        5.0 * (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Relative `L^2(0, 1)` distance evaluated on a fine uniform grid.
pub fn rel_l2(a: &Potential, b: &Potential) -> f64 {
    let n = 8192;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        num += w * (a.eval(x) - b.eval(x)).powi(2);
        den += w * b.eval(x).powi(2);
    }
    (num / den).sqrt()
}
