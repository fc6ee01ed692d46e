//! Quadrature rules on uniform grids and Gauss–Legendre nodes.

use num_complex::Complex;
use rayon::prelude::*;

use crate::scalar::Real;

/// Composite trapezoid rule for samples with spacing `h`.
pub fn trapezoid<T: Real>(y: &[T], h: T) -> T {
    match y.len() {
        0 | 1 => T::zero(),
        n => {
            let inner: T = y[1..n - 1].iter().copied().sum();
            h * (inner + T::lit(0.5) * (y[0] + y[n - 1]))
        }
    }
}

/// Trapezoid rule of a pointwise product.
pub fn trapezoid_product<T: Real>(a: &[T], b: &[T], h: T) -> T {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return T::zero();
    }
    let inner: T = (1..n - 1).map(|i| a[i] * b[i]).sum();
    h * (inner + T::lit(0.5) * (a[0] * b[0] + a[n - 1] * b[n - 1]))
}

/// Composite Simpson rule; falls back to trapezoid on the last cell when the
/// number of cells is odd.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    if n < 3 {
        return trapezoid(y, h);
    }
    let cells = n - 1;
    let even = cells - cells % 2;
    let mut s = y[0] + y[even];
    for i in 1..even {
        s += if i % 2 == 1 { 4.0 * y[i] } else { 2.0 * y[i] };
    }
    let mut total = s * h / 3.0;
    if even < cells {
        total += 0.5 * h * (y[cells - 1] + y[cells]);
    }
    total
}

/// Fourth-order Gregory weights for `n` uniform cells: `int ~ h sum w_i y_i`.
///
/// Interior weights are 1; the end corrections remove the `h^2` endpoint term
/// of the trapezoid rule.
pub fn gregory_weights(n: usize) -> Vec<f64> {
    assert!(n >= 6, "Gregory weights need at least 6 cells");
    let mut w = vec![1.0; n + 1];
    for (i, c) in [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0].into_iter().enumerate() {
        w[i] = c;
        w[n - i] = c;
    }
    w
}

/// Integral over `[0, h]` of the quintic Hermite interpolant matching value,
/// slope and second derivative at both ends.
#[inline]
pub fn quintic_cell(h: f64, y: (f64, f64), d: (f64, f64), s: (f64, f64)) -> f64 {
    0.5 * h * (y.0 + y.1) + h * h / 10.0 * (d.0 - d.1) + h * h * h / 120.0 * (s.0 + s.1)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        x[0] = 0.0;
        w[0] = 2.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    (
        x.iter().map(|t| m + c * t).collect(),
        w.iter().map(|v| v * c).collect(),
    )
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `order` nodes each.
pub fn composite_gauss(order: usize, panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (t, wt) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (t + 1.0));
            weights.push(0.5 * h * wt);
        }
    }
    (nodes, weights)
}

/// Cubic Hermite interpolant of a grid function with known derivative.
#[derive(Debug, Clone, Copy)]
pub struct Hermite<'a> {
    pub values: &'a [f64],
    pub derivs: &'a [f64],
    pub h: f64,
}

impl<'a> Hermite<'a> {
    pub fn new(values: &'a [f64], derivs: &'a [f64]) -> Self {
        assert_eq!(values.len(), derivs.len());
        let h = 1.0 / (values.len() - 1) as f64;
        Self { values, derivs, h }
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    /// Value inside cell `i` at local coordinate `t` in `[0, 1]`.
    #[inline]
    pub fn eval_local(&self, i: usize, t: f64) -> f64 {
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i] * self.h, self.derivs[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.cells();
        let s = (x.clamp(0.0, 1.0)) / self.h;
        let i = (s.floor() as usize).min(n - 1);
        self.eval_local(i, s - i as f64)
    }

    /// `int_a^b u(x) g(x) dx` with three Gauss nodes per (partial) cell.
    pub fn integrate_with(&self, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let n = self.cells();
        let first = ((a / self.h).floor() as usize).min(n - 1);
        let last = (((b / self.h).ceil() as usize).max(first + 1)).min(n);
        let mut total = 0.0;
        for i in first..last {
            let lo = (i as f64 * self.h).max(a);
            let hi = ((i + 1) as f64 * self.h).min(b);
            if hi <= lo {
                continue;
            }
            let c = 0.5 * (hi - lo);
            let m = 0.5 * (hi + lo);
            for k in 0..3 {
                let x = m + c * X[k];
                let t = x / self.h - i as f64;
                total += W[k] * c * self.eval_local(i, t) * g(x);
            }
        }
        total
    }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Outcome of an adaptive Gauss–Kronrod integration.
#[derive(Debug, Clone, Copy)]
pub struct GkResult {
    pub value: Complex<f64>,
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

fn gk15_panel<E>(
    f: &(impl Fn(f64) -> std::result::Result<Complex<f64>, E> + Sync),
    a: f64,
    b: f64,
) -> std::result::Result<(Complex<f64>, f64), E> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = Complex::new(0.0, 0.0);
    let mut g = Complex::new(0.0, 0.0);
    for i in 0..8 {
        if i == 7 {
            let v = f(c)?;
            k += v * GK_WK[7];
            g += v * GK_WG[3];
        } else {
            let v = f(c - h * GK_X[i])? + f(c + h * GK_X[i])?;
            k += v * GK_WK[i];
            if i % 2 == 1 {
                g += v * GK_WG[i / 2];
            }
        }
    }
    Ok((k * h, ((k - g) * h).norm()))
}

/// Adaptive GK 7-15 over `[a, b]` starting from `panels` equal panels; panels
/// whose error estimate exceeds their length share of `tol` are bisected.
/// Panels are evaluated in parallel.
pub fn gk15_adaptive<E: Send>(
    f: impl Fn(f64) -> std::result::Result<Complex<f64>, E> + Sync,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
    max_rounds: usize,
) -> std::result::Result<GkResult, E> {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut todo: Vec<(f64, f64)> = (0..panels)
        .map(|i| {
            (
                a + w * i as f64,
                if i + 1 == panels {
                    b
                } else {
                    a + w * (i + 1) as f64
                },
            )
        })
        .collect();
    let len = (b - a).abs();
    let mut value = Complex::new(0.0, 0.0);
    let mut error = 0.0;
    let mut done = 0;
    let mut evaluations = 0;
    for round in 0..=max_rounds {
        let res: Vec<(f64, f64, Complex<f64>, f64)> = todo
            .par_iter()
            .map(|&(lo, hi)| gk15_panel(&f, lo, hi).map(|(v, e)| (lo, hi, v, e)))
            .collect::<std::result::Result<_, E>>()?;
        evaluations += 15 * res.len();
        let mut next = Vec::new();
        for (lo, hi, v, e) in res {
            let share = tol * (hi - lo).abs() / len;
            if e > share && round < max_rounds {
                let mid = 0.5 * (lo + hi);
                next.push((lo, mid));
                next.push((mid, hi));
            } else {
                value += v;
                error += e;
                done += 1;
            }
        }
        if next.is_empty() {
            break;
        }
        todo = next;
    }
    Ok(GkResult {
        value,
        error,
        panels: done,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gregory_and_quintic_orders() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let w = gregory_weights(n);
            let s: f64 = (0..=n).map(|i| w[i] * (i as f64 * h).exp()).sum::<f64>() * h;
            (s - (1f64.exp() - 1.0)).abs()
        };
        let r = err(32) / err(64);
        assert!(r > 14.0 && r < 18.0, "{r}");
        // exact on quintics
        let p = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 3.0 * x.powi(5);
        let dp = |x: f64| 1.0 - 6.0 * x * x + 15.0 * x.powi(4);
        let d2p = |x: f64| -12.0 * x + 60.0 * x.powi(3);
        let h = 0.7;
        let q = quintic_cell(h, (p(0.0), p(h)), (dp(0.0), dp(h)), (d2p(0.0), d2p(h)));
        let exact = h + h * h / 2.0 - h.powi(4) / 2.0 + h.powi(6) / 2.0;
        assert!((q - exact).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * x.powi(deg as i32 - 1))
                .sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert!((s - exact).abs() < 1e-13, "n={n}");
        }
        let (x, w) = gauss_legendre(400);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (40.0 * x).cos()).sum();
        assert!((s - 2.0 * 40f64.sin() / 40.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_and_simpson_on_cubic() {
        let n = 64;
        let h = 1.0 / n as f64;
        let y: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&y, h) - 0.25).abs() < 1e-14);
        assert!((trapezoid(&y, h) - 0.25).abs() < 1e-3);
    }

    #[test]
    fn adaptive_gk_resolves_a_near_pole() {
        let z0 = Complex::new(0.5, 1e-3);
        let r = gk15_adaptive(
            |t| Ok::<_, ()>(Complex::new(1.0, 0.0) / (Complex::new(t, 0.0) - z0)),
            0.0,
            1.0,
            4,
            1e-10,
            40,
        )
        .unwrap();
        let exact = ((Complex::new(1.0, 0.0) - z0) / (-z0)).ln();
        assert!((r.value - exact).norm() < 1e-9, "{:?} vs {exact}", r.value);
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let n = 8;
        let f = |x: f64| x * x * x - 2.0 * x;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let v: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
        let d: Vec<f64> = (0..=n).map(|i| df(i as f64 / n as f64)).collect();
        let he = Hermite::new(&v, &d);
        for &x in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((he.eval(x) - f(x)).abs() < 1e-14);
        }
        // int_{0.1}^{0.65} f(x) * x dx
        let exact = |x: f64| x.powi(5) / 5.0 - 2.0 * x.powi(3) / 3.0;
        let got = he.integrate_with(0.1, 0.65, |x| x);
        assert!((got - (exact(0.65) - exact(0.1))).abs() < 1e-14);
    }
}
