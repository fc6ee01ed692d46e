//! Scalar abstractions shared by the forward solvers.
//!
//! [`Real`] is the coordinate/potential type (`f32` or `f64`). [`Field`] is the
//! value type carried by the shooting integrator: the real type itself for real
//! energies, or `Complex<T>` for complex spectral parameters.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type usable as a coordinate or potential value.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; constants in the solvers are written as `f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Value type of the shooting state `(psi, psi')`.
pub trait Field:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;
    fn modulus(self) -> Self::Real;
    fn is_finite(self) -> bool;
    fn re(self) -> Self::Real;

    /// `(cosh w, sinh(w)/w)` with `w^2 = w2`. Both are entire in `w2`, so the
    /// branch of the square root does not matter.
    fn cosh_sinhc(w2: Self) -> (Self, Self);
}

/// Below this `|w|` the Taylor series of `cosh` and `sinh(w)/w` is used.
const SERIES_CUTOFF: f64 = 1e-3;

impl<T: Real> Field for T {
    type Real = T;

    #[inline]
    fn from_real(r: T) -> Self {
        r
    }
    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn is_finite(self) -> bool {
        Float::is_finite(self)
    }
    #[inline]
    fn re(self) -> T {
        self
    }

    #[inline]
    fn cosh_sinhc(w2: T) -> (T, T) {
        let cut = T::lit(SERIES_CUTOFF * SERIES_CUTOFF);
        if w2.abs() < cut {
            return series_cosh_sinhc(w2);
        }
        if w2 > T::zero() {
            let w = w2.sqrt();
            (w.cosh(), w.sinh() / w)
        } else {
            let w = (-w2).sqrt();
            (w.cos(), w.sin() / w)
        }
    }
}

impl<T: Real> Field for Complex<T> {
    type Real = T;

    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn re(self) -> T {
        self.re
    }

    #[inline]
    fn cosh_sinhc(w2: Self) -> (Self, Self) {
        let cut = T::lit(SERIES_CUTOFF * SERIES_CUTOFF);
        if w2.norm() < cut {
            return series_cosh_sinhc(w2);
        }
        let w = w2.sqrt();
        (w.cosh(), w.sinh() / w)
    }
}

#[inline]
fn series_cosh_sinhc<S>(w2: S) -> (S, S)
where
    S: Field,
{
    let one = S::from_real(S::Real::lit(1.0));
    let c2 = S::from_real(S::Real::lit(0.5));
    let c4 = S::from_real(S::Real::lit(1.0 / 24.0));
    let c6 = S::from_real(S::Real::lit(1.0 / 720.0));
    let s2 = S::from_real(S::Real::lit(1.0 / 6.0));
    let s4 = S::from_real(S::Real::lit(1.0 / 120.0));
    let s6 = S::from_real(S::Real::lit(1.0 / 5040.0));
    let cosh = one + w2 * (c2 + w2 * (c4 + w2 * c6));
    let sinhc = one + w2 * (s2 + w2 * (s4 + w2 * s6));
    (cosh, sinhc)
}

/// `sin(z x) / z` with the removable singularity at `z = 0` filled in by `x`.
pub fn sinc_scaled<T: Real>(z: Complex<T>, x: T) -> Complex<T> {
    let zx = z * x;
    if zx.norm() < T::lit(1e-4) {
        let w2 = zx * zx;
        let one = Complex::from_real(T::one());
        return (one - w2 * T::lit(1.0 / 6.0) + w2 * w2 * T::lit(1.0 / 120.0)) * x;
    }
    zx.sin() / z
}

/// Principal square root with `Re >= 0`.
pub fn principal_sqrt<T: Real>(e: Complex<T>) -> Complex<T> {
    let s = e.sqrt();
    if s.re < T::zero() || (s.re == T::zero() && s.im < T::zero()) {
        -s
    } else {
        s
    }
}
