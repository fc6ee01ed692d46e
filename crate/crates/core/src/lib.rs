//! Forward and inverse Dirichlet Sturm–Liouville numerics on `[0, 1]`.
//!
//! The forward machinery in [`sl`] is generic over `f32`/`f64` through
//! [`scalar::Real`]; the diagnostic layers built on top of it work in `f64`.

pub mod analytic;
pub mod error;
pub mod harmonics;
pub mod inverse;
pub mod io;
pub mod pde;
pub mod quad;
pub mod scalar;
pub mod sl;

pub use error::{Error, Result};
pub use scalar::{Field, Real};

/// Double-precision potential, the default working type.
pub type Potential = sl::PotentialField<f64>;
/// Single-precision potential.
pub type Potential32 = sl::PotentialField<f32>;
pub type Eigen = sl::EigenPair<f64>;
pub type Solution = sl::SolutionAtZ<f64>;
pub type Param = sl::SpectralParam<f64>;
