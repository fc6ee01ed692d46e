//! Entire-function diagnostics built from pairs of potentials: the difference
//! functions `F` and `G`, half-plane zero counting, growth on the real axis and
//! Weyl functions.

mod growth;
mod sampler;
mod weyl;
mod zeros;

pub use growth::{logplus_integral, logplus_profile, LogPlusProfile};
pub use sampler::{build_f, build_g, EntireSampler, SamplerKind};
pub use weyl::weyl_m;
pub use zeros::{
    count_zeros_halfplane, density_profile, DensityProfile, ZeroCount, CONTOUR_OFFSET,
};

pub type C64 = num_complex::Complex<f64>;
