//! Nonharmonic Fourier tools: upper densities of frequency sets, minimal-norm
//! moment windows for cosine and exponential families, interpolation of
//! weighted sequences by eigenfunction moments, and the transmutation map
//! between sine and `psi` transforms.

mod density;
mod interp;
mod moments;
mod remling;
mod window;

pub use density::{beurling_density, DensityEstimate, FrequencySet};
pub use interp::{interpolate_lp, Interpolant, LpInterpolator, SequenceLP};
pub use moments::{FEASIBILITY_TOL, SV_CUTOFF};
pub use remling::{
    empirical_constant, hat_norm, momentum_z_grid, remling_map, RemlingReport, RemlingSystem,
    Z_OVERSAMPLING,
};
pub use window::{
    build_cos_window, build_exp_window, cos_window_residual_curve, solve_window, WindowFunction,
    WindowKind, WINDOW_SAMPLES,
};
