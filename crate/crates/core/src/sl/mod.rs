//! Forward Sturm–Liouville machinery on `[0, 1]` with Dirichlet conditions.

pub mod eigen;
pub mod estimates;
pub mod ivp;
pub mod potential;

pub use eigen::{dirichlet_eigs, EigenPair, EigenSolver, SpectralDatum};
pub use estimates::{
    asymptotic_profile, coeffs_from_pairs, expansion_coeffs, psi_estimate_constant,
    verify_asymptotics, verify_psi_estimates, EstimateKind, ExpansionCoeffs,
};
pub use ivp::{
    march, march_from, march_uniform, psi_at, resolved_steps, shoot, solve_ivp, solve_real,
    Convention, SolutionAtZ, SpectralParam,
};
pub use potential::{InterpRule, PotentialField};
