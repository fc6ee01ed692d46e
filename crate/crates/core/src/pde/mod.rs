//! Spectral simulators for the passive wave problem and the actively probed
//! Schrödinger problem, their endpoint traces, and time-domain oracles.

mod basis;
mod gauge;
mod lemmas;
mod oracles;
mod schrodinger;
mod trace;
mod wave;

pub use basis::{head_integral, second_derivative, ModalBasis};
pub use gauge::{gauge_pair_check, GaugeReport};
pub use lemmas::{
    coeff_decay_witness, decay_limits, endpoint_second_derivatives, exceptional_set_p,
    ExceptionalSet, MembershipRule,
};
pub use oracles::{crank_nicolson_oracle, fdtd_wave_oracle, OracleRun};
pub use schrodinger::{schrodinger_modes, schrodinger_trace, SchrodingerConfig, SchrodingerModes};
pub use trace::{trace_l2_distance, FieldKind, TimeTrace, TraceRow};
pub use wave::{cos_lambda, wave_modes, wave_trace, WaveConfig, WaveModes, COSH_CAP};

/// Current version of the JSON config schema.
pub const CONFIG_SCHEMA: u32 = 1;
pub const DEFAULT_MODES: usize = 128;
pub const DEFAULT_T_SAMPLES: usize = 4096;
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-3;

pub(crate) fn default_schema() -> u32 {
    CONFIG_SCHEMA
}
pub(crate) fn default_modes() -> usize {
    DEFAULT_MODES
}
pub(crate) fn default_t_samples() -> usize {
    DEFAULT_T_SAMPLES
}
pub(crate) fn default_tail_budget() -> f64 {
    DEFAULT_TAIL_BUDGET
}

pub(crate) fn time_grid(t_end: f64, samples: usize) -> Vec<f64> {
    let dt = t_end / (samples - 1) as f64;
    (0..samples).map(|j| j as f64 * dt).collect()
}

/// Checks that `f` lives on the potential grid and vanishes at both ends.
pub(crate) fn check_grid_function(
    name: &str,
    f_abs: &[f64],
    cells: usize,
    endpoint_zero: bool,
) -> crate::Result<()> {
    if f_abs.len() != cells + 1 {
        return crate::error::invalid(format!(
            "{name} has {} samples, expected {} (potential grid)",
            f_abs.len(),
            cells + 1
        ));
    }
    if f_abs.iter().any(|x| !x.is_finite()) {
        return crate::error::invalid(format!("{name} has non-finite samples"));
    }
    if endpoint_zero {
        let scale = f_abs
            .iter()
            .fold(0.0f64, |m, x| m.max(*x))
            .max(f64::MIN_POSITIVE);
        if f_abs[0] > 1e-12 * scale || f_abs[cells] > 1e-12 * scale {
            return crate::error::invalid(format!("{name} must vanish at both endpoints"));
        }
    }
    Ok(())
}
