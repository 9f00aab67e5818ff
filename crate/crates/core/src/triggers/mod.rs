//! Trigger bounds, stepsize selection and the constants that certify them.

mod bounds;
mod constants;
pub mod integral;
pub mod quadrature;
mod step;

pub use bounds::{
    hoh_bound_derivative_et, hoh_bound_derivative_st, hoh_bound_performance_et, hoh_bound_performance_st,
    zoh_bound_derivative_et, zoh_bound_derivative_st, zoh_bound_performance_et, zoh_bound_performance_st, BoundKind,
    Design, Hold, Mode, Sample, StepBound,
};
pub use constants::{MietTerms, TriggerConstants, DEFAULT_ALPHA, TAU_GRID_POINTS, TAU_SAFETY};
pub use step::{
    default_t_max, quadratic_root, st_value, step_size, StepDiagnostic, StepOutcome, ET_SCAN_POINTS, MAX_BISECTIONS,
    ROOT_TOL,
};

use crate::dynamics::{FlowParams, State};
use crate::objectives::ObjectiveOracle;
use crate::Result;

/// `constants_from(oracle, params, alpha)`.
pub fn constants_from(oracle: &ObjectiveOracle, params: &FlowParams, alpha: f64) -> Result<TriggerConstants> {
    TriggerConstants::new(oracle, params, alpha)
}

/// Builds the bound of `kind` at `p_hat` and returns its first zero.
pub fn step_for(
    kind: BoundKind,
    p_hat: &State,
    a: f64,
    params: &FlowParams,
    oracle: &ObjectiveOracle,
    t_max: f64,
) -> Result<StepOutcome> {
    step_size(&StepBound::new(kind, p_hat, a, params, oracle), t_max)
}
