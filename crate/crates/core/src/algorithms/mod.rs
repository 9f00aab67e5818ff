//! The triggered algorithms, the discrete baselines and their run traces.

mod baselines;
mod trace;
mod triggered;

pub use baselines::{run_continuous_reference, run_heavy_ball_discrete, run_nesterov, HeavyBallCoefficients};
pub use trace::{IterationRecord, RunSummary, RunTrace, CSV_FIXED_COLUMNS};
pub use triggered::{run_adaptive, run_adaptive_dg, run_adaptive_hoh, run_displaced_gradient, RunSetup};

use serde::{Deserialize, Serialize};

use crate::triggers::{Design, Hold, Mode};
use crate::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;
pub const DEFAULT_R_I: f64 = 1.0001;
pub const DEFAULT_R_D: f64 = 0.5;
/// Shrinks of `a` allowed within one iteration of the adaptive algorithms.
pub const MAX_SHRINKS: usize = 200;
/// Displacement below which shrinking is treated as a numerical failure.
pub const A_FLOOR: f64 = 1e-300;

/// Settings shared by the triggered algorithms. `None` fields take their
/// values from the problem: `s = mu / (36 L^2)`, `tau` from the MIET grid,
/// `t_max = 10 / sqrt(mu)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgoConfig {
    pub trigger: Design,
    pub mode: Mode,
    /// Read by [`run_adaptive`]; the fixed-displacement algorithm always
    /// uses the zero-order hold.
    pub hold: Hold,
    pub epsilon: f64,
    pub a0: f64,
    pub r_i: f64,
    pub r_d: f64,
    pub tau: Option<f64>,
    pub max_iters: usize,
    pub s: Option<f64>,
    pub alpha: f64,
    pub t_max: Option<f64>,
    /// Keep a per-step [`crate::triggers::StepDiagnostic`] in the trace.
    pub diagnostics: bool,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            trigger: Design::Performance,
            mode: Mode::Et,
            hold: Hold::Hoh,
            epsilon: DEFAULT_EPSILON,
            a0: 0.1,
            r_i: DEFAULT_R_I,
            r_d: DEFAULT_R_D,
            tau: None,
            max_iters: DEFAULT_MAX_ITERS,
            s: None,
            alpha: crate::triggers::DEFAULT_ALPHA,
            t_max: None,
            diagnostics: false,
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.a0 >= 0.0 && self.a0.is_finite()) {
            return bad(format!("a0 must be nonnegative, got {}", self.a0));
        }
        if !(self.r_i > 1.0 && self.r_i.is_finite()) {
            return bad(format!("r_i must exceed 1, got {}", self.r_i));
        }
        if !(self.r_d > 0.0 && self.r_d < 1.0) {
            return bad(format!("r_d must lie in (0, 1), got {}", self.r_d));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return bad(format!("tau must be positive, got {tau}"));
            }
        }
        if let Some(s) = self.s {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("s must be positive, got {s}"));
            }
        }
        if let Some(t_max) = self.t_max {
            if !(t_max > 0.0 && t_max.is_finite()) {
                return bad(format!("t_max must be positive, got {t_max}"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        Ok(())
    }
}
