//! Resource-aware discretizations of the heavy-ball flow with displaced gradient.
//!
//! The continuous dynamics
//!
//! ```text
//! x' = v
//! v' = -2 sqrt(mu) v - (1 + sqrt(mu s)) grad f(x + a v)
//! ```
//!
//! admit the Lyapunov certificate
//! `V = (1 + sqrt(mu s)) (f(x) - f*) + |v|^2 / 4 + |v + 2 sqrt(mu) (x - x*)|^2 / 4`
//! which decays at rate `sqrt(mu) / 4`. The algorithms in this crate sample the
//! state, hold the vector field (zero-order hold) or only its gradient term
//! (high-order hold), and pick the next sampling time as the first instant at
//! which a computable upper bound on the decay can no longer be certified.
//!
//! Module map:
//!
//! - [`objectives`]: strongly convex oracles with certified `mu`, `L`, `x*`.
//! - [`dynamics`]: vector field, hold trajectories, RK4 reference integrator.
//! - [`lyapunov`]: the certificate `V` (diagnostics only, needs `x*`).
//! - [`triggers`]: derivative/performance bounds, stepsize root finding,
//!   displacement thresholds and minimum inter-event time.
//! - [`algorithms`]: the fixed-displacement, adaptive and high-order-hold
//!   algorithms plus Nesterov and Polyak baselines.
//! - [`verify`]: the invariant suite used by the `verify` subcommand.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod dynamics;
pub mod error;
pub mod lyapunov;
pub mod objectives;
pub mod triggers;
pub mod verify;

pub use error::{Error, Result};

/// Dense column vector used throughout.
pub type Vector = nalgebra::DVector<f64>;
