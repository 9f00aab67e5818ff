//! Objective oracles for smooth strongly convex minimization.
//!
//! An [`ObjectiveOracle`] bundles `f`, `grad f` and the certified constants
//! `mu` (strong convexity) and `L` (gradient Lipschitz constant). The
//! minimizer is attached when it is known; it is needed only by the
//! diagnostic Lyapunov function, never by the algorithms themselves.

mod benchmark;
mod dataset;
mod logistic;
mod quadratic;

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result, Vector};

pub use benchmark::{start_state, Benchmark, DEFAULT_DATASET_SEED, QUADRATIC_DIAG, START_COORDINATE};
pub use dataset::{LogisticDataset, SplitMix64, FEATURE_BOUND, FEATURE_DIM, SAMPLE_COUNT};
pub use logistic::{lipschitz_estimate, make_logistic, Logistic};
pub use quadratic::{make_quadratic, Quadratic};

/// A differentiable function on `R^n`.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
}

/// Objective plus certified constants. Cheap to clone; immutable once built.
#[derive(Clone, Debug)]
pub struct ObjectiveOracle {
    objective: Arc<dyn Objective>,
    mu: f64,
    lipschitz: f64,
    minimizer: Option<Vector>,
}

impl ObjectiveOracle {
    pub fn new(objective: Arc<dyn Objective>, mu: f64, lipschitz: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidObjective(format!("mu must be positive, got {mu}")));
        }
        if !(lipschitz >= mu && lipschitz.is_finite()) {
            return Err(Error::InvalidObjective(format!(
                "need 0 < mu <= L, got mu = {mu}, L = {lipschitz}"
            )));
        }
        if objective.dim() == 0 {
            return Err(Error::InvalidObjective("dimension must be positive".into()));
        }
        Ok(Self {
            objective,
            mu,
            lipschitz,
            minimizer: None,
        })
    }

    pub fn with_minimizer(mut self, minimizer: Vector) -> Result<Self> {
        if minimizer.len() != self.dim() {
            return Err(Error::InvalidObjective(format!(
                "minimizer has length {}, expected {}",
                minimizer.len(),
                self.dim()
            )));
        }
        self.minimizer = Some(minimizer);
        Ok(self)
    }

    /// Same objective with a different claimed strong-convexity modulus.
    ///
    /// Only meant for fault injection: the resulting constant is no longer
    /// certified.
    pub fn with_claimed_mu(&self, mu: f64) -> Result<Self> {
        let mut other = Self::new(self.objective.clone(), mu, self.lipschitz)?;
        other.minimizer = self.minimizer.clone();
        Ok(other)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn minimizer(&self) -> Option<&Vector> {
        self.minimizer.as_ref()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.objective.gradient(x)
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }
}

const MINIMIZER_MAX_ITERS: usize = 10_000_000;

/// Gradient descent with stepsize `1/L` from the origin until
/// `|grad f| <= 1e-12 * max(1, |grad f(0)|)`.
pub fn minimizer_oracle(oracle: &ObjectiveOracle) -> Result<Vector> {
    minimizer_oracle_from(oracle, Vector::zeros(oracle.dim()))
}

/// As [`minimizer_oracle`], started at `start`; the tolerance is taken
/// relative to the gradient norm at `start`.
pub fn minimizer_oracle_from(oracle: &ObjectiveOracle, start: Vector) -> Result<Vector> {
    let step = 1.0 / oracle.lipschitz();
    let mut x = start;
    let mut g = oracle.gradient(&x);
    let tol = 1e-12 * g.norm().max(1.0);
    for _ in 0..MINIMIZER_MAX_ITERS {
        if g.norm() <= tol {
            return Ok(x);
        }
        x.axpy(-step, &g, 1.0);
        g = oracle.gradient(&x);
    }
    Err(Error::numeric(
        "minimizer_oracle",
        MINIMIZER_MAX_ITERS,
        format!("gradient norm {:e} above tolerance {tol:e}", g.norm()),
    ))
}

/// Maximum over coordinates of the relative discrepancy between the analytic
/// gradient and central finite differences with step `1e-6 (1 + |x|)`.
///
/// The relative error of coordinate `i` is `|fd_i - g_i| / max(1, |g_i|)`.
pub fn check_gradient(oracle: &ObjectiveOracle, x: &Vector) -> f64 {
    let h = 1e-6 * (1.0 + x.norm());
    let g = oracle.gradient(x);
    let mut worst = 0.0_f64;
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = oracle.value(&probe);
        probe[i] = x[i] - h;
        let down = oracle.value(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
    }
    worst
}
