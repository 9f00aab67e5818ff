//! The two reference problems and their experiment defaults.

use serde::{Deserialize, Serialize};

use super::{make_logistic, make_quadratic, LogisticDataset, ObjectiveOracle};
use crate::dynamics::{initial_velocity, FlowParams, State};
use crate::{Result, Vector};

/// Diagonal of the ill-conditioned quadratic: `mu = 2e-2`, `L = 2e2`.
pub const QUADRATIC_DIAG: [f64; 2] = [1e-2, 1e2];
/// Seed of the logistic dataset when none is given.
pub const DEFAULT_DATASET_SEED: u64 = 2020;
/// Every coordinate of the starting point.
pub const START_COORDINATE: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Quadratic,
    Logistic,
}

impl Benchmark {
    pub const ALL: [Benchmark; 2] = [Benchmark::Quadratic, Benchmark::Logistic];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Quadratic => "quadratic",
            Benchmark::Logistic => "logistic",
        }
    }

    /// Displacement used by the experiments on this problem.
    pub fn default_a(self) -> f64 {
        match self {
            Benchmark::Quadratic => 0.1,
            Benchmark::Logistic => 0.025,
        }
    }

    /// The oracle; the logistic problem uses the dataset drawn from `seed`.
    pub fn oracle(self, seed: u64) -> Result<ObjectiveOracle> {
        match self {
            Benchmark::Quadratic => make_quadratic(&QUADRATIC_DIAG),
            Benchmark::Logistic => make_logistic(&LogisticDataset::generate(seed)),
        }
    }
}

/// `x0 = 50 (1, ..., 1)` with the matching initial velocity.
pub fn start_state(oracle: &ObjectiveOracle, params: &FlowParams) -> State {
    let x0 = Vector::from_element(oracle.dim(), START_COORDINATE);
    let v0 = initial_velocity(&x0, params, oracle);
    State::new(x0, v0)
}
