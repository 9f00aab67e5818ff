use std::sync::Arc;

use super::{Objective, ObjectiveOracle};
use crate::{Error, Result, Vector};

/// Separable quadratic `f(x) = sum_i d_i x_i^2`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    diag: Vector,
}

impl Quadratic {
    pub fn new(diag: Vector) -> Self {
        Self { diag }
    }

    pub fn diag(&self) -> &Vector {
        &self.diag
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.diag.iter().zip(x.iter()).map(|(d, xi)| d * xi * xi).sum()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.diag.zip_map(x, |d, xi| 2.0 * d * xi)
    }
}

/// Quadratic oracle with `mu = 2 min d_i`, `L = 2 max d_i` and minimizer 0.
pub fn make_quadratic(diag: &[f64]) -> Result<ObjectiveOracle> {
    if diag.is_empty() {
        return Err(Error::InvalidObjective("empty diagonal".into()));
    }
    if let Some(bad) = diag.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidObjective(format!(
            "diagonal entries must be positive and finite, got {bad}"
        )));
    }
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diag.iter().copied().fold(0.0, f64::max);
    let n = diag.len();
    ObjectiveOracle::new(
        Arc::new(Quadratic::new(Vector::from_column_slice(diag))),
        2.0 * lo,
        2.0 * hi,
    )?
    .with_minimizer(Vector::zeros(n))
}
