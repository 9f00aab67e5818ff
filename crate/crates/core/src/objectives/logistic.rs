use std::sync::Arc;

use nalgebra::{DMatrix, Matrix4, Vector4};

use super::{minimizer_oracle, LogisticDataset, Objective, ObjectiveOracle, FEATURE_DIM};
use crate::{Error, Result, Vector};

/// `f(x) = sum_i log(1 + exp(-y_i <z_i, x>)) + |x|^2 / 2`.
#[derive(Clone, Debug)]
pub struct Logistic {
    /// One sample per row, each already multiplied by its label.
    signed: DMatrix<f64>,
}

impl Logistic {
    pub fn new(dataset: &LogisticDataset) -> Self {
        let rows = dataset.features.len();
        let signed = DMatrix::from_fn(rows, FEATURE_DIM, |i, j| {
            dataset.labels[i] as f64 * dataset.features[i][j]
        });
        Self { signed }
    }
}

/// `log(1 + e^u)` without overflow.
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// `1 / (1 + e^u)`.
fn logistic_tail(u: f64) -> f64 {
    if u >= 0.0 {
        let e = (-u).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + u.exp())
    }
}

impl Objective for Logistic {
    fn dim(&self) -> usize {
        FEATURE_DIM
    }

    fn value(&self, x: &Vector) -> f64 {
        let margins = &self.signed * x;
        margins.iter().map(|m| softplus(-m)).sum::<f64>() + 0.5 * x.norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let margins = &self.signed * x;
        let weights = margins.map(logistic_tail);
        x - self.signed.tr_mul(&weights)
    }
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

/// `1 + lambda_max(Z^T Z) / 4`, an upper bound on the Hessian of the
/// logistic loss (each sigmoid curvature is at most 1/4) plus the
/// regularizer. The eigenvalue comes from power iteration stopped once the
/// eigen-residual drops below `1e-10` relative.
pub fn lipschitz_estimate(dataset: &LogisticDataset) -> Result<f64> {
    dataset.validate()?;
    let mut gram = Matrix4::<f64>::zeros();
    for row in &dataset.features {
        let z = Vector4::from_column_slice(row);
        gram += z * z.transpose();
    }
    if gram.iter().all(|&g| g == 0.0) {
        return Ok(1.0);
    }
    let mut v = Vector4::new(1.0, 0.5, 1.0 / 3.0, 0.25).normalize();
    for iter in 0..POWER_MAX_ITERS {
        let w = gram * v;
        let lambda = v.dot(&w);
        let residual = (w - v * lambda).norm();
        if lambda > 0.0 && residual <= POWER_TOL * lambda {
            return Ok(1.0 + 0.25 * lambda);
        }
        let norm = w.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::numeric(
                "lipschitz_estimate",
                iter,
                "power iteration collapsed",
            ));
        }
        v = w / norm;
    }
    Err(Error::numeric(
        "lipschitz_estimate",
        POWER_MAX_ITERS,
        "power iteration did not converge",
    ))
}

/// Logistic oracle with `mu = 1`, `L` from [`lipschitz_estimate`] and the
/// minimizer cached from [`minimizer_oracle`].
pub fn make_logistic(dataset: &LogisticDataset) -> Result<ObjectiveOracle> {
    dataset.validate()?;
    let lipschitz = lipschitz_estimate(dataset)?;
    let oracle = ObjectiveOracle::new(Arc::new(Logistic::new(dataset)), 1.0, lipschitz)?;
    let minimizer = minimizer_oracle(&oracle)?;
    oracle.with_minimizer(minimizer)
}
