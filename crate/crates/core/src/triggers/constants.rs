//! Displacement thresholds and the minimum inter-event time.

use serde::Serialize;

use crate::dynamics::FlowParams;
use crate::objectives::ObjectiveOracle;
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.9;
/// Grid resolution used to compute the default stepsize floor.
pub const TAU_GRID_POINTS: usize = 1024;
/// Safety factor applied to the grid minimum of the MIET.
pub const TAU_SAFETY: f64 = 0.99;

/// Constants certifying the displaced-gradient flow and its triggered
/// implementations for a given `(mu, L, s)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TriggerConstants {
    /// Continuous-time decay constants, `beta[0]` is the first.
    pub beta: [f64; 4],
    /// Largest displacement certified for the continuous flow.
    pub a1_star: f64,
    /// Constants of the sampled (zero-order hold) analysis.
    pub beta_hat: [f64; 5],
    pub alpha: f64,
    /// Largest displacement certified for the triggered algorithm.
    pub a2_star: f64,
    #[serde(skip)]
    params: FlowParams,
}

/// Inter-event constants at a fixed displacement: `MIET = -nu + sqrt(nu^2 + eta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MietTerms {
    pub eta1: f64,
    pub eta2: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl MietTerms {
    pub fn eta(&self) -> f64 {
        self.eta1.min(self.eta2)
    }

    pub fn nu(&self) -> f64 {
        self.nu1.max(self.nu2)
    }

    /// `-nu + sqrt(nu^2 + eta)`, written without cancellation.
    pub fn miet(&self) -> f64 {
        let (eta, nu) = (self.eta(), self.nu());
        if nu > 0.0 {
            eta / (nu + (nu * nu + eta).sqrt())
        } else {
            -nu + (nu * nu + eta).sqrt()
        }
    }
}

impl TriggerConstants {
    pub fn new(oracle: &ObjectiveOracle, params: &FlowParams, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let mu = oracle.mu();
        let l = oracle.lipschitz();
        let sqrt_mu = mu.sqrt();
        let sms = params.sqrt_mu_s;
        let sqrt_s = params.s.sqrt();

        let beta4 = (4.0 * mu * mu * sqrt_s + 3.0 * l * sqrt_mu * sms) / (8.0 * l * l);
        let beta = [sms * mu, sms * l / sqrt_mu, 13.0 * sqrt_mu / 16.0, beta4];
        let [b1, b2, b3, b4] = beta;
        let a1_star = 2.0 / (b2 * b2) * (b1 * b4 + (b2 * b2 * b3 * b4 + b1 * b1 * b4 * b4).sqrt());

        let beta_hat = [
            sms * (1.5 * sqrt_mu + l),
            sqrt_mu * sms * 1.5,
            13.0 * sqrt_mu / 16.0,
            beta4,
            sms * (2.5 * sqrt_mu * l - 0.5 * mu * sqrt_mu),
        ];
        let [h1, h2, h3, h4, h5] = beta_hat;
        let quadratic_root = 2.0 * h3 / (h1 + (h1 * h1 + 4.0 * h5 * h3).sqrt());
        let a2_star = alpha * quadratic_root.min(h4 / h2);

        Ok(Self {
            beta,
            a1_star,
            beta_hat,
            alpha,
            a2_star,
            params: params.with_a(0.0),
        })
    }

    pub fn with_default_alpha(oracle: &ObjectiveOracle, params: &FlowParams) -> Result<Self> {
        Self::new(oracle, params, DEFAULT_ALPHA)
    }

    /// `g(z) = (beta3 + beta4 z^2) / (-beta1 + beta2 z)`, finite for `z > beta1 / beta2`.
    pub fn g(&self, z: f64) -> f64 {
        let [b1, b2, b3, b4] = self.beta;
        (b3 + b4 * z * z) / (-b1 + b2 * z)
    }

    /// Left edge of the domain of [`Self::g`].
    pub fn g_pole(&self) -> f64 {
        self.beta[0] / self.beta[1]
    }

    /// The minimizer of `g` on its domain.
    pub fn z_root_plus(&self) -> f64 {
        let [b1, b2, b3, b4] = self.beta;
        (b1 * b4 + (b2 * b2 * b3 * b4 + b1 * b1 * b4 * b4).sqrt()) / (b2 * b4)
    }

    /// `a1_star` recomputed as the minimum value of `g`.
    pub fn a1_star_from_g(&self) -> f64 {
        self.g(self.z_root_plus())
    }

    pub fn miet_terms(&self, a: f64) -> MietTerms {
        let p = &self.params;
        let (mu, l, sms, sqrt_mu) = (p.mu, p.lipschitz, p.sqrt_mu_s, p.sqrt_mu);
        let mu_s = p.mu_s;
        let sqrt_s = p.s.sqrt();

        let shared = sms * l * (3.0 * a * a * sms * l + 1.0);
        let eta1 = (8.0 * a * sms * (a * (mu - 5.0 * l) - 2.0 * l / sqrt_mu - 3.0) + 13.0) / (2.0 * shared + 8.0 * mu);
        let eta2 = -(3.0 * sms * sqrt_mu * l * (4.0 * a * l - 1.0) - 4.0 * mu * mu * sqrt_s) / (3.0 * mu_s * sqrt_mu * l * l);
        let nu1 = (mu * (2.0 * a.powi(3) * sms * l * l + a * sms + 16.0) + 8.0 * sms * l * (2.0 * a * a * sms * l + 1.0))
            / (2.0 * sqrt_mu * (shared + 4.0 * mu))
            + sms * (a * l * (8.0 * a * l + 1.0) + 4.0) / (shared + 4.0 * mu);
        let nu2 = (a * mu + 8.0 * sms + 8.0 * sqrt_mu) / (3.0 * sms * sqrt_mu);
        MietTerms { eta1, eta2, nu1, nu2 }
    }

    /// Uniform lower bound on derivative-trigger stepsizes at displacement `a`.
    pub fn miet(&self, a: f64) -> f64 {
        self.miet_terms(a).miet()
    }

    /// `(a, MIET(a))` on `points` equally spaced displacements in `[0, a2_star]`.
    pub fn miet_grid(&self, points: usize) -> Vec<(f64, f64)> {
        let n = points.max(2);
        (0..n)
            .map(|i| {
                let a = self.a2_star * i as f64 / (n - 1) as f64;
                (a, self.miet(a))
            })
            .collect()
    }

    /// Default stepsize floor for the adaptive algorithms.
    pub fn default_tau(&self) -> Result<f64> {
        let min = self
            .miet_grid(TAU_GRID_POINTS)
            .into_iter()
            .map(|(_, m)| m)
            .fold(f64::INFINITY, f64::min);
        if !(min > 0.0 && min.is_finite()) {
            return Err(Error::numeric("default_tau", 0, format!("grid minimum of MIET is {min}")));
        }
        Ok(TAU_SAFETY * min)
    }
}
