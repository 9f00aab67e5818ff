//! Discrete baselines and the continuous reference trajectory.
//!
//! Baseline traces use the iteration counter as time (`t = k`, `delta = 1`)
//! and store `x_k - x_{k-1}` as the velocity.

use super::{IterationRecord, RunTrace};
use crate::dynamics::{field_hb_displaced, rk4_reference, FlowParams, State};
use crate::lyapunov::LyapunovContext;
use crate::objectives::ObjectiveOracle;
use crate::{Error, Result, Vector};

fn check_start(x0: &Vector, oracle: &ObjectiveOracle, epsilon: f64) -> Result<()> {
    if x0.len() != oracle.dim() {
        return Err(Error::InvalidConfig(format!(
            "initial point has dimension {}, objective has {}",
            x0.len(),
            oracle.dim()
        )));
    }
    if !x0.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidConfig("initial point is not finite".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

fn baseline_record(k: usize, x: &Vector, prev: &Vector, grad_norm: f64, oracle: &ObjectiveOracle, last: bool) -> IterationRecord {
    let f_gap = oracle
        .minimizer()
        .map(|x_star| (oracle.value(x) - oracle.value(x_star)).max(0.0));
    IterationRecord {
        k,
        t: k as f64,
        delta: (!last).then_some(1.0),
        state: State::new(x.clone(), x - prev),
        a: 0.0,
        grad_norm,
        f_gap,
        lyapunov: None,
        inner_retries: 0,
        capped: false,
    }
}

/// Two-point momentum iteration shared by both baselines:
/// `next = step(x_k, x_{k-1}, grad f(x_k))`.
fn momentum_loop<F>(
    name: &str,
    x0: &Vector,
    oracle: &ObjectiveOracle,
    max_iters: usize,
    epsilon: f64,
    mut step: F,
) -> Result<RunTrace>
where
    F: FnMut(&Vector, &Vector, &Vector) -> Vector,
{
    check_start(x0, oracle, epsilon)?;
    let mut trace = RunTrace::new(name);
    let mut prev = x0.clone();
    let mut x = x0.clone();
    for k in 0.. {
        let g = oracle.gradient(&x);
        let grad_norm = g.norm();
        if !grad_norm.is_finite() {
            return Err(Error::Run {
                algorithm: name.to_string(),
                index: k,
                source: Box::new(Error::numeric("gradient", k, format!("gradient norm is {grad_norm}"))),
            });
        }
        let done = grad_norm < epsilon;
        if done || k >= max_iters {
            trace.records.push(baseline_record(k, &x, &prev, grad_norm, oracle, true));
            trace.converged = done;
            break;
        }
        trace.records.push(baseline_record(k, &x, &prev, grad_norm, oracle, false));
        let next = step(&x, &prev, &g);
        prev = std::mem::replace(&mut x, next);
    }
    Ok(trace)
}

/// Nesterov's method for strongly convex functions:
/// `y_{k+1} = x_k - s grad f(x_k)`,
/// `x_{k+1} = y_{k+1} + (1 - sqrt(mu s)) / (1 + sqrt(mu s)) (y_{k+1} - y_k)`, `y_0 = x_0`.
pub fn run_nesterov(x0: &Vector, s: f64, oracle: &ObjectiveOracle, max_iters: usize, epsilon: f64) -> Result<RunTrace> {
    if !(s > 0.0 && s <= 1.0 / oracle.lipschitz() * (1.0 + 1e-12)) {
        return Err(Error::InvalidConfig(format!(
            "Nesterov step must lie in (0, 1/L], got {s} with L = {}",
            oracle.lipschitz()
        )));
    }
    let root = (oracle.mu() * s).sqrt();
    let momentum = (1.0 - root) / (1.0 + root);
    let mut y_prev = x0.clone();
    momentum_loop("nesterov", x0, oracle, max_iters, epsilon, |x, _, g| {
        let y = x - g * s;
        let next = &y + (&y - &y_prev) * momentum;
        y_prev = y;
        next
    })
}

/// Step and momentum of Polyak's heavy-ball method tuned for `(mu, L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeavyBallCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl HeavyBallCoefficients {
    pub fn new(mu: f64, lipschitz: f64) -> Self {
        let (sl, sm) = (lipschitz.sqrt(), mu.sqrt());
        Self {
            alpha: 4.0 / (sl + sm).powi(2),
            beta: ((sl - sm) / (sl + sm)).powi(2),
        }
    }
}

/// `x_{k+1} = x_k - alpha grad f(x_k) + beta (x_k - x_{k-1})`, `x_{-1} = x_0`.
pub fn run_heavy_ball_discrete(x0: &Vector, oracle: &ObjectiveOracle, max_iters: usize, epsilon: f64) -> Result<RunTrace> {
    let HeavyBallCoefficients { alpha, beta } = HeavyBallCoefficients::new(oracle.mu(), oracle.lipschitz());
    momentum_loop("heavy-ball", x0, oracle, max_iters, epsilon, |x, prev, g| {
        x - g * alpha + (x - prev) * beta
    })
}

/// RK4 integration of the displaced-gradient flow, one record per step.
pub fn run_continuous_reference(
    p0: &State,
    a: f64,
    params: &FlowParams,
    oracle: &ObjectiveOracle,
    horizon: f64,
    step: f64,
) -> Result<RunTrace> {
    let params = params.with_a(a);
    let traj = rk4_reference(|q| field_hb_displaced(q, &params, oracle), p0, horizon, step)?;
    let ctx = oracle
        .minimizer()
        .map(|_| LyapunovContext::new(oracle, params))
        .transpose()?;
    let mut trace = RunTrace::new("continuous");
    for (k, (t, p)) in traj.times.iter().zip(&traj.states).enumerate() {
        let delta = traj.times.get(k + 1).map(|next| next - t);
        trace.records.push(IterationRecord {
            k,
            t: *t,
            delta,
            state: p.clone(),
            a,
            grad_norm: oracle.gradient(&p.x).norm(),
            f_gap: ctx.as_ref().map(|c| c.f_gap(&p.x)),
            lyapunov: ctx.as_ref().map(|c| c.value(p)),
            inner_retries: 0,
            capped: false,
        });
    }
    trace.converged = trace.last().is_some_and(|r| r.grad_norm < super::DEFAULT_EPSILON);
    Ok(trace)
}
