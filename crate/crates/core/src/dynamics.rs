//! Heavy-ball vector field with displaced gradient and its hold trajectories.

use std::ops::{Add, Mul, Sub};

use crate::objectives::ObjectiveOracle;
use crate::{Error, Result, Vector};

/// Phase-space point `p = [x, v]`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub x: Vector,
    pub v: Vector,
}

impl State {
    pub fn new(x: Vector, v: Vector) -> Self {
        debug_assert_eq!(x.len(), v.len());
        Self { x, v }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(Vector::zeros(n), Vector::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_squared() + self.v.norm_squared()).sqrt()
    }

    pub fn dot(&self, other: &State) -> f64 {
        self.x.dot(&other.x) + self.v.dot(&other.v)
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.v.iter()).all(|c| c.is_finite())
    }

    /// `self + t * direction`.
    pub fn advanced(&self, t: f64, direction: &State) -> State {
        State::new(&self.x + &direction.x * t, &self.v + &direction.v * t)
    }
}

impl Add<&State> for &State {
    type Output = State;
    fn add(self, rhs: &State) -> State {
        State::new(&self.x + &rhs.x, &self.v + &rhs.v)
    }
}

impl Sub<&State> for &State {
    type Output = State;
    fn sub(self, rhs: &State) -> State {
        State::new(&self.x - &rhs.x, &self.v - &rhs.v)
    }
}

impl Mul<f64> for &State {
    type Output = State;
    fn mul(self, rhs: f64) -> State {
        State::new(&self.x * rhs, &self.v * rhs)
    }
}

/// Scalars of the flow for a given objective.
///
/// `sqrt_mu_s` is `1 + sqrt(mu s)` and `mu_s` its square; every other
/// constant in the trigger formulas is built from these two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    pub s: f64,
    pub a: f64,
    pub mu: f64,
    pub lipschitz: f64,
    pub sqrt_mu: f64,
    pub sqrt_mu_s: f64,
    pub mu_s: f64,
}

impl FlowParams {
    pub fn new(oracle: &ObjectiveOracle, s: f64, a: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidConfig(format!("s must be positive, got {s}")));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidConfig(format!("a must be nonnegative, got {a}")));
        }
        let mu = oracle.mu();
        let sqrt_mu_s = 1.0 + (mu * s).sqrt();
        Ok(Self {
            s,
            a,
            mu,
            lipschitz: oracle.lipschitz(),
            sqrt_mu: mu.sqrt(),
            sqrt_mu_s,
            mu_s: sqrt_mu_s * sqrt_mu_s,
        })
    }

    /// The benchmark choice `s = mu / (36 L^2)`.
    pub fn default_s(oracle: &ObjectiveOracle) -> f64 {
        oracle.mu() / (36.0 * oracle.lipschitz().powi(2))
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    /// Exponential decay rate `sqrt(mu) / 4` certified for `V`.
    pub fn decay_rate(&self) -> f64 {
        0.25 * self.sqrt_mu
    }
}

/// `X^a_hb(p) = (v, -2 sqrt(mu) v - (1 + sqrt(mu s)) grad f(x + a v))`.
pub fn field_hb_displaced(p: &State, params: &FlowParams, oracle: &ObjectiveOracle) -> State {
    let displaced = displaced_gradient(p, params.a, oracle);
    field_with_gradient(p, &displaced, params)
}

pub(crate) fn displaced_gradient(p: &State, a: f64, oracle: &ObjectiveOracle) -> Vector {
    if a == 0.0 {
        oracle.gradient(&p.x)
    } else {
        oracle.gradient(&(&p.x + &p.v * a))
    }
}

fn field_with_gradient(p: &State, gradient: &Vector, params: &FlowParams) -> State {
    let vdot = &p.v * (-2.0 * params.sqrt_mu) - gradient * params.sqrt_mu_s;
    State::new(p.v.clone(), vdot)
}

/// Zero-order hold: the field frozen at `p_hat`, i.e. a forward-Euler ray.
#[derive(Clone, Debug)]
pub struct ZeroOrderHold {
    pub p_hat: State,
    pub field: State,
}

impl ZeroOrderHold {
    pub fn new(p_hat: &State, params: &FlowParams, oracle: &ObjectiveOracle) -> Self {
        Self::from_displaced_gradient(p_hat, &displaced_gradient(p_hat, params.a, oracle), params)
    }

    pub fn from_displaced_gradient(p_hat: &State, displaced: &Vector, params: &FlowParams) -> Self {
        Self {
            p_hat: p_hat.clone(),
            field: field_with_gradient(p_hat, displaced, params),
        }
    }

    pub fn at(&self, t: f64) -> State {
        self.p_hat.advanced(t, &self.field)
    }

    pub fn velocity(&self, _t: f64) -> State {
        self.field.clone()
    }
}

/// High-order hold: only the gradient term is frozen; the remaining linear
/// system `x' = v, v' = -2 sqrt(mu) v - F` is integrated exactly, where
/// `F = (1 + sqrt(mu s)) grad f(x_hat + a v_hat)`.
#[derive(Clone, Debug)]
pub struct HighOrderHold {
    pub p_hat: State,
    pub forcing: Vector,
    sqrt_mu: f64,
    mu: f64,
}

/// `e^{-u} - 1 + u`, accurate for small `u`.
fn exp_remainder2(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // Alternating series u^2/2 - u^3/6 + ...; 12 terms exceed f64
        // precision for |u| < 0.1.
        let mut term = u * u / 2.0;
        let mut sum = term;
        for k in 3..15 {
            term *= -u / k as f64;
            sum += term;
        }
        sum
    } else {
        (-u).exp_m1() + u
    }
}

impl HighOrderHold {
    pub fn new(p_hat: &State, params: &FlowParams, oracle: &ObjectiveOracle) -> Self {
        Self::from_displaced_gradient(p_hat, &displaced_gradient(p_hat, params.a, oracle), params)
    }

    pub fn from_displaced_gradient(p_hat: &State, displaced: &Vector, params: &FlowParams) -> Self {
        Self {
            p_hat: p_hat.clone(),
            forcing: displaced * params.sqrt_mu_s,
            sqrt_mu: params.sqrt_mu,
            mu: params.mu,
        }
    }

    pub fn at(&self, t: f64) -> State {
        let u = 2.0 * self.sqrt_mu * t;
        let decay = (-u).exp();
        // 1 - e^{-u}, computed once.
        let rise = -(-u).exp_m1();
        let x = &self.p_hat.x + &self.p_hat.v * (rise / (2.0 * self.sqrt_mu))
            - &self.forcing * (exp_remainder2(u) / (4.0 * self.mu));
        let v = &self.p_hat.v * decay - &self.forcing * (rise / (2.0 * self.sqrt_mu));
        State::new(x, v)
    }

    /// Time derivative of [`HighOrderHold::at`].
    pub fn velocity(&self, t: f64) -> State {
        let p = self.at(t);
        let vdot = &p.v * (-2.0 * self.sqrt_mu) - &self.forcing;
        State::new(p.v, vdot)
    }

    /// Right-hand side `A p + b` of the frozen-gradient linear system.
    pub fn linear_field(&self, p: &State) -> State {
        State::new(p.v.clone(), &p.v * (-2.0 * self.sqrt_mu) - &self.forcing)
    }
}

/// `p_hat + t X^a_hb(p_hat)`; one gradient evaluation.
pub fn zoh_trajectory(p_hat: &State, t: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> State {
    ZeroOrderHold::new(p_hat, params, oracle).at(t)
}

/// Closed-form solution of the frozen-gradient linear system from `p_hat`;
/// one gradient evaluation.
pub fn hoh_trajectory(p_hat: &State, t: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> State {
    HighOrderHold::new(p_hat, params, oracle).at(t)
}

/// `v(0) = -2 sqrt(s) grad f(x0) / (1 + sqrt(mu s))`.
pub fn initial_velocity(x0: &Vector, params: &FlowParams, oracle: &ObjectiveOracle) -> Vector {
    oracle.gradient(x0) * (-2.0 * params.s.sqrt() / params.sqrt_mu_s)
}

/// Sampled trajectory of a fixed-step integrator.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &State)> {
        self.times.last().copied().zip(self.states.last())
    }
}

/// Classical fourth-order Runge-Kutta with a fixed step.
///
/// The horizon is split into `ceil(horizon / step)` equal steps so that the
/// last sample lands exactly on `horizon`. Every step is recorded.
pub fn rk4_reference<F>(field: F, p0: &State, horizon: f64, step: f64) -> Result<Trajectory>
where
    F: Fn(&State) -> State,
{
    if !(step > 0.0) || !(horizon >= step) {
        return Err(Error::InvalidConfig(format!(
            "rk4 needs 0 < h <= T, got h = {step}, T = {horizon}"
        )));
    }
    let n = (horizon / step - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / n as f64;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
    };
    let mut p = p0.clone();
    traj.times.push(0.0);
    traj.states.push(p.clone());
    for i in 1..=n {
        let k1 = field(&p);
        let k2 = field(&p.advanced(0.5 * h, &k1));
        let k3 = field(&p.advanced(0.5 * h, &k2));
        let k4 = field(&p.advanced(h, &k3));
        let incr = &(&(&k1 + &(&k2 * 2.0)) + &(&k3 * 2.0)) + &k4;
        p = p.advanced(h / 6.0, &incr);
        if !p.is_finite() {
            return Err(Error::numeric("rk4_reference", i, "non-finite state"));
        }
        traj.times.push(i as f64 * h);
        traj.states.push(p.clone());
    }
    Ok(traj)
}
