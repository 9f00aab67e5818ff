//! Upper bounds on the decay of `V` along held trajectories.
//!
//! Every bound `b(t)` satisfies `b(0) = C(p_hat; a)`, the decay margin at the
//! sample, and dominates `d/dt V(p(t)) + (sqrt(mu)/4) V(p(t))` (derivative
//! design) or its exponentially weighted integral (performance design) along
//! the hold started at `p_hat`. None of them needs `x*`.

use std::cell::RefCell;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::integral::exp_weighted_quadratic;
use super::quadrature::CumulativeIntegral;
use crate::dynamics::{FlowParams, HighOrderHold, State};
use crate::objectives::ObjectiveOracle;
use crate::{Error, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    /// Keep `d/dt V + (sqrt(mu)/4) V <= 0` at every instant of the step.
    Derivative,
    /// Keep `V(p(t)) <= exp(-sqrt(mu) t / 4) V(p_hat)` over the step.
    Performance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Event-triggered: the bound is monitored along the trajectory.
    Et,
    /// Self-triggered: the bound is a quadratic in `t` known at the sample.
    St,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hold {
    /// Whole vector field frozen at the sample (forward Euler).
    Zoh,
    /// Only the displaced gradient frozen, linear part integrated exactly.
    Hoh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundKind {
    pub design: Design,
    pub mode: Mode,
    pub hold: Hold,
}

impl BoundKind {
    pub const fn new(design: Design, mode: Mode, hold: Hold) -> Self {
        Self { design, mode, hold }
    }

    pub const ALL: [BoundKind; 8] = [
        BoundKind::new(Design::Derivative, Mode::St, Hold::Zoh),
        BoundKind::new(Design::Derivative, Mode::Et, Hold::Zoh),
        BoundKind::new(Design::Performance, Mode::St, Hold::Zoh),
        BoundKind::new(Design::Performance, Mode::Et, Hold::Zoh),
        BoundKind::new(Design::Derivative, Mode::St, Hold::Hoh),
        BoundKind::new(Design::Derivative, Mode::Et, Hold::Hoh),
        BoundKind::new(Design::Performance, Mode::St, Hold::Hoh),
        BoundKind::new(Design::Performance, Mode::Et, Hold::Hoh),
    ];

    pub fn with_mode(self, mode: Mode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_design(self, design: Design) -> Self {
        Self { design, ..self }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hold = match self.hold {
            Hold::Zoh => "zoh",
            Hold::Hoh => "hoh",
        };
        let design = match self.design {
            Design::Derivative => "derivative",
            Design::Performance => "performance",
        };
        let mode = match self.mode {
            Mode::Et => "et",
            Mode::St => "st",
        };
        write!(f, "{hold}-{design}-{mode}")
    }
}

/// Oracle evaluations at the sample shared by all bounds.
#[derive(Clone, Debug)]
pub struct Sample {
    pub p_hat: State,
    pub a: f64,
    pub grad_x: Vector,
    /// `grad f(x_hat + a v_hat)`.
    pub grad_displaced: Vector,
    pub f_x: f64,
    pub f_displaced: f64,
    /// `2 sqrt(mu) v_hat + sqrt_mu_s grad f(x_hat + a v_hat)`, minus the
    /// velocity derivative of the held field.
    pub w: Vector,
    /// Decay margin `C(p_hat; a)`, the value of every bound at `t = 0`.
    pub constant: f64,
    /// Sum of the absolute values of the summands of `constant`.
    pub magnitude: f64,
}

impl Sample {
    pub fn new(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> Self {
        let grad_x = oracle.gradient(&p_hat.x);
        let f_x = oracle.value(&p_hat.x);
        let (grad_displaced, f_displaced) = if a == 0.0 {
            (grad_x.clone(), f_x)
        } else {
            let xa = &p_hat.x + &p_hat.v * a;
            (oracle.gradient(&xa), oracle.value(&xa))
        };
        Self::from_evaluations(p_hat, a, params, grad_x, grad_displaced, f_x, f_displaced)
    }

    pub fn from_evaluations(
        p_hat: &State,
        a: f64,
        params: &FlowParams,
        grad_x: Vector,
        grad_displaced: Vector,
        f_x: f64,
        f_displaced: f64,
    ) -> Self {
        let w = &p_hat.v * (2.0 * params.sqrt_mu) + &grad_displaced * params.sqrt_mu_s;
        let mut sample = Self {
            p_hat: p_hat.clone(),
            a,
            grad_x,
            grad_displaced,
            f_x,
            f_displaced,
            w,
            constant: 0.0,
            magnitude: 0.0,
        };
        (sample.constant, sample.magnitude) = decay_margin(&sample, params);
        sample
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.w.iter().all(|c| c.is_finite()) && self.f_x.is_finite()
    }
}

/// `C(p_hat; a)`, shared verbatim by all eight bound kinds, and the
/// magnitude of its summands.
fn decay_margin(s: &Sample, p: &FlowParams) -> (f64, f64) {
    let (mu, l, sqrt_mu, sms) = (p.mu, p.lipschitz, p.sqrt_mu, p.sqrt_mu_s);
    let v = &s.p_hat.v;
    let av = v * s.a;
    let ngx = s.grad_x.norm();
    let nav = av.norm();
    let inner = [
        -3.0 * sqrt_mu / (8.0 * l) * ngx * ngx,
        sqrt_mu * (s.f_x - s.f_displaced),
        sqrt_mu * ngx * nav,
        -0.5 * mu * sqrt_mu * nav * nav,
        -(&s.grad_displaced - &s.grad_x).dot(v),
        sqrt_mu * s.grad_displaced.dot(&av),
    ];
    let outer = [
        -13.0 * sqrt_mu / 16.0 * v.norm_squared(),
        -0.5 * mu * mu * p.s.sqrt() * ngx * ngx / (l * l),
    ];
    let value = outer[0] + outer[1] + sms * inner.iter().sum::<f64>();
    let magnitude = outer.iter().map(|x| x.abs()).sum::<f64>()
        + sms * inner.iter().map(|x| x.abs()).sum::<f64>()
        + sms * sqrt_mu * (s.f_x.abs() + s.f_displaced.abs())
        + sms * (s.grad_displaced.norm() + ngx) * v.norm();
    (value, magnitude)
}

/// Self-triggered derivative bound of the zero-order hold as `[c2, c1, c0]`.
fn zoh_st_coefficients(s: &Sample, p: &FlowParams) -> [f64; 3] {
    let (mu, l, sqrt_mu, sms) = (p.mu, p.lipschitz, p.sqrt_mu, p.sqrt_mu_s);
    let v = &s.p_hat.v;
    let nv2 = v.norm_squared();
    let nga2 = s.grad_displaced.norm_squared();
    let ga_v = s.grad_displaced.dot(v);
    let a_st = 2.0 * mu * nv2 + sms * (l * nv2 + 2.0 * sqrt_mu * ga_v + sms * nga2);
    let b_lin = 0.25
        * sqrt_mu
        * (-sqrt_mu * nv2 + sms * ((&s.grad_x - &s.grad_displaced).dot(v) - sqrt_mu / l * nga2 + sqrt_mu * s.a * ga_v));
    let b_quad = sqrt_mu / 16.0 * s.w.norm_squared() + 0.25 * sqrt_mu * sms * (0.5 * l * nv2 + 0.25 * sms * nga2);
    [b_quad, a_st + b_lin, s.constant]
}

/// Self-triggered derivative bound of the high-order hold as `[c2, c1, c0]`.
fn hoh_st_coefficients(s: &Sample, p: &FlowParams) -> [f64; 3] {
    let (mu, l, sqrt_mu, sms, mu_s) = (p.mu, p.lipschitz, p.sqrt_mu, p.sqrt_mu_s, p.mu_s);
    let v = &s.p_hat.v;
    let nw = s.w.norm();
    let nga = s.grad_displaced.norm();
    let ngx = s.grad_x.norm();
    let nv = v.norm();
    let mu32 = mu * sqrt_mu;
    let l_half = l * sms / (2.0 * sqrt_mu);

    let a_lin = nw * (sqrt_mu * nv + l_half * nv + 1.5 * sms * nga) + 0.5 * mu_s * nga * (l / sqrt_mu * nv + nga);
    let a_quad = nw * ((l_half + sqrt_mu) * nw + l * mu_s / (2.0 * sqrt_mu) * nga);
    let b_lin = 0.25
        * sqrt_mu
        * sms
        * (sms / (2.0 * sqrt_mu) * nga * ngx + 0.5 * nw * (ngx / sqrt_mu + nv / sms) - sqrt_mu * nga * nga / l
            + (s.a * sqrt_mu - 0.5) * s.grad_displaced.dot(v));
    let l2 = l * l;
    let b_quad = (10.0 * mu * mu + l2 * sms) / (32.0 * mu32) * nw * nw
        + mu_s * (4.0 * mu * mu + l2 * sms) / (32.0 * mu32) * nga * nga
        + sms * (4.0 * mu * mu + l2 * sms) / (16.0 * mu32) * nw * nga;
    let d_st = nw * (sms * ngx + sqrt_mu * nv);
    [a_quad + b_quad, a_lin + b_lin + d_st, s.constant]
}

/// A trigger bound for one sample. Event-triggered performance bounds carry
/// a quadrature cache, so an instance should be probed by a single consumer.
#[derive(Debug)]
pub struct StepBound {
    kind: BoundKind,
    sample: Sample,
    params: FlowParams,
    oracle: ObjectiveOracle,
    st: [f64; 3],
    hoh: Option<HighOrderHold>,
    cache: RefCell<CumulativeIntegral>,
}

impl Clone for StepBound {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind,
            sample: self.sample.clone(),
            params: self.params,
            oracle: self.oracle.clone(),
            st: self.st,
            hoh: self.hoh.clone(),
            cache: RefCell::new(CumulativeIntegral::default()),
        }
    }
}

impl StepBound {
    pub fn new(kind: BoundKind, p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> Self {
        let params = params.with_a(a);
        let sample = Sample::new(p_hat, a, &params, oracle);
        Self::from_sample(kind, sample, &params, oracle)
    }

    pub fn from_sample(kind: BoundKind, sample: Sample, params: &FlowParams, oracle: &ObjectiveOracle) -> Self {
        let params = params.with_a(sample.a);
        let (st, hoh) = match kind.hold {
            Hold::Zoh => (zoh_st_coefficients(&sample, &params), None),
            Hold::Hoh => (
                hoh_st_coefficients(&sample, &params),
                Some(HighOrderHold::from_displaced_gradient(&sample.p_hat, &sample.grad_displaced, &params)),
            ),
        };
        Self {
            kind,
            sample,
            params,
            oracle: oracle.clone(),
            st,
            hoh,
            cache: RefCell::new(CumulativeIntegral::default()),
        }
    }

    /// The same sample seen through a different bound kind.
    pub fn with_kind(&self, kind: BoundKind) -> Self {
        if kind.hold == self.kind.hold {
            let mut out = self.clone();
            out.kind = kind;
            out
        } else {
            Self::from_sample(kind, self.sample.clone(), &self.params, &self.oracle)
        }
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    /// `C(p_hat; a)`.
    pub fn constant_term(&self) -> f64 {
        self.sample.constant
    }

    /// `[c2, c1, c0]` of the self-triggered derivative polynomial, for ST kinds.
    pub fn st_coeffs(&self) -> Option<[f64; 3]> {
        (self.kind.mode == Mode::St).then_some(self.st)
    }

    /// The self-triggered derivative polynomial of this hold, whatever the mode.
    pub fn st_polynomial(&self) -> [f64; 3] {
        self.st
    }

    /// State of the hold trajectory at time `t`.
    pub fn trajectory(&self, t: f64) -> State {
        match &self.hoh {
            Some(hoh) => hoh.at(t),
            None => {
                let p = &self.sample.p_hat;
                let vdot = -&self.sample.w;
                State::new(&p.x + &p.v * t, &p.v + vdot * t)
            }
        }
    }

    /// Time derivative of [`Self::trajectory`].
    pub fn velocity(&self, t: f64) -> State {
        match &self.hoh {
            Some(hoh) => hoh.velocity(t),
            // The whole field is frozen, so the velocity does not depend on t.
            None => State::new(self.sample.p_hat.v.clone(), -&self.sample.w),
        }
    }

    /// The derivative-design bound of this kind's mode and hold at `t`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.derivative_with_noise(t).map(|(value, _)| value)
    }

    /// [`Self::derivative`] plus an absolute bound on its rounding error.
    pub fn derivative_with_noise(&self, t: f64) -> Result<(f64, f64)> {
        let (value, magnitude) = match self.kind.mode {
            Mode::St => {
                let [c2, c1, c0] = self.st;
                (polynomial(self.st, t), (c2 * t * t).abs() + (c1 * t).abs() + c0.abs())
            }
            Mode::Et => match self.kind.hold {
                Hold::Zoh => self.zoh_et(t),
                Hold::Hoh => self.hoh_et(t),
            },
        };
        if value.is_finite() {
            Ok((value, ROUNDING * magnitude))
        } else {
            Err(Error::numeric("trigger bound", 0, format!("{} is {value} at t = {t:e}", self.kind)))
        }
    }

    /// The bound this kind compares against zero: the derivative bound
    /// itself, or `int_0^t exp(sqrt(mu) z / 4) b_d(z) dz` for performance kinds.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match (self.kind.design, self.kind.mode) {
            (Design::Derivative, _) => self.derivative(t),
            (Design::Performance, Mode::St) => {
                let value = exp_weighted_quadratic(self.params.decay_rate(), self.st, t);
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::numeric("trigger bound", 0, format!("{} is {value} at t = {t:e}", self.kind)))
                }
            }
            (Design::Performance, Mode::Et) => {
                let kappa = self.params.decay_rate();
                let mut integrand = |z: f64| {
                    let weight = (kappa * z).exp();
                    let (value, noise) = self.derivative_with_noise(z)?;
                    Ok((weight * value, weight * noise))
                };
                self.cache.borrow_mut().eval(&mut integrand, t)
            }
        }
    }

    /// Returns the bound and the magnitude of the terms it sums.
    fn zoh_et(&self, t: f64) -> (f64, f64) {
        let p = &self.params;
        let s = &self.sample;
        let (mu, l, sqrt_mu, sms) = (p.mu, p.lipschitz, p.sqrt_mu, p.sqrt_mu_s);
        let v = &s.p_hat.v;
        let xt = &s.p_hat.x + v * t;
        let (gt, ft) = (self.oracle.gradient(&xt), self.oracle.value(&xt));
        let nv2 = v.norm_squared();
        let nga2 = s.grad_displaced.norm_squared();
        let ga_v = s.grad_displaced.dot(v);

        let f_weight = 0.25 * sqrt_mu * sms;
        let mut acc = Terms::default();
        acc.add(2.0 * mu * t * nv2);
        acc.add(sms * (&gt - &s.grad_x).dot(v));
        acc.add(sms * (2.0 * t * sqrt_mu * ga_v + t * sms * nga2));
        acc.add(sqrt_mu * t * t / 16.0 * s.w.norm_squared());
        acc.add(-t * mu / 4.0 * nv2);
        acc.add(f_weight * (ft - s.f_x));
        acc.add(f_weight * (-t * ga_v + t * t * sms / 4.0 * nga2 - t * sqrt_mu / l * nga2 + t * sqrt_mu * s.a * ga_v));
        acc.add(s.constant);
        let cancellation = sms * (gt.norm() + s.grad_x.norm()) * v.norm() + f_weight * (ft.abs() + s.f_x.abs());
        (acc.sum, acc.magnitude + cancellation + s.magnitude)
    }

    /// Returns the bound and the magnitude of the terms it sums.
    fn hoh_et(&self, t: f64) -> (f64, f64) {
        let p = &self.params;
        let s = &self.sample;
        let (l, sqrt_mu, sms) = (p.lipschitz, p.sqrt_mu, p.sqrt_mu_s);
        let hat = &s.p_hat;
        let pt = self.trajectory(t);
        let (gt, ft) = (self.oracle.gradient(&pt.x), self.oracle.value(&pt.x));
        let dx = &pt.x - &hat.x;
        let dv = &pt.v - &hat.v;
        let ga = &s.grad_displaced;
        let nga2 = ga.norm_squared();

        let mixed = &dv + &dx * (2.0 * sqrt_mu);
        let quarter = 0.25 * sqrt_mu;
        let mut acc = Terms::default();
        // First family.
        acc.add(sms * (&gt - &s.grad_x).dot(&pt.v));
        acc.add(-sms * dv.dot(ga));
        acc.add(-sms * sqrt_mu * dx.dot(ga));
        acc.add(-sqrt_mu * dv.dot(&pt.v));
        // Second family.
        acc.add(quarter * sms * (ft - s.f_x));
        acc.add(quarter * (-sqrt_mu * sms * t * nga2 / l + sqrt_mu * sms * t * s.a * ga.dot(&hat.v)));
        acc.add(quarter * 0.25 * (pt.v.norm_squared() - hat.v.norm_squared()));
        acc.add(quarter * (0.25 * mixed.norm_squared() + 0.5 * mixed.dot(&hat.v)));
        acc.add(s.constant);
        // Third family.
        acc.add(sms * s.grad_x.dot(&dv) - sqrt_mu * hat.v.dot(&dv));
        let cancellation = sms * (gt.norm() + s.grad_x.norm()) * pt.v.norm()
            + quarter * sms * (ft.abs() + s.f_x.abs())
            + quarter * 0.25 * (pt.v.norm_squared() + hat.v.norm_squared());
        (acc.sum, acc.magnitude + cancellation + s.magnitude)
    }
}

/// Relative rounding level assigned to each summand of a bound.
const ROUNDING: f64 = 8.0 * f64::EPSILON;

#[derive(Default)]
struct Terms {
    sum: f64,
    magnitude: f64,
}

impl Terms {
    fn add(&mut self, term: f64) {
        self.sum += term;
        self.magnitude += term.abs();
    }
}

pub(crate) fn polynomial(c: [f64; 3], t: f64) -> f64 {
    (c[0] * t + c[1]) * t + c[2]
}

pub fn zoh_bound_derivative_st(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Derivative, Mode::St, Hold::Zoh), p_hat, a, params, oracle)
}

pub fn zoh_bound_derivative_et(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Derivative, Mode::Et, Hold::Zoh), p_hat, a, params, oracle)
}

pub fn zoh_bound_performance_st(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Performance, Mode::St, Hold::Zoh), p_hat, a, params, oracle)
}

pub fn zoh_bound_performance_et(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Performance, Mode::Et, Hold::Zoh), p_hat, a, params, oracle)
}

pub fn hoh_bound_derivative_st(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Derivative, Mode::St, Hold::Hoh), p_hat, a, params, oracle)
}

pub fn hoh_bound_derivative_et(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Derivative, Mode::Et, Hold::Hoh), p_hat, a, params, oracle)
}

pub fn hoh_bound_performance_st(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Performance, Mode::St, Hold::Hoh), p_hat, a, params, oracle)
}

pub fn hoh_bound_performance_et(p_hat: &State, a: f64, params: &FlowParams, oracle: &ObjectiveOracle) -> StepBound {
    StepBound::new(BoundKind::new(Design::Performance, Mode::Et, Hold::Hoh), p_hat, a, params, oracle)
}
