//! Displaced-gradient (fixed and adaptive) and adaptive high-order-hold runs.

use super::{AlgoConfig, IterationRecord, RunTrace, A_FLOOR, MAX_SHRINKS};
use crate::dynamics::{FlowParams, State};
use crate::lyapunov::LyapunovContext;
use crate::objectives::ObjectiveOracle;
use crate::triggers::{default_t_max, step_size, BoundKind, Hold, StepBound, StepDiagnostic, StepOutcome, TriggerConstants};
use crate::{Error, Result};

/// Problem-dependent quantities resolved from an [`AlgoConfig`].
#[derive(Clone, Debug)]
pub struct RunSetup {
    /// Flow parameters with `a = 0`; the displacement is tracked per step.
    pub params: FlowParams,
    pub constants: TriggerConstants,
    pub tau: f64,
    pub t_max: f64,
    lyapunov: Option<LyapunovContext>,
}

impl RunSetup {
    pub fn new(config: &AlgoConfig, oracle: &ObjectiveOracle) -> Result<Self> {
        config.validate()?;
        let s = config.s.unwrap_or_else(|| FlowParams::default_s(oracle));
        let params = FlowParams::new(oracle, s, 0.0)?;
        let constants = TriggerConstants::new(oracle, &params, config.alpha)?;
        let tau = match config.tau {
            Some(tau) => tau,
            None => constants.default_tau()?,
        };
        let lyapunov = oracle
            .minimizer()
            .map(|_| LyapunovContext::new(oracle, params))
            .transpose()?;
        Ok(Self {
            params,
            constants,
            tau,
            t_max: config.t_max.unwrap_or_else(|| default_t_max(&params)),
            lyapunov,
        })
    }

    pub fn lyapunov(&self) -> Option<&LyapunovContext> {
        self.lyapunov.as_ref()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Policy {
    Fixed,
    Adaptive,
}

/// Fixed-displacement algorithm: `p_{k+1} = p_k + Delta_k X^a(p_k)` with
/// `Delta_k` the first zero of the configured zero-order-hold bound.
pub fn run_displaced_gradient(p0: &State, config: &AlgoConfig, oracle: &ObjectiveOracle) -> Result<RunTrace> {
    drive("displaced-gradient", p0, config, oracle, Hold::Zoh, Policy::Fixed)
}

/// Displaced-gradient algorithm with the displacement adapted online.
pub fn run_adaptive_dg(p0: &State, config: &AlgoConfig, oracle: &ObjectiveOracle) -> Result<RunTrace> {
    drive("adaptive-displaced-gradient", p0, config, oracle, Hold::Zoh, Policy::Adaptive)
}

/// Adaptive algorithm advancing along the high-order hold.
pub fn run_adaptive_hoh(p0: &State, config: &AlgoConfig, oracle: &ObjectiveOracle) -> Result<RunTrace> {
    drive("adaptive-high-order-hold", p0, config, oracle, Hold::Hoh, Policy::Adaptive)
}

/// Adaptive algorithm with the hold taken from `config.hold`.
pub fn run_adaptive(p0: &State, config: &AlgoConfig, oracle: &ObjectiveOracle) -> Result<RunTrace> {
    match config.hold {
        Hold::Zoh => run_adaptive_dg(p0, config, oracle),
        Hold::Hoh => run_adaptive_hoh(p0, config, oracle),
    }
}

fn drive(
    name: &str,
    p0: &State,
    config: &AlgoConfig,
    oracle: &ObjectiveOracle,
    hold: Hold,
    policy: Policy,
) -> Result<RunTrace> {
    let setup = RunSetup::new(config, oracle)?;
    if p0.dim() != oracle.dim() || p0.v.len() != oracle.dim() {
        return Err(Error::InvalidConfig(format!(
            "initial state has dimension {}, objective has {}",
            p0.dim(),
            oracle.dim()
        )));
    }
    if !p0.is_finite() {
        return Err(Error::InvalidConfig("initial state is not finite".into()));
    }
    let kind = BoundKind::new(config.trigger, config.mode, hold);
    if policy == Policy::Fixed && config.a0 > setup.constants.a2_star {
        log::warn!(
            "{name}: a = {} exceeds the certified displacement {}; steps may be infeasible",
            config.a0,
            setup.constants.a2_star
        );
    }
    let fail = |index: usize, source: Error| Error::Run {
        algorithm: name.to_string(),
        index,
        source: Box::new(source),
    };

    let mut trace = RunTrace::new(format!("{name}/{kind}"));
    let mut p = p0.clone();
    let mut t = 0.0;
    let mut a = config.a0;
    let mut k = 0usize;
    loop {
        let grad_norm = oracle.gradient(&p.x).norm();
        if !grad_norm.is_finite() {
            return Err(fail(k, Error::numeric("gradient", k, format!("gradient norm is {grad_norm}"))));
        }
        let done = grad_norm < config.epsilon;
        if done || k >= config.max_iters {
            trace.records.push(record(k, t, None, &p, a, grad_norm, &setup, 0, false));
            trace.converged = done;
            break;
        }

        let (bound, outcome, retries, a_used) = match policy {
            Policy::Fixed => {
                let bound = StepBound::new(kind, &p, a, &setup.params, oracle);
                let outcome = step_size(&bound, setup.t_max).map_err(|e| fail(k, e))?;
                (bound, outcome, 0, a)
            }
            Policy::Adaptive => {
                let (bound, outcome, retries) =
                    adaptive_step(kind, &p, &mut a, config, &setup, oracle).map_err(|e| fail(k, e))?;
                (bound, outcome, retries, a)
            }
        };
        if config.diagnostics {
            trace
                .diagnostics
                .push(StepDiagnostic::new(&bound, outcome).map_err(|e| fail(k, e))?);
        }
        let next = bound.trajectory(outcome.step);
        if !next.is_finite() {
            return Err(fail(k, Error::numeric("hold update", k, "state is not finite")));
        }
        trace.records.push(record(
            k,
            t,
            Some(outcome.step),
            &p,
            a_used,
            grad_norm,
            &setup,
            retries,
            outcome.capped,
        ));
        t += outcome.step;
        p = next;
        k += 1;
        if policy == Policy::Adaptive && retries == 0 {
            a *= config.r_i;
        }
    }
    Ok(trace)
}

/// Inner loops of the adaptive algorithms: shrink `a` while the decay margin
/// is nonnegative, then shrink and retry while the step is below `tau`.
fn adaptive_step(
    kind: BoundKind,
    p: &State,
    a: &mut f64,
    config: &AlgoConfig,
    setup: &RunSetup,
    oracle: &ObjectiveOracle,
) -> Result<(StepBound, StepOutcome, usize)> {
    let mut retries = 0usize;
    let shrink = |a: &mut f64, retries: &mut usize| -> Result<()> {
        *a *= config.r_d;
        *retries += 1;
        if *retries > MAX_SHRINKS || (*a != 0.0 && *a < A_FLOOR) {
            return Err(Error::numeric(
                "adaptive displacement",
                *retries,
                format!("no admissible displacement found (a = {a:e})"),
            ));
        }
        Ok(())
    };
    loop {
        let mut bound = StepBound::new(kind, p, *a, &setup.params, oracle);
        while !(bound.constant_term() < 0.0) {
            shrink(a, &mut retries)?;
            bound = StepBound::new(kind, p, *a, &setup.params, oracle);
        }
        let outcome = step_size(&bound, setup.t_max)?;
        if outcome.step >= setup.tau {
            return Ok((bound, outcome, retries));
        }
        shrink(a, &mut retries)?;
    }
}

#[allow(clippy::too_many_arguments)]
fn record(
    k: usize,
    t: f64,
    delta: Option<f64>,
    p: &State,
    a: f64,
    grad_norm: f64,
    setup: &RunSetup,
    inner_retries: usize,
    capped: bool,
) -> IterationRecord {
    let (f_gap, lyapunov) = match setup.lyapunov() {
        Some(ctx) => (Some(ctx.f_gap(&p.x)), Some(ctx.value(p))),
        None => (None, None),
    };
    IterationRecord {
        k,
        t,
        delta,
        state: p.clone(),
        a,
        grad_norm,
        f_gap,
        lyapunov,
        inner_retries,
        capped,
    }
}
