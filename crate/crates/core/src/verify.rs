//! Invariant suite run by `thb verify` and by the acceptance tests.
//!
//! Every check draws its own random states from a seeded [`StateSampler`],
//! compares a computed quantity against an independent reference and
//! reports the worst normalized discrepancy.

use std::fmt;

use serde::Serialize;

use crate::dynamics::{hoh_trajectory, rk4_reference, FlowParams, State};
use crate::lyapunov::LyapunovContext;
use crate::objectives::{check_gradient, ObjectiveOracle, SplitMix64};
use crate::triggers::integral::exp_weighted_quadratic;
use crate::triggers::quadrature::adaptive_simpson;
use crate::triggers::{
    default_t_max, quadratic_root, step_size, BoundKind, Design, Hold, Mode, StepBound, TriggerConstants,
    DEFAULT_ALPHA, ROOT_TOL,
};
use crate::{Error, Result, Vector};

/// Sizes and tolerances of the suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub soundness_states: usize,
    pub grid_points: usize,
    pub soundness_tol: f64,
    pub ordering_states: usize,
    pub miet_states: usize,
    pub miet_grid: usize,
    pub hoh_states: usize,
    pub hoh_horizon: f64,
    pub rk4_step: f64,
    pub hoh_tol: f64,
    pub integral_samples: usize,
    pub integral_tol: f64,
    pub a1_tol: f64,
    pub g_grid: usize,
    pub g_tol: f64,
    pub gradient_points: usize,
    pub gradient_tol: f64,
    /// States closer than this to the optimum are skipped.
    pub exclusion_radius: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            soundness_states: 200,
            grid_points: 100,
            soundness_tol: 1e-9,
            ordering_states: 100,
            miet_states: 1000,
            miet_grid: 1024,
            hoh_states: 50,
            hoh_horizon: 0.1,
            rk4_step: 1e-5,
            hoh_tol: 1e-8,
            integral_samples: 100,
            integral_tol: 1e-8,
            a1_tol: 1e-12,
            g_grid: 100_000,
            g_tol: 1e-9,
            gradient_points: 20,
            gradient_tol: 1e-5,
            exclusion_radius: 1e-6,
        }
    }
}

/// Outcome of one invariant.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub evaluated: usize,
    pub skipped: usize,
    /// Worst normalized discrepancy; the check passes when it is at most 1.
    pub worst: f64,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            evaluated: 0,
            skipped: 0,
            worst: 0.0,
            detail: String::new(),
        }
    }

    /// Records a discrepancy already divided by its tolerance.
    fn observe(&mut self, ratio: f64, what: impl FnOnce() -> String) {
        self.evaluated += 1;
        if ratio.is_nan() || ratio > self.worst {
            self.worst = if ratio.is_nan() { f64::INFINITY } else { ratio };
            if !(ratio <= 1.0) {
                self.detail = what();
            }
        }
        if !(ratio <= 1.0) {
            self.passed = false;
        }
    }

    fn fail(&mut self, detail: String) {
        self.evaluated += 1;
        self.passed = false;
        self.worst = f64::INFINITY;
        self.detail = detail;
    }
}

/// All checks for one benchmark.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub benchmark: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:<34} {:>6} {:>9} {:>8} {:>11}", "benchmark", "check", "result", "evaluated", "skipped", "worst/tol")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<12} {:<34} {:>6} {:>9} {:>8} {:>11.3e}",
                self.benchmark,
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.evaluated,
                c.skipped,
                c.worst
            )?;
            if !c.passed && !c.detail.is_empty() {
                writeln!(f, "{:<12}   {}", "", c.detail)?;
            }
        }
        Ok(())
    }
}

/// Random phase-space points around the optimum.
#[derive(Clone, Debug)]
pub struct StateSampler {
    rng: SplitMix64,
    center: Vector,
}

impl StateSampler {
    pub fn new(seed: u64, center: Vector) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            center,
        }
    }

    /// Each coordinate is `+-10^e` with `e` uniform in `[lo_exp, hi_exp]`,
    /// so strongly anisotropic points are drawn as often as balanced ones.
    fn scattered(&mut self, lo_exp: f64, hi_exp: f64) -> Vector {
        Vector::from_fn(self.center.len(), |_, _| {
            let magnitude = 10f64.powf(self.rng.uniform(lo_exp, hi_exp));
            f64::from(self.rng.sign()) * magnitude
        })
    }

    /// `x = x* + dx`, `v` with coordinate magnitudes log-uniform in
    /// `[1e-4, 1e2]` and `[1e-4, 1e1]` respectively.
    pub fn state(&mut self) -> State {
        let offset = self.scattered(-4.0, 2.0);
        let x = &self.center + offset;
        State::new(x, self.scattered(-4.0, 1.0))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.uniform(lo, hi)
    }
}

struct Context {
    params: FlowParams,
    constants: TriggerConstants,
    lyapunov: LyapunovContext,
    p_star: State,
    t_max: f64,
}

impl Context {
    fn new(oracle: &ObjectiveOracle) -> Result<Self> {
        let params = FlowParams::new(oracle, FlowParams::default_s(oracle), 0.0)?;
        let constants = TriggerConstants::new(oracle, &params, DEFAULT_ALPHA)?;
        let lyapunov = LyapunovContext::new(oracle, params)?;
        let p_star = State::new(lyapunov.x_star().clone(), Vector::zeros(oracle.dim()));
        Ok(Self {
            params,
            constants,
            lyapunov,
            p_star,
            t_max: default_t_max(&params),
        })
    }

    fn excluded(&self, p: &State, radius: f64) -> bool {
        (p - &self.p_star).norm() < radius
    }
}

/// Runs every check on one benchmark.
pub fn run_suite(benchmark: &str, oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Report> {
    let checks = vec![
        trigger_soundness(oracle, config)?,
        step_orderings(oracle, config)?,
        miet_bounds(oracle, config)?,
        hoh_against_rk4(oracle, config)?,
        performance_integral(oracle, config)?,
        a1_star_agreement(oracle, config)?,
        gradient_checks(oracle, config)?,
    ];
    Ok(Report {
        benchmark: benchmark.to_string(),
        checks,
    })
}

/// For every bound kind, the trigger inequality holds against the Lyapunov
/// oracle on a grid over `[0, step]`:
///
/// - derivative: `<grad V, p'> + k V <= b(t)` and `<= 0`;
/// - performance: `V(p(t)) - e^{-kt} V(p_hat) <= e^{-kt} B(t)` and `<= 0`,
///
/// up to `tol (1 + |V(p_hat)|)`.
pub fn trigger_soundness(oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Check> {
    let ctx = Context::new(oracle)?;
    let mut check = Check::new("trigger soundness (8 kinds)");
    let mut sampler = StateSampler::new(config.seed, ctx.p_star.x.clone());
    let kappa = ctx.params.decay_rate();
    for _ in 0..config.soundness_states {
        let p_hat = sampler.state();
        let a = sampler.uniform(0.0, ctx.constants.a2_star);
        if ctx.excluded(&p_hat, config.exclusion_radius) {
            check.skipped += 1;
            continue;
        }
        let v_hat = ctx.lyapunov.value(&p_hat);
        let tol = config.soundness_tol * (1.0 + v_hat.abs());
        for kind in BoundKind::ALL {
            let bound = StepBound::new(kind, &p_hat, a, &ctx.params, oracle);
            let step = match step_size(&bound, ctx.t_max) {
                Ok(outcome) => outcome.step,
                Err(err) => {
                    check.fail(format!("{kind} at a = {a:e}: {err}"));
                    continue;
                }
            };
            for i in 0..=config.grid_points {
                let t = step * i as f64 / config.grid_points as f64;
                let p = bound.trajectory(t);
                let (actual, bound_value) = match kind.design {
                    Design::Derivative => (ctx.lyapunov.decay_rate_along(&p, &bound.velocity(t)), bound.derivative(t)?),
                    Design::Performance => {
                        let decay = (-kappa * t).exp();
                        (ctx.lyapunov.value(&p) - decay * v_hat, decay * bound.eval(t)?)
                    }
                };
                let ratio = (actual - bound_value).max(actual) / tol;
                check.observe(ratio, || {
                    format!("{kind} at t = {t:e} of {step:e}: actual {actual:e}, bound {bound_value:e}, tol {tol:e}, state {:?} {:?} a {a:e}", p_hat.x.as_slice(), p_hat.v.as_slice())
                });
            }
        }
    }
    Ok(check)
}

/// `d_ST <= d_ET`, `d_ST <= p_ST` and `p_ST <= p_ET` for both holds, plus
/// pointwise dominance of the self-triggered derivative bound over the
/// event-triggered one on `[0, d_ET]`.
pub fn step_orderings(oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Check> {
    let ctx = Context::new(oracle)?;
    let mut check = Check::new("step orderings");
    let mut sampler = StateSampler::new(config.seed ^ 0x5eed_0001, ctx.p_star.x.clone());
    for _ in 0..config.ordering_states {
        let p_hat = sampler.state();
        let a = sampler.uniform(0.0, ctx.constants.a2_star);
        if ctx.excluded(&p_hat, config.exclusion_radius) {
            check.skipped += 1;
            continue;
        }
        for hold in [Hold::Zoh, Hold::Hoh] {
            let step = |design, mode| step_size(&StepBound::new(BoundKind::new(design, mode, hold), &p_hat, a, &ctx.params, oracle), ctx.t_max);
            let (d_st, d_et, p_st, p_et) = match (
                step(Design::Derivative, Mode::St),
                step(Design::Derivative, Mode::Et),
                step(Design::Performance, Mode::St),
                step(Design::Performance, Mode::Et),
            ) {
                (Ok(a), Ok(b), Ok(c), Ok(d)) => (a.step, b.step, c.step, d.step),
                _ => {
                    check.fail(format!("{hold:?} step failed at a = {a:e}"));
                    continue;
                }
            };
            for (name, small, large) in [("d_ST <= d_ET", d_st, d_et), ("d_ST <= p_ST", d_st, p_st), ("p_ST <= p_ET", p_st, p_et)] {
                let tol = ROOT_TOL * (1.0 + large);
                check.observe((small - large) / tol, || format!("{hold:?} {name}: {small:e} vs {large:e}"));
            }
            let st = StepBound::new(BoundKind::new(Design::Derivative, Mode::St, hold), &p_hat, a, &ctx.params, oracle);
            let et = st.with_kind(BoundKind::new(Design::Derivative, Mode::Et, hold));
            for i in 0..=config.grid_points {
                let t = d_et * i as f64 / config.grid_points as f64;
                let (b_et, noise) = et.derivative_with_noise(t)?;
                let b_st = st.derivative(t)?;
                let tol = config.soundness_tol * (1.0 + b_st.abs()) + noise;
                check.observe((b_et - b_st) / tol, || format!("{hold:?} ET bound {b_et:e} above ST {b_st:e} at t = {t:e}"));
            }
        }
    }
    Ok(check)
}

/// Zero-order-hold derivative ST steps never fall below `MIET(a)` for
/// `a` in `{0, a2*/2, a2*}`, and `MIET > 0` on a grid over `[0, a2*]`.
pub fn miet_bounds(oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Check> {
    let ctx = Context::new(oracle)?;
    let mut check = Check::new("minimum inter-event time");
    for (a, miet) in ctx.constants.miet_grid(config.miet_grid) {
        check.observe(if miet > 0.0 { 0.0 } else { f64::INFINITY }, || format!("MIET({a:e}) = {miet:e}"));
    }
    let a2 = ctx.constants.a2_star;
    let kind = BoundKind::new(Design::Derivative, Mode::St, Hold::Zoh);
    let mut sampler = StateSampler::new(config.seed ^ 0x5eed_0002, ctx.p_star.x.clone());
    for a in [0.0, 0.5 * a2, a2] {
        let miet = ctx.constants.miet(a);
        for _ in 0..config.miet_states {
            let p_hat = sampler.state();
            if ctx.excluded(&p_hat, config.exclusion_radius) {
                check.skipped += 1;
                continue;
            }
            let bound = StepBound::new(kind, &p_hat, a, &ctx.params, oracle);
            match step_size(&bound, ctx.t_max) {
                // Positive ratio only when the step undercuts the MIET.
                Ok(outcome) => check.observe(if outcome.step >= miet { 0.0 } else { f64::INFINITY }, || {
                    format!("step {:e} below MIET({a:e}) = {miet:e}", outcome.step)
                }),
                Err(err) => check.fail(format!("a = {a:e}: {err}")),
            }
        }
    }
    Ok(check)
}

/// Closed-form high-order hold against RK4 on the frozen-gradient linear
/// system, absolute error over `[0, horizon]`.
pub fn hoh_against_rk4(oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Check> {
    let ctx = Context::new(oracle)?;
    let mut check = Check::new("high-order hold vs RK4");
    let mut sampler = StateSampler::new(config.seed ^ 0x5eed_0003, ctx.p_star.x.clone());
    for _ in 0..config.hoh_states {
        let p_hat = sampler.state();
        let a = sampler.uniform(0.0, ctx.constants.a2_star);
        let params = ctx.params.with_a(a);
        let xa = &p_hat.x + &p_hat.v * a;
        let forcing = oracle.gradient(&xa) * params.sqrt_mu_s;
        let damping = 2.0 * params.sqrt_mu;
        let field = |p: &State| State::new(p.v.clone(), -&p.v * damping - &forcing);
        let reference = rk4_reference(field, &p_hat, config.hoh_horizon, config.rk4_step)?;
        let stride = (reference.times.len() / 100).max(1);
        for (t, expected) in reference.times.iter().zip(&reference.states).step_by(stride) {
            let closed = hoh_trajectory(&p_hat, *t, &params, oracle);
            let err = (&closed - expected).norm();
            check.observe(err / config.hoh_tol, || format!("error {err:e} at t = {t:e}"));
        }
    }
    Ok(check)
}

/// `int_0^t e^{kz} q(z) dz` in closed form against adaptive quadrature,
/// relative to `int_0^t e^{kz} |q|(z) dz` with `|q|` the polynomial of
/// absolute coefficients.
pub fn performance_integral(oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Check> {
    let ctx = Context::new(oracle)?;
    let kappa = ctx.params.decay_rate();
    let mut check = Check::new("closed-form performance integral");
    let mut sampler = StateSampler::new(config.seed ^ 0x5eed_0004, ctx.p_star.x.clone());
    let mut drawn = 0;
    while check.evaluated < config.integral_samples {
        drawn += 1;
        if drawn > 100 * config.integral_samples {
            return Err(Error::numeric("performance_integral", drawn, "too few feasible samples"));
        }
        let p_hat = sampler.state();
        let a = sampler.uniform(0.0, ctx.constants.a2_star);
        let hold = if drawn % 2 == 0 { Hold::Zoh } else { Hold::Hoh };
        let bound = StepBound::new(BoundKind::new(Design::Performance, Mode::St, hold), &p_hat, a, &ctx.params, oracle);
        let coeffs = bound.st_polynomial();
        let root = quadratic_root(coeffs, ctx.t_max);
        if !(coeffs[2] < 0.0) {
            check.skipped += 1;
            continue;
        }
        let t = root.step * sampler.uniform(0.0, 4.0);
        let closed = exp_weighted_quadratic(kappa, coeffs, t);
        let mut signed = |z: f64| {
            let w = (kappa * z).exp();
            Ok((w * ((coeffs[0] * z + coeffs[1]) * z + coeffs[2]), 0.0))
        };
        let reference = adaptive_simpson(&mut signed, 0.0, t, 0.0)?;
        let abs = coeffs.map(f64::abs);
        let scale = exp_weighted_quadratic(kappa, abs, t).max(f64::MIN_POSITIVE);
        let rel = (closed - reference).abs() / scale;
        check.observe(rel / config.integral_tol, || format!("closed {closed:e}, quadrature {reference:e} at t = {t:e}"));
    }
    Ok(check)
}

/// The certified continuous displacement computed from its closed form and
/// as the minimum of `g`; a dense grid never undercuts `g(z_root)`.
pub fn a1_star_agreement(oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Check> {
    let ctx = Context::new(oracle)?;
    let c = &ctx.constants;
    let mut check = Check::new("continuous displacement a1*");
    let from_g = c.a1_star_from_g();
    let rel = (c.a1_star - from_g).abs() / c.a1_star;
    check.observe(rel / config.a1_tol, || format!("closed form {:e}, minimum of g {from_g:e}", c.a1_star));
    let g_root = c.g(c.z_root_plus());
    let pole = c.g_pole();
    let span = 10.0 * (c.z_root_plus() - pole);
    for i in 1..=config.g_grid {
        let z = pole + span * i as f64 / config.g_grid as f64;
        let undercut = (g_root - c.g(z)) / (config.g_tol * g_root.abs());
        if undercut > 0.0 {
            check.observe(undercut, || format!("g({z:e}) = {:e} below g(z_root) = {g_root:e}", c.g(z)));
        }
    }
    check.evaluated = config.g_grid + 1;
    Ok(check)
}

/// Finite-difference checks of the objective and Lyapunov gradients.
pub fn gradient_checks(oracle: &ObjectiveOracle, config: &SuiteConfig) -> Result<Check> {
    let ctx = Context::new(oracle)?;
    let mut check = Check::new("gradient finite differences");
    let mut sampler = StateSampler::new(config.seed ^ 0x5eed_0005, ctx.p_star.x.clone());
    for _ in 0..config.gradient_points {
        let p = sampler.state();
        let rel = check_gradient(oracle, &p.x);
        check.observe(rel / config.gradient_tol, || format!("objective gradient off by {rel:e}"));
        let rel = lyapunov_gradient_error(&ctx.lyapunov, &p);
        check.observe(rel / config.gradient_tol, || format!("Lyapunov gradient off by {rel:e}"));
    }
    Ok(check)
}

fn lyapunov_gradient_error(ctx: &LyapunovContext, p: &State) -> f64 {
    let grad = ctx.gradient(p);
    let n = p.dim();
    let h = 1e-6 * (1.0 + p.norm());
    let mut worst = 0.0_f64;
    for i in 0..2 * n {
        let mut up = p.clone();
        let mut down = p.clone();
        let (analytic, target_up, target_down) = if i < n {
            (grad.x[i], &mut up.x[i], &mut down.x[i])
        } else {
            (grad.v[i - n], &mut up.v[i - n], &mut down.v[i - n])
        };
        *target_up += h;
        *target_down -= h;
        let fd = (ctx.value(&up) - ctx.value(&down)) / (2.0 * h);
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(1.0));
    }
    worst
}
