//! Lyapunov certificate of the heavy-ball flow.
//!
//! `V(x, v) = (1 + sqrt(mu s)) (f(x) - f*) + |v|^2 / 4 + |v + 2 sqrt(mu) (x - x*)|^2 / 4`
//!
//! Evaluating `V` needs the minimizer, so this module is a diagnostic and
//! test oracle only. Trigger and algorithm code never touch it.

use crate::dynamics::{field_hb_displaced, FlowParams, State};
use crate::objectives::ObjectiveOracle;
use crate::{Error, Result, Vector};

#[derive(Clone, Debug)]
pub struct LyapunovContext {
    oracle: ObjectiveOracle,
    params: FlowParams,
    x_star: Vector,
    f_star: f64,
}

impl LyapunovContext {
    pub fn new(oracle: &ObjectiveOracle, params: FlowParams) -> Result<Self> {
        let x_star = oracle
            .minimizer()
            .cloned()
            .ok_or_else(|| Error::InvalidObjective("Lyapunov function needs the minimizer".into()))?;
        let f_star = oracle.value(&x_star);
        Ok(Self {
            oracle: oracle.clone(),
            params,
            x_star,
            f_star,
        })
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn oracle(&self) -> &ObjectiveOracle {
        &self.oracle
    }

    pub fn x_star(&self) -> &Vector {
        &self.x_star
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    /// `f(x) - f*`, clamped at zero against roundoff.
    pub fn f_gap(&self, x: &Vector) -> f64 {
        (self.oracle.value(x) - self.f_star).max(0.0)
    }

    pub fn value(&self, p: &State) -> f64 {
        let err = &p.x - &self.x_star;
        let mixed = &p.v + err * (2.0 * self.params.sqrt_mu);
        self.params.sqrt_mu_s * self.f_gap(&p.x) + 0.25 * p.v.norm_squared() + 0.25 * mixed.norm_squared()
    }

    pub fn gradient(&self, p: &State) -> State {
        let err = &p.x - &self.x_star;
        let sqrt_mu = self.params.sqrt_mu;
        let gx = self.oracle.gradient(&p.x) * self.params.sqrt_mu_s + &p.v * sqrt_mu + &err * (2.0 * self.params.mu);
        let gv = &p.v + err * sqrt_mu;
        State::new(gx, gv)
    }

    /// `<grad V(p), p_dot> + (sqrt(mu) / 4) V(p)`: the quantity a derivative
    /// trigger keeps nonpositive when `p_dot` is the velocity of the hold.
    pub fn decay_rate_along(&self, p: &State, p_dot: &State) -> f64 {
        self.gradient(p).dot(p_dot) + self.params.decay_rate() * self.value(p)
    }

    /// [`Self::decay_rate_along`] for the continuous flow with displacement `a`.
    pub fn decay_residual(&self, p: &State, a: f64) -> f64 {
        let field = field_hb_displaced(p, &self.params.with_a(a), &self.oracle);
        self.decay_rate_along(p, &field)
    }
}

pub fn lyapunov_value(p: &State, ctx: &LyapunovContext) -> f64 {
    ctx.value(p)
}

pub fn lyapunov_gradient(p: &State, ctx: &LyapunovContext) -> State {
    ctx.gradient(p)
}

pub fn decay_residual(p: &State, a: f64, ctx: &LyapunovContext) -> f64 {
    ctx.decay_residual(p, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_velocity, rk4_reference, HighOrderHold, ZeroOrderHold};
    use crate::objectives::{make_logistic, make_quadratic, LogisticDataset, SplitMix64};
    use crate::triggers::TriggerConstants;

    fn quadratic_ctx(a: f64) -> LyapunovContext {
        let oracle = make_quadratic(&[1e-2, 1e2]).unwrap();
        let params = FlowParams::new(&oracle, FlowParams::default_s(&oracle), a).unwrap();
        LyapunovContext::new(&oracle, params).unwrap()
    }

    fn random_state(rng: &mut SplitMix64, center: &Vector, scale: f64) -> State {
        let n = center.len();
        State::new(
            center + Vector::from_fn(n, |_, _| rng.uniform(-scale, scale)),
            Vector::from_fn(n, |_, _| rng.uniform(-scale, scale)),
        )
    }

    #[test]
    fn requires_minimizer() {
        let oracle = make_quadratic(&[1.0]).unwrap();
        let bare = crate::objectives::ObjectiveOracle::new(oracle.objective().clone(), 2.0, 2.0).unwrap();
        let params = FlowParams::new(&bare, 0.1, 0.0).unwrap();
        assert!(LyapunovContext::new(&bare, params).is_err());
    }

    #[test]
    fn vanishes_at_optimum() {
        let ctx = quadratic_ctx(0.0);
        let opt = State::zeros(2);
        assert_eq!(ctx.value(&opt), 0.0);
        assert_eq!(ctx.gradient(&opt), State::zeros(2));
        assert_eq!(ctx.decay_residual(&opt, 0.0), 0.0);
    }

    #[test]
    fn zero_velocity_simplification() {
        let ctx = quadratic_ctx(0.0);
        let mut rng = SplitMix64::new(1);
        for _ in 0..50 {
            let x = Vector::from_fn(2, |_, _| rng.uniform(-10.0, 10.0));
            let p = State::new(x.clone(), Vector::zeros(2));
            let direct = ctx.params().sqrt_mu_s * ctx.f_gap(&x) + ctx.params().mu * x.norm_squared();
            assert!((ctx.value(&p) - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn benchmark_start_two_path() {
        let ctx = quadratic_ctx(0.1);
        let oracle = ctx.oracle().clone();
        let x0 = Vector::from_vec(vec![50.0, 50.0]);
        let v0 = initial_velocity(&x0, ctx.params(), &oracle);
        let p0 = State::new(x0.clone(), v0.clone());
        let sqrt_mu = 0.02f64.sqrt();
        let f = 1e-2 * 2500.0 + 1e2 * 2500.0;
        let parts = [
            (1.0 + (0.02 * ctx.params().s).sqrt()) * f,
            0.25 * (v0[0] * v0[0] + v0[1] * v0[1]),
            0.25 * ((v0[0] + 2.0 * sqrt_mu * 50.0).powi(2) + (v0[1] + 2.0 * sqrt_mu * 50.0).powi(2)),
        ];
        let expected: f64 = parts.iter().sum();
        assert!((ctx.value(&p0) - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ctx = quadratic_ctx(0.0);
        let mut rng = SplitMix64::new(2);
        for _ in 0..100 {
            let p = random_state(&mut rng, &Vector::zeros(2), 5.0);
            let g = ctx.gradient(&p);
            let h = 1e-6 * (1.0 + p.norm());
            let mut worst = 0.0f64;
            for i in 0..4 {
                let mut e = State::zeros(2);
                if i < 2 {
                    e.x[i] = h;
                } else {
                    e.v[i - 2] = h;
                }
                let fd = (ctx.value(&(&p + &e)) - ctx.value(&(&p - &e))) / (2.0 * h);
                let exact = if i < 2 { g.x[i] } else { g.v[i - 2] };
                worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
            }
            assert!(worst < 1e-5, "{worst}");
        }
    }

    #[test]
    fn gradient_at_optimum_position() {
        let ctx = quadratic_ctx(0.0);
        let v = Vector::from_vec(vec![0.3, -1.2]);
        let g = ctx.gradient(&State::new(Vector::zeros(2), v.clone()));
        assert!((g.x - &v * ctx.params().sqrt_mu).norm() < 1e-15);
        assert_eq!(g.v, v);
    }

    #[test]
    fn continuous_decay_without_displacement() {
        let ctx = quadratic_ctx(0.0);
        let mut rng = SplitMix64::new(3);
        for _ in 0..1000 {
            let p = random_state(&mut rng, &Vector::zeros(2), 20.0);
            let r = ctx.decay_residual(&p, 0.0);
            assert!(r <= 1e-10 * (1.0 + ctx.value(&p)), "{r}");
        }
    }

    #[test]
    fn continuous_decay_at_a1_star() {
        let ctx = quadratic_ctx(0.0);
        let constants = TriggerConstants::new(ctx.oracle(), ctx.params(), 0.9).unwrap();
        let mut rng = SplitMix64::new(4);
        for _ in 0..1000 {
            let p = random_state(&mut rng, &Vector::zeros(2), 20.0);
            let r = ctx.decay_residual(&p, constants.a1_star);
            assert!(r <= 1e-8 * (1.0 + ctx.value(&p)), "{r}");
        }
    }

    #[test]
    fn sandwich_and_chain_rule_on_logistic() {
        let oracle = make_logistic(&LogisticDataset::generate(2020)).unwrap();
        let params = FlowParams::new(&oracle, FlowParams::default_s(&oracle), 0.025).unwrap();
        let ctx = LyapunovContext::new(&oracle, params).unwrap();
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let p = random_state(&mut rng, ctx.x_star(), 3.0);
            assert!(ctx.f_gap(&p.x) <= ctx.value(&p));
            let zoh = ZeroOrderHold::new(&p, &params, &oracle);
            let hoh = HighOrderHold::new(&p, &params, &oracle);
            let t = 0.05;
            let h = 1e-5;
            let fd_zoh = (ctx.value(&zoh.at(t + h)) - ctx.value(&zoh.at(t - h))) / (2.0 * h);
            let exact_zoh = ctx.gradient(&zoh.at(t)).dot(&zoh.velocity(t));
            assert!((fd_zoh - exact_zoh).abs() <= 1e-5 * exact_zoh.abs().max(1.0));
            let fd_hoh = (ctx.value(&hoh.at(t + h)) - ctx.value(&hoh.at(t - h))) / (2.0 * h);
            let exact_hoh = ctx.gradient(&hoh.at(t)).dot(&hoh.velocity(t));
            assert!((fd_hoh - exact_hoh).abs() <= 1e-5 * exact_hoh.abs().max(1.0));
        }
    }

    #[test]
    fn decay_along_continuous_flow() {
        let ctx = quadratic_ctx(0.0);
        let oracle = ctx.oracle().clone();
        let params = *ctx.params();
        let x0 = Vector::from_vec(vec![50.0, 50.0]);
        let p0 = State::new(x0.clone(), initial_velocity(&x0, &params, &oracle));
        let traj = rk4_reference(|q| field_hb_displaced(q, &params, &oracle), &p0, 20.0, 1e-3).unwrap();
        let v0 = ctx.value(&p0);
        for (t, p) in traj.times.iter().zip(&traj.states) {
            assert!(ctx.value(p) <= (-params.decay_rate() * t).exp() * v0 * (1.0 + 1e-6));
        }
    }
}
