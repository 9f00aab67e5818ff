//! Reference implementations shared by the integration tests. Nothing here
//! calls into the crate's Lyapunov, quadrature or integrator code.

#![allow(dead_code)]

use triggered_hb::dynamics::{FlowParams, State};
use triggered_hb::objectives::{Benchmark, ObjectiveOracle, DEFAULT_DATASET_SEED};
use triggered_hb::Vector;

pub struct Problem {
    pub benchmark: Benchmark,
    pub oracle: ObjectiveOracle,
    pub params: FlowParams,
}

pub fn problems() -> Vec<Problem> {
    Benchmark::ALL
        .iter()
        .map(|&benchmark| {
            let oracle = benchmark.oracle(DEFAULT_DATASET_SEED).unwrap();
            let params = FlowParams::new(&oracle, FlowParams::default_s(&oracle), 0.0).unwrap();
            Problem {
                benchmark,
                oracle,
                params,
            }
        })
        .collect()
}

/// Independent `V(p)` and `grad V(p)` for a given `(mu, s)`.
pub struct RefLyapunov {
    pub mu: f64,
    pub s: f64,
    pub x_star: Vector,
    pub f_star: f64,
    oracle: ObjectiveOracle,
}

impl RefLyapunov {
    pub fn new(oracle: &ObjectiveOracle, s: f64) -> Self {
        let x_star = oracle.minimizer().expect("benchmark minimizer").clone();
        Self {
            mu: oracle.mu(),
            s,
            f_star: oracle.value(&x_star),
            x_star,
            oracle: oracle.clone(),
        }
    }

    pub fn weight(&self) -> f64 {
        1.0 + (self.mu * self.s).sqrt()
    }

    pub fn rate(&self) -> f64 {
        self.mu.sqrt() / 4.0
    }

    pub fn value(&self, p: &State) -> f64 {
        let dx = &p.x - &self.x_star;
        let mixed = &p.v + &dx * (2.0 * self.mu.sqrt());
        self.weight() * (self.oracle.value(&p.x) - self.f_star) + 0.25 * p.v.norm_squared() + 0.25 * mixed.norm_squared()
    }

    /// `(dV/dx, dV/dv)`.
    pub fn gradient(&self, p: &State) -> (Vector, Vector) {
        let r = self.mu.sqrt();
        let dx = &p.x - &self.x_star;
        let gx = self.oracle.gradient(&p.x) * self.weight() + &p.v * r + &dx * (2.0 * self.mu);
        let gv = &p.v + &dx * r;
        (gx, gv)
    }

    /// `<grad V(p), p_dot> + (sqrt(mu)/4) V(p)`.
    pub fn decay(&self, p: &State, p_dot: &State) -> f64 {
        let (gx, gv) = self.gradient(p);
        gx.dot(&p_dot.x) + gv.dot(&p_dot.v) + self.rate() * self.value(p)
    }

    /// Magnitude of the terms summed by [`Self::decay`], for roundoff floors.
    pub fn decay_magnitude(&self, p: &State, p_dot: &State) -> f64 {
        let (gx, gv) = self.gradient(p);
        gx.norm() * p_dot.x.norm() + gv.norm() * p_dot.v.norm() + self.rate() * self.value_magnitude(p)
    }

    /// Magnitude of the terms summed by [`Self::value`].
    pub fn value_magnitude(&self, p: &State) -> f64 {
        let dx = &p.x - &self.x_star;
        self.weight() * (self.oracle.value(&p.x).abs() + self.f_star.abs())
            + 0.25 * p.v.norm_squared()
            + 0.25 * (p.v.norm() + 2.0 * self.mu.sqrt() * dx.norm()).powi(2)
    }
}

/// xorshift64* generator, independent of the crate's dataset generator.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x2545_F491_4F6C_DD1D) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// `+-10^e` with `e` uniform in `[lo, hi]`.
    pub fn signed_log(&mut self, lo: f64, hi: f64) -> f64 {
        let sign = if self.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
        sign * 10f64.powf(self.uniform(lo, hi))
    }

    /// Random state around `x_star`; coordinates have log-uniform magnitudes.
    pub fn state(&mut self, x_star: &Vector) -> State {
        let n = x_star.len();
        let x = x_star + Vector::from_fn(n, |_, _| self.signed_log(-4.0, 2.0));
        let v = Vector::from_fn(n, |_, _| self.signed_log(-4.0, 1.0));
        State::new(x, v)
    }
}

/// Composite 5-point Gauss-Legendre rule on `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let mid = lo + (i as f64 + 0.5) * h;
        let mut panel = 0.0;
        for (node, weight) in NODES.iter().zip(WEIGHTS) {
            panel += weight * f(mid + 0.5 * h * node);
        }
        total += 0.5 * h * panel;
    }
    total
}

/// Classical RK4 for `x' = v`, `v' = -damping v - forcing` over `[0, horizon]`;
/// returns the state at every `record_every` steps, starting with `t = 0`.
pub fn rk4_linear(
    p0: &State,
    damping: f64,
    forcing: &Vector,
    horizon: f64,
    h: f64,
    record_every: usize,
) -> Vec<(f64, State)> {
    let field = |p: &State| State::new(p.v.clone(), -&p.v * damping - forcing);
    let steps = (horizon / h).round() as usize;
    let mut out = vec![(0.0, p0.clone())];
    let mut p = p0.clone();
    for k in 1..=steps {
        let k1 = field(&p);
        let k2 = field(&p.advanced(0.5 * h, &k1));
        let k3 = field(&p.advanced(0.5 * h, &k2));
        let k4 = field(&p.advanced(h, &k3));
        let incr = &(&(&k1 + &(&k2 * 2.0)) + &(&k3 * 2.0)) + &k4;
        p = p.advanced(h / 6.0, &incr);
        if k % record_every == 0 {
            out.push((k as f64 * h, p.clone()));
        }
    }
    out
}

/// Unbiased relative standard deviation of `values`.
pub fn relative_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt() / mean
}
