//! First positive zero of a trigger bound.

use serde::Serialize;

use super::bounds::{polynomial, Design, Mode, StepBound};
use crate::dynamics::FlowParams;
use crate::{Error, Result};

/// Bisection stops once the bracket is narrower than `ROOT_TOL * (1 + t)`.
pub const ROOT_TOL: f64 = 1e-14;
pub const MAX_BISECTIONS: usize = 200;
/// Interior points checked on every event-triggered bracket, so that a
/// short positive excursion of the bound is not stepped over.
pub const ET_SCAN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepOutcome {
    pub step: f64,
    /// The bound stayed negative up to `t_max`.
    pub capped: bool,
}

impl StepOutcome {
    fn capped(t_max: f64) -> Self {
        Self { step: t_max, capped: true }
    }
}

/// `10 / sqrt(mu)`.
pub fn default_t_max(params: &FlowParams) -> f64 {
    10.0 / params.sqrt_mu
}

/// First positive zero of `c2 t^2 + c1 t + c0` with `c0 < 0`, or `t_max`.
pub fn quadratic_root(c: [f64; 3], t_max: f64) -> StepOutcome {
    let [c2, c1, c0] = c;
    let root = if c2 > 0.0 {
        let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
        if c1 >= 0.0 {
            -2.0 * c0 / (c1 + disc)
        } else {
            (disc - c1) / (2.0 * c2)
        }
    } else if c2 == 0.0 {
        if c1 > 0.0 {
            -c0 / c1
        } else {
            f64::INFINITY
        }
    } else {
        // Concave: a positive root exists only if the vertex rises above zero.
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if c1 > 0.0 && disc >= 0.0 {
            -2.0 * c0 / (c1 + disc.sqrt())
        } else {
            f64::INFINITY
        }
    };
    if root.is_finite() && root < t_max {
        StepOutcome { step: root, capped: false }
    } else {
        StepOutcome::capped(t_max)
    }
}

/// `min { t > 0 : bound(t) = 0 }`, capped at `t_max`.
///
/// Bisection returns the left end of the final bracket, where the bound is
/// still negative.
pub fn step_size(bound: &StepBound, t_max: f64) -> Result<StepOutcome> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidConfig(format!("t_max must be positive, got {t_max}")));
    }
    let c0 = bound.constant_term();
    if c0.is_nan() {
        return Err(Error::numeric("step_size", 0, "decay margin is NaN"));
    }
    if c0 >= 0.0 {
        return Err(Error::TriggerInfeasible {
            constant: c0,
            a: bound.sample().a,
        });
    }
    let kind = bound.kind();
    let st_derivative = quadratic_root(bound.st_polynomial(), t_max);
    match (kind.design, kind.mode) {
        (Design::Derivative, Mode::St) => Ok(st_derivative),
        (Design::Performance, Mode::St) => {
            // The integrand is negative before the derivative root, so the
            // integral is decreasing there.
            if st_derivative.capped {
                return Ok(st_derivative);
            }
            expand_and_bisect(|t| bound.eval(t), st_derivative.step, t_max, 0)
        }
        (Design::Derivative, Mode::Et) => {
            if st_derivative.capped {
                return Ok(st_derivative);
            }
            expand_and_bisect(|t| bound.eval(t), st_derivative.step, t_max, ET_SCAN_POINTS)
        }
        (Design::Performance, Mode::Et) => {
            let st = bound.with_kind(kind.with_mode(Mode::St));
            let start = step_size(&st, t_max)?;
            if start.capped {
                return Ok(start);
            }
            expand_and_bisect(|t| bound.eval(t), start.step, t_max, ET_SCAN_POINTS)
        }
    }
}

/// Brackets the first sign change after `start` (where the bound is known
/// to be negative) by doubling, then bisects.
fn expand_and_bisect<F>(mut f: F, start: f64, t_max: f64, scan: usize) -> Result<StepOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = start;
    loop {
        let hi = (2.0 * lo).min(t_max);
        if hi <= lo {
            return Ok(StepOutcome::capped(t_max));
        }
        let mut prev = lo;
        for i in 1..=scan {
            let t = lo + (hi - lo) * i as f64 / (scan + 1) as f64;
            if f(t)? >= 0.0 {
                return bisect(&mut f, prev, t).map(|step| StepOutcome { step, capped: false });
            }
            prev = t;
        }
        if f(hi)? >= 0.0 {
            return bisect(&mut f, prev, hi).map(|step| StepOutcome { step, capped: false });
        }
        if hi >= t_max {
            return Ok(StepOutcome::capped(t_max));
        }
        lo = hi;
    }
}

fn bisect<F>(f: &mut F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    for _ in 0..MAX_BISECTIONS {
        if hi - lo < ROOT_TOL * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Per-step diagnostic record.
#[derive(Clone, Debug, Serialize)]
pub struct StepDiagnostic {
    pub kind: String,
    pub a: f64,
    pub constant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<[f64; 3]>,
    /// `(t, bound(t))` at a few points of `[0, step]` for event-triggered kinds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<(f64, f64)>>,
    pub step: f64,
    pub capped: bool,
}

impl StepDiagnostic {
    pub fn new(bound: &StepBound, outcome: StepOutcome) -> Result<Self> {
        let samples = match bound.kind().mode {
            Mode::St => None,
            Mode::Et => Some(
                (0..=4)
                    .map(|i| {
                        let t = outcome.step * i as f64 / 4.0;
                        bound.eval(t).map(|b| (t, b))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(Self {
            kind: bound.kind().to_string(),
            a: bound.sample().a,
            constant: bound.constant_term(),
            coefficients: bound.st_coeffs(),
            samples,
            step: outcome.step,
            capped: outcome.capped,
        })
    }
}

/// Evaluates the self-triggered derivative polynomial; exposed for diagnostics.
pub fn st_value(bound: &StepBound, t: f64) -> f64 {
    polynomial(bound.st_polynomial(), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_quadratic() {
        let out = quadratic_root([1.0, 0.0, -1.0], 10.0);
        assert_eq!(out, StepOutcome { step: 1.0, capped: false });
    }

    #[test]
    fn linear_and_flat() {
        assert_eq!(quadratic_root([0.0, 2.0, -1.0], 10.0).step, 0.5);
        assert!(quadratic_root([0.0, 0.0, -1.0], 10.0).capped);
        assert!(quadratic_root([0.0, -1.0, -1.0], 10.0).capped);
        assert!(quadratic_root([1.0, 0.0, -400.0], 10.0).capped);
    }

    #[test]
    fn stable_branches() {
        // c1 large and positive: the naive formula cancels.
        let out = quadratic_root([1e-8, 1e8, -1.0], 1.0);
        assert!((out.step - 1e-8).abs() < 1e-22);
        let out = quadratic_root([1.0, -3.0, -4.0], 10.0);
        assert!((out.step - 4.0).abs() < 1e-15);
    }

    #[test]
    fn bisection_brackets_root() {
        let out = expand_and_bisect(|t| Ok(t * t - 2.0), 0.1, 100.0, 4).unwrap();
        assert!(!out.capped);
        assert!((out.step - 2f64.sqrt()).abs() < 1e-13);
        assert!(out.step * out.step - 2.0 <= 0.0);
    }

    #[test]
    fn scan_finds_early_excursion() {
        // Negative at the doubling points 1 and 2, positive on (1.2, 1.3).
        let f = |t: f64| Ok(if (1.2..1.3).contains(&t) { 1.0 } else { -1.0 });
        let out = expand_and_bisect(f, 1.0, 100.0, 8).unwrap();
        assert!((out.step - 1.2).abs() < 1e-12, "{}", out.step);
    }

    #[test]
    fn expansion_caps() {
        let out = expand_and_bisect(|_| Ok(-1.0), 0.5, 3.0, 2).unwrap();
        assert!(out.capped);
        assert_eq!(out.step, 3.0);
    }
}
