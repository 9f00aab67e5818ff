//! Adaptive Simpson quadrature with a cumulative-integral cache.

use crate::{Error, Result};

/// Refinement depth at which [`adaptive_simpson`] gives up.
pub const MAX_DEPTH: u32 = 40;
/// Relative part of the absolute tolerance `REL_TOL * (1 + |value|)`.
pub const REL_TOL: f64 = 1e-12;
/// Integrand evaluations allowed for one call of [`adaptive_simpson`].
pub const MAX_EVALUATIONS: usize = 100_000;

/// Integrates `f` over `[lo, hi]` to absolute tolerance
/// `REL_TOL * (1 + |offset| + |estimate|)`, where `offset` is whatever has
/// already been accumulated by the caller.
///
/// `f` returns the integrand together with an absolute bound on its
/// rounding error. A panel whose error estimate is below the rounding level
/// of its own samples is accepted even if it misses the tolerance, since
/// refining it further cannot help.
pub fn adaptive_simpson<F>(f: &mut F, lo: f64, hi: f64, offset: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if hi == lo {
        return Ok(0.0);
    }
    let mid = 0.5 * (lo + hi);
    let (f_lo, f_mid, f_hi) = (f(lo)?, f(mid)?, f(hi)?);
    let whole = (hi - lo) / 6.0 * (f_lo.0 + 4.0 * f_mid.0 + f_hi.0);
    if !whole.is_finite() {
        return Err(Error::numeric("adaptive_simpson", 0, format!("non-finite integrand on [{lo}, {hi}]")));
    }
    let tol = REL_TOL * (1.0 + offset.abs() + whole.abs());
    let mut budget = MAX_EVALUATIONS;
    refine(f, [lo, mid, hi], [f_lo, f_mid, f_hi], whole, tol, 0, &mut budget)
}

fn refine<F>(
    f: &mut F,
    t: [f64; 3],
    y: [(f64, f64); 3],
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if *budget < 2 {
        return Err(Error::numeric(
            "adaptive_simpson",
            depth as usize,
            format!("evaluation budget of {MAX_EVALUATIONS} exhausted"),
        ));
    }
    *budget -= 2;
    let [lo, mid, hi] = t;
    let left_mid = 0.5 * (lo + mid);
    let right_mid = 0.5 * (mid + hi);
    let (y_lm, y_rm) = (f(left_mid)?, f(right_mid)?);
    let left = (mid - lo) / 6.0 * (y[0].0 + 4.0 * y_lm.0 + y[1].0);
    let right = (hi - mid) / 6.0 * (y[1].0 + 4.0 * y_rm.0 + y[2].0);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::numeric("adaptive_simpson", depth as usize, "non-finite integrand"));
    }
    let noise = [y[0], y[1], y[2], y_lm, y_rm].iter().map(|s| s.1).fold(0.0, f64::max);
    let rounding = 4.0 * (hi - lo) * noise;
    // Stop when the Richardson estimate is within tolerance, below the
    // rounding level, or the panel can no longer be split in floating point.
    if delta.abs() <= 15.0 * tol || delta.abs() <= rounding || mid <= lo || hi <= mid {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::numeric(
            "adaptive_simpson",
            depth as usize,
            format!("no convergence on [{lo}, {hi}], error estimate {delta:e}"),
        ));
    }
    let l = refine(f, [lo, left_mid, mid], [y[0], y_lm, y[1]], left, 0.5 * tol, depth + 1, budget)?;
    let r = refine(f, [mid, right_mid, hi], [y[1], y_rm, y[2]], right, 0.5 * tol, depth + 1, budget)?;
    Ok(l + r)
}

/// Running integral `I(t) = int_0^t f` sampled at the probe times seen so
/// far. A new probe integrates only from the nearest cached time below it.
#[derive(Clone, Debug)]
pub struct CumulativeIntegral {
    knots: Vec<(f64, f64)>,
}

impl Default for CumulativeIntegral {
    fn default() -> Self {
        Self { knots: vec![(0.0, 0.0)] }
    }
}

impl CumulativeIntegral {
    pub fn eval<F>(&mut self, f: &mut F, t: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<(f64, f64)>,
    {
        let idx = self.knots.partition_point(|(knot, _)| *knot <= t);
        let (t0, base) = self.knots[idx - 1];
        if t0 == t {
            return Ok(base);
        }
        let value = base + adaptive_simpson(f, t0, t, base)?;
        self.knots.insert(idx, (t, value));
        Ok(value)
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let mut f = |t: f64| Ok((3.0 * t * t - 2.0 * t + 1.0, 0.0));
        let v = adaptive_simpson(&mut f, 0.0, 2.0, 0.0).unwrap();
        assert!((v - 6.0).abs() < 1e-12);
    }

    #[test]
    fn exponential() {
        let mut f = |t: f64| Ok((t.exp(), 0.0));
        let v = adaptive_simpson(&mut f, 0.0, 3.0, 0.0).unwrap();
        assert!((v - (3f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn errors_propagate() {
        let mut f = |t: f64| if t > 0.5 { Ok((f64::NAN, 0.0)) } else { Ok((1.0, 0.0)) };
        assert!(adaptive_simpson(&mut f, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn noisy_integrand_stops_at_rounding_level() {
        // Deterministic jitter far above the tolerance but declared as noise.
        let jitter = |t: f64| 1e-9 * ((t.to_bits() >> 20) % 7) as f64 - 3e-9;
        let mut f = |t: f64| Ok((1.0 + jitter(t), 1e-9));
        let v = adaptive_simpson(&mut f, 0.0, 1.0, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        let mut undeclared = |t: f64| Ok((1.0 + jitter(t), 0.0));
        assert!(adaptive_simpson(&mut undeclared, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cache_reuses_knots() {
        let mut f = |t: f64| Ok((t.cos(), 0.0));
        let mut cache = CumulativeIntegral::default();
        let a = cache.eval(&mut f, 1.0).unwrap();
        let b = cache.eval(&mut f, 2.0).unwrap();
        let c = cache.eval(&mut f, 1.5).unwrap();
        assert_eq!(cache.eval(&mut f, 2.0).unwrap(), b);
        assert!((a - 1f64.sin()).abs() < 1e-11);
        assert!((b - 2f64.sin()).abs() < 1e-11);
        assert!((c - 1.5f64.sin()).abs() < 1e-11);
        assert_eq!(cache.len(), 4);
    }
}
