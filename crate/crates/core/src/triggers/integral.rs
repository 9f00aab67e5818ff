//! Closed-form `int_0^t e^(k z) z^n dz` for the self-triggered performance bounds.

/// Returns `[I_0(t), I_1(t), I_2(t)]` with `I_n(t) = int_0^t e^(kappa z) z^n dz`.
pub fn exp_moments(kappa: f64, t: f64) -> [f64; 3] {
    let kt = kappa * t;
    if kt.abs() <= 2.0 {
        // I_n = sum_k kappa^k t^(n+k+1) / (k! (n+k+1)), all terms positive for kappa, t > 0.
        let mut out = [0.0; 3];
        for (n, slot) in out.iter_mut().enumerate() {
            let mut coef = t.powi(n as i32 + 1);
            let mut sum = 0.0;
            for k in 0..200 {
                let term = coef / (n + k + 1) as f64;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
                coef *= kt / (k + 1) as f64;
            }
            *slot = sum;
        }
        out
    } else {
        let e = kt.exp();
        let i0 = kt.exp_m1() / kappa;
        let i1 = (t * e - i0) / kappa;
        let i2 = (t * t * e - 2.0 * i1) / kappa;
        [i0, i1, i2]
    }
}

/// `int_0^t e^(kappa z) (c2 z^2 + c1 z + c0) dz` for `coeffs = [c2, c1, c0]`.
pub fn exp_weighted_quadratic(kappa: f64, coeffs: [f64; 3], t: f64) -> f64 {
    let [i0, i1, i2] = exp_moments(kappa, t);
    coeffs[0] * i2 + coeffs[1] * i1 + coeffs[2] * i0
}
