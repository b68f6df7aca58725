//! Log-domain arithmetic helpers.
//!
//! MGF terms like e^(theta*N) overflow f64 long before the quantities of
//! interest do, so every sum of exponentials goes through these.

/// log(exp(a) + exp(b)) without overflow.
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(sum_i exp(x_i)) over a slice; NEG_INFINITY for an empty or all-(-inf) slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - hi).exp()).sum();
    hi + sum.ln()
}

/// log(1 - exp(x)) for x < 0, stable as x approaches 0 from below.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    (-x.exp_m1()).ln()
}
