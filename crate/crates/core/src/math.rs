//! Scalar helpers over `libm` so the crate stays `no_std`.

pub use libm::{exp, fabs, log, log1p, pow, sqrt};

/// Logistic function, stable for large |x|.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        exp(x)
    } else {
        log1p(exp(x))
    }
}

/// Bernoulli log-likelihood of `y` under linear predictor `eta`.
#[inline]
pub fn log_lik_logit(y: f64, eta: f64) -> f64 {
    y * -softplus(-eta) + (1.0 - y) * -softplus(eta)
}

/// Bernoulli log-likelihood of `y` under probability `p`.
#[inline]
pub fn log_lik_prob(y: f64, p: f64) -> f64 {
    y * log(p) + (1.0 - y) * log(1.0 - p)
}
