//! Penalized logistic regression by Newton/IRLS with step-halving.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::linalg::SquareMatrix;
use crate::math::{fabs, log_lik_logit, sigmoid};
use crate::{Error, Result};

/// Ridge applied to every column unless a scope asks for more.
pub const RIDGE_FLOOR: f64 = 1e-6;

/// |η| beyond which a fitted probability is within 1e-5 of 0 or 1.
const SEPARATION_ETA: f64 = 11.512925464970229;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmOptions {
    pub max_iter: usize,
    /// Convergence threshold on the change in penalized log-likelihood.
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for GlmOptions {
    fn default() -> Self {
        GlmOptions {
            max_iter: 50,
            tol: 1e-10,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub coefficients: Vec<f64>,
    /// Unpenalized Bernoulli log-likelihood at the solution.
    pub log_likelihood: f64,
    pub penalized: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Some fitted probability is within 1e-5 of 0 or 1, the signature of
    /// (quasi-)separation held finite only by the ridge.
    pub separation: bool,
    #[serde(skip)]
    pub fitted: Vec<f64>,
}

fn objective(x: &DesignMatrix, beta: &[f64], penalties: &[f64]) -> (Vec<f64>, f64, f64) {
    let eta = x.linear_predictor(beta);
    let ll: f64 = eta
        .iter()
        .zip(&x.y)
        .map(|(&e, &y)| log_lik_logit(y, e))
        .sum();
    let pen: f64 = beta
        .iter()
        .zip(penalties)
        .map(|(b, l)| 0.5 * l * b * b)
        .sum();
    (eta, ll, ll - pen)
}

/// Maximizes Σ[y ln p + (1−y) ln(1−p)] − ½ Σ λⱼβⱼ² with p = σ(Xβ).
///
/// Non-convergence is reported in the result, which carries the best iterate.
pub fn fit_glm(x: &DesignMatrix, penalties: &[f64], opts: &GlmOptions) -> Result<GlmFit> {
    let n = x.n_rows();
    let k = x.n_cols();
    if n == 0 {
        return Err(Error::Config("design matrix has no rows".into()));
    }
    if penalties.len() != k || penalties.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::Config(format!("need {k} nonnegative penalties")));
    }

    let mut beta = vec![0.0; k];
    let (mut eta, mut ll, mut obj) = objective(x, &beta, penalties);
    let mut iterations = 0;
    let mut converged = k == 0;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let mut grad: Vec<f64> = beta.iter().zip(penalties).map(|(b, l)| -l * b).collect();
        let mut hess = SquareMatrix::zeros(k);
        for i in 0..n {
            let p = sigmoid(eta[i]);
            let w = p * (1.0 - p);
            let r = x.y[i] - p;
            let lo = x.row_ptr[i];
            let hi = x.row_ptr[i + 1];
            for a in lo..hi {
                let (ca, va) = (x.cols[a] as usize, x.vals[a]);
                grad[ca] += va * r;
                let wa = w * va;
                for b in lo..hi {
                    let cb = x.cols[b] as usize;
                    if cb >= ca {
                        hess.add(ca, cb, wa * x.vals[b]);
                    }
                }
            }
        }
        for (j, &l) in penalties.iter().enumerate() {
            hess.add(j, j, l);
        }
        hess.symmetrize_from_upper();
        let step = solve_spd(hess, &grad)?;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            let (e, l, o) = objective(x, &trial, penalties);
            if o.is_finite() && o >= obj {
                accepted = Some((trial, e, l, o));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((b, e, l, o)) => {
                let change = o - obj;
                beta = b;
                eta = e;
                ll = l;
                obj = o;
                if fabs(change) < opts.tol {
                    converged = true;
                }
            }
            // no ascent direction left at working precision
            None => converged = true,
        }
    }

    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Numerical("non-finite coefficients".into()));
    }
    let separation = eta.iter().any(|e| fabs(*e) > SEPARATION_ETA);
    let fitted = eta.iter().map(|&e| sigmoid(e)).collect();
    Ok(GlmFit {
        coefficients: beta,
        log_likelihood: ll,
        penalized: obj,
        iterations,
        converged,
        separation,
        fitted,
    })
}

fn solve_spd(mut h: SquareMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let backup = h.clone();
    if h.cholesky() {
        return Ok(h.cholesky_solve(rhs));
    }
    let scale = (0..backup.n)
        .map(|i| fabs(backup.at(i, i)))
        .fold(1.0, f64::max);
    let mut jitter = 1e-10 * scale;
    for _ in 0..8 {
        let mut m = backup.clone();
        for i in 0..m.n {
            m.add(i, i, jitter);
        }
        if m.cholesky() {
            return Ok(m.cholesky_solve(rhs));
        }
        jitter *= 100.0;
    }
    Err(Error::Numerical(
        "Newton system is not positive definite".into(),
    ))
}

/// Log-likelihood of the constant-rate model at `rate`.
pub fn null_log_likelihood(y: &[f64], rate: f64) -> f64 {
    y.iter().map(|&v| crate::math::log_lik_prob(v, rate)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize, y: Vec<f64>) -> DesignMatrix {
        DesignMatrix::from_dense(&vec![vec![1.0]; n], y)
    }

    #[test]
    fn intercept_only_recovers_logit_of_base_rate() {
        let y: Vec<f64> = (0..400)
            .map(|i| if i % 4 == 0 { 0.0 } else { 1.0 })
            .collect();
        let fit = fit_glm(&ones(400, y), &[RIDGE_FLOOR], &GlmOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[0] - 3f64.ln()).abs() < 1e-4);
        assert!(!fit.separation);
    }

    #[test]
    fn constant_response_is_tamed_and_flagged() {
        let fit = fit_glm(
            &ones(50, vec![1.0; 50]),
            &[RIDGE_FLOOR],
            &GlmOptions::default(),
        )
        .unwrap();
        assert!(fit.coefficients[0].is_finite() && fit.coefficients[0] > 12.0);
        assert!(fit.log_likelihood < 0.0 && fit.log_likelihood > -1e-3);
        assert!(fit.separation);
    }

    #[test]
    fn duplicated_columns_fit_the_same_probabilities() {
        let xs: Vec<f64> = (0..200)
            .map(|i| ((i * 37) % 19) as f64 / 19.0 - 0.5)
            .collect();
        let y: Vec<f64> = (0..200)
            .map(|i| {
                if (i * 7919) % 10 < 4 + (xs[i] > 0.0) as usize * 3 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let single: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let double: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x]).collect();
        let a = fit_glm(
            &DesignMatrix::from_dense(&single, y.clone()),
            &[RIDGE_FLOOR; 2],
            &GlmOptions::default(),
        )
        .unwrap();
        let b = fit_glm(
            &DesignMatrix::from_dense(&double, y),
            &[RIDGE_FLOOR; 3],
            &GlmOptions::default(),
        )
        .unwrap();
        for (p, q) in a.fitted.iter().zip(&b.fitted) {
            assert!((p - q).abs() < 1e-6);
        }
        // the ridge splits the slope evenly
        assert!((b.coefficients[1] - b.coefficients[2]).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = ones(0, Vec::new());
        assert!(fit_glm(&m, &[0.0], &GlmOptions::default()).is_err());
        assert!(fit_glm(
            &ones(3, vec![0.0, 1.0, 1.0]),
            &[-1.0],
            &GlmOptions::default()
        )
        .is_err());
    }
}
