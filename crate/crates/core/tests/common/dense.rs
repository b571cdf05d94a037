//! Dense Newton–Raphson reference for ridge-penalized logistic regression.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Maximizes Σ log-lik − ½ Σ λ_j β_j² by Newton steps with step halving.
pub fn newton(x: &DMatrix<f64>, y: &DVector<f64>, lambda: &[f64]) -> DVector<f64> {
    let k = x.ncols();
    let pen = DMatrix::from_diagonal(&DVector::from_column_slice(lambda));
    let objective = |b: &DVector<f64>| {
        let eta = x * b;
        let ll: f64 = eta
            .iter()
            .zip(y.iter())
            .map(|(&e, &y)| y * e - (1.0 + e.exp()).ln())
            .sum();
        ll - 0.5 * (b.transpose() * &pen * b)[(0, 0)]
    };
    let mut beta = DVector::zeros(k);
    let mut obj = objective(&beta);
    for _ in 0..200 {
        let eta = x * &beta;
        let p = eta.map(sigmoid);
        let w = p.map(|p| p * (1.0 - p));
        let grad = x.transpose() * (y - &p) - &pen * &beta;
        let mut xw = x.clone();
        for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
            row *= *wi;
        }
        let hess = x.transpose() * xw + &pen;
        let step = hess
            .cholesky()
            .expect("penalized Hessian is positive definite")
            .solve(&grad);
        let mut t = 1.0;
        let mut next = &beta + &step * t;
        let mut next_obj = objective(&next);
        while next_obj < obj && t > 1e-10 {
            t *= 0.5;
            next = &beta + &step * t;
            next_obj = objective(&next);
        }
        let done = step.amax() * t < 1e-13;
        beta = next;
        obj = next_obj;
        if done {
            break;
        }
    }
    beta
}

/// Random well-conditioned problem: intercept column plus Gaussian-ish and
/// binary columns, outcomes drawn from a modest true model.
pub fn random_problem(seed: u64, max_rows: usize, max_cols: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = rng.random_range(1..=max_cols);
    let rows = rng.random_range((cols * 20).min(max_rows)..=max_rows);
    let truth: Vec<f64> = (0..cols).map(|_| rng.random_range(-0.8..0.8)).collect();
    let mut x = Vec::with_capacity(rows);
    let mut y = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row: Vec<f64> = (0..cols)
            .map(|j| match j {
                0 => 1.0,
                j if j % 3 == 0 => f64::from(rng.random_bool(0.3)),
                _ => rng.random_range(-1.5..1.5),
            })
            .collect();
        let eta: f64 = row.iter().zip(&truth).map(|(a, b)| a * b).sum();
        y.push(f64::from(rng.random_bool(sigmoid(eta))));
        x.push(row);
    }
    (x, y)
}

/// Largest coefficient difference between `fit_glm` and the dense reference
/// over `problems` random problems.
pub fn max_glm_discrepancy(problems: u64, max_rows: usize, max_cols: usize) -> f64 {
    use lkt_core::glm::{fit_glm, GlmOptions, RIDGE_FLOOR};
    use lkt_core::DesignMatrix;
    let mut worst: f64 = 0.0;
    for seed in 0..problems {
        let (rows, y) = random_problem(seed, max_rows, max_cols);
        let k = rows[0].len();
        let dm = DesignMatrix::from_dense(&rows, y.clone());
        let fit =
            fit_glm(&dm, &vec![RIDGE_FLOOR; k], &GlmOptions::default()).expect("fit succeeds");
        let xd = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
        let reference = newton(&xd, &DVector::from_vec(y), &vec![RIDGE_FLOOR; k]);
        for (a, b) in fit.coefficients.iter().zip(reference.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}
