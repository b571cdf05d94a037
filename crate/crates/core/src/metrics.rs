//! Held-out prediction metrics.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math::{log_lik_prob, sqrt};
use crate::{Error, Result};

/// Probabilities are clamped this far from 0 and 1 before taking logs.
pub const PROB_EPS: f64 = 1e-15;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Bernoulli log-likelihood of outcomes `y` under probabilities `p`.
pub fn log_likelihood(p: &[f64], y: &[f64]) -> f64 {
    p.iter()
        .zip(y)
        .map(|(&p, &y)| log_lik_prob(y, clamp_prob(p)))
        .sum()
}

/// McFadden's pseudo R²: `1 − LL(model) / LL(null)`.
pub fn mcfadden_r2(p_model: &[f64], p_null: &[f64], y: &[f64]) -> Result<f64> {
    if p_model.len() != y.len() || p_null.len() != y.len() {
        return Err(Error::Config("metric inputs differ in length".into()));
    }
    let null = log_likelihood(p_null, y);
    if null.abs() < 1e-9 || !null.is_finite() {
        return Err(Error::UndefinedMetric("mcfadden"));
    }
    Ok(1.0 - log_likelihood(p_model, y) / null)
}

/// Area under the ROC curve via the Mann–Whitney statistic with average ranks.
pub fn auc(p: &[f64], y: &[f64]) -> Result<f64> {
    if p.len() != y.len() {
        return Err(Error::Config("metric inputs differ in length".into()));
    }
    let n_pos = y.iter().filter(|&&v| v > 0.5).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("auc"));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && p[order[j]] == p[order[i]] {
            j += 1;
        }
        // ranks i+1..=j share their average
        let avg = (i + 1 + j) as f64 / 2.0;
        rank_sum_pos += avg * order[i..j].iter().filter(|&&k| y[k] > 0.5).count() as f64;
        i = j;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRmse<S> {
    pub per_subject: BTreeMap<S, f64>,
    /// Unweighted mean over subjects.
    pub mean: f64,
}

/// Root mean squared error per subject, plus the unweighted mean over subjects.
pub fn subject_rmse<S: Ord + Clone>(p: &[f64], y: &[f64], subjects: &[S]) -> SubjectRmse<S> {
    let mut acc: BTreeMap<S, (f64, usize)> = BTreeMap::new();
    for ((&p, &y), s) in p.iter().zip(y).zip(subjects) {
        let e = acc.entry(s.clone()).or_insert((0.0, 0));
        e.0 += (y - p) * (y - p);
        e.1 += 1;
    }
    let per_subject: BTreeMap<S, f64> = acc
        .into_iter()
        .map(|(s, (sse, n))| (s, sqrt(sse / n as f64)))
        .collect();
    let mean = if per_subject.is_empty() {
        f64::NAN
    } else {
        per_subject.values().sum::<f64>() / per_subject.len() as f64
    };
    SubjectRmse { per_subject, mean }
}
