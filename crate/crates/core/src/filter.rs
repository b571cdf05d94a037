//! Data-cleaning pipeline applied before any model is fit.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, StageLog};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub first_attempt_only: bool,
    pub min_student_obs: usize,
    pub min_kc_obs: usize,
    pub drop_single_exposure: bool,
    /// Upper percentile for duration winsorizing; `None` disables the stage.
    pub winsorize: Option<f64>,
    pub impute_median: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            first_attempt_only: true,
            min_student_obs: 25,
            min_kc_obs: 600,
            drop_single_exposure: true,
            winsorize: Some(0.95),
            impute_median: true,
        }
    }
}

impl FilterConfig {
    /// Every stage disabled.
    pub fn none() -> Self {
        FilterConfig {
            first_attempt_only: false,
            min_student_obs: 0,
            min_kc_obs: 0,
            drop_single_exposure: false,
            winsorize: None,
            impute_median: false,
        }
    }
}

pub type FilterLog = Vec<StageLog>;

/// Nearest-rank percentile: the smallest value with at least `q` of the data
/// at or below it. `sorted` must be ascending and nonempty.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = libm::ceil(q * n as f64) as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Runs, in order: first-attempt selection, the student minimum, the KC
/// minimum, single-exposure removal, duration winsorizing and median
/// imputation. Each stage is appended to the provenance filter log.
pub fn filter_pipeline(ds: &Dataset, cfg: &FilterConfig) -> Result<Dataset> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset {
            stage: "input".to_string(),
        });
    }
    let mut cur = ds.clone();
    let mut log: FilterLog = Vec::new();

    let record =
        |cur: &Dataset, next: Dataset, stage: &str, log: &mut FilterLog| -> Result<Dataset> {
            log.push(StageLog {
                stage: stage.to_string(),
                removed: cur.len() - next.len(),
                modified: 0,
            });
            if next.is_empty() {
                return Err(Error::EmptyDataset {
                    stage: stage.to_string(),
                });
            }
            Ok(next)
        };

    // (1)
    let next = if cfg.first_attempt_only && cur.schema.attempt {
        cur.retain(|e| e.first_attempt)
    } else {
        cur.clone()
    };
    cur = record(&cur, next, "first_attempt", &mut log)?;

    // (2)
    let short: Vec<String> = cur
        .students()
        .iter()
        .filter(|s| s.len() < cfg.min_student_obs)
        .map(|s| s.id.clone())
        .collect();
    let next = cur.retain(|e| !short.contains(&e.student));
    cur = record(&cur, next, "min_student_obs", &mut log)?;

    // (3)
    let next = if cur.schema.kc && cfg.min_kc_obs > 0 {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for e in cur.events() {
            for kc in &e.kcs {
                *counts.entry(kc.as_str()).or_default() += 1;
            }
        }
        let rare: Vec<String> = counts
            .into_iter()
            .filter(|&(_, n)| n < cfg.min_kc_obs)
            .map(|(k, _)| k.to_string())
            .collect();
        strip_kcs(&cur, |_, kc| {
            rare.binary_search_by(|r| r.as_str().cmp(kc)).is_ok()
        })
    } else {
        cur.clone()
    };
    cur = record(&cur, next, "min_kc_obs", &mut log)?;

    // (4)
    let next = if cur.schema.kc && cfg.drop_single_exposure {
        let mut pairs: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for e in cur.events() {
            for kc in &e.kcs {
                *pairs.entry((e.student.as_str(), kc.as_str())).or_default() += 1;
            }
        }
        let single: Vec<(String, String)> = pairs
            .into_iter()
            .filter(|&(_, n)| n == 1)
            .map(|((s, k), _)| (s.to_string(), k.to_string()))
            .collect();
        strip_kcs(&cur, |student, kc| {
            single
                .binary_search_by(|(s, k)| (s.as_str(), k.as_str()).cmp(&(student, kc)))
                .is_ok()
        })
    } else {
        cur.clone()
    };
    cur = record(&cur, next, "single_exposure", &mut log)?;

    // (5)
    let mut modified = 0;
    if let Some(q) = cfg.winsorize {
        let mut d: Vec<f64> = cur.events().iter().filter_map(|e| e.duration).collect();
        if !d.is_empty() {
            d.sort_by(f64::total_cmp);
            let cap = nearest_rank(&d, q);
            for e in cur.events_mut() {
                if let Some(v) = e.duration.as_mut() {
                    if *v > cap {
                        *v = cap;
                        modified += 1;
                    }
                }
            }
        }
    }
    log.push(StageLog {
        stage: "winsorize".to_string(),
        removed: 0,
        modified,
    });

    // (6)
    let mut modified = 0;
    if cfg.impute_median {
        let mut d: Vec<f64> = cur.events().iter().filter_map(|e| e.duration).collect();
        if !d.is_empty() {
            d.sort_by(f64::total_cmp);
            let med = median(&d);
            for e in cur.events_mut() {
                if e.duration.is_none() {
                    e.duration = Some(med);
                    modified += 1;
                }
            }
        }
    }
    log.push(StageLog {
        stage: "impute_median".to_string(),
        removed: 0,
        modified,
    });

    cur.provenance.filter_log.extend(log);
    Ok(cur)
}

/// Removes KC levels matching `drop`; events that lose all of their KCs are
/// removed, events that never had any are kept.
fn strip_kcs<F: Fn(&str, &str) -> bool>(ds: &Dataset, drop: F) -> Dataset {
    let mut stripped =
        ds.retain(|e| e.kcs.is_empty() || e.kcs.iter().any(|k| !drop(&e.student, k)));
    for e in stripped.events_mut() {
        let student = e.student.clone();
        e.kcs.retain(|k| !drop(&student, k));
    }
    stripped
}
