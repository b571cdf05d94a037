//! Split-half, student-stratified cross-validation and pairwise comparison.
//!
//! Every run shuffles students with its own ChaCha stream derived from
//! `(seed, run)`, trains each model on the first half and scores it on the
//! second. Runs are independent, so callers may evaluate them in any order or
//! in parallel and hand the records to [`assemble`].

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::metrics::{auc, mcfadden_r2, subject_rmse};
use crate::model::{optimize_nonlinear, predict, FitConfig};
use crate::spec::ModelSpec;
use crate::stats::{by_adjust, paired_t, t_two_sided_p};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub runs: usize,
    pub seed: u64,
    /// Random subsample of this many students per run, drawn before splitting.
    pub subsample: Option<usize>,
    pub fit: FitConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            runs: 100,
            seed: 0,
            subsample: None,
            fit: FitConfig::default(),
        }
    }
}

/// Train and test student indices of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// The student split of run `run`; train receives the extra student of an odd count.
pub fn split_for_run(n_students: usize, run: usize, cfg: &CvConfig) -> Split {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run as u64);
    let mut students: Vec<usize> = (0..n_students).collect();
    students.shuffle(&mut rng);
    if let Some(k) = cfg.subsample {
        students.truncate(k.min(n_students));
        students.shuffle(&mut rng);
    }
    let n_train = students.len().div_ceil(2);
    let mut test = students.split_off(n_train);
    students.sort_unstable();
    test.sort_unstable();
    Split {
        train: students,
        test,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub ok: bool,
    pub error: Option<String>,
    pub mcfadden: Option<f64>,
    pub auc: Option<f64>,
    pub mean_rmse: Option<f64>,
    /// RMSE per held-out student, aligned with [`RunRecord::test`].
    pub subject_rmse: Vec<f64>,
}

impl ModelRun {
    fn failed(err: &Error) -> Self {
        ModelRun {
            ok: false,
            error: Some(err.to_string()),
            mcfadden: None,
            auc: None,
            mean_rmse: None,
            subject_rmse: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub train: Vec<String>,
    pub test: Vec<String>,
    /// Training-fold success rate used as the null model.
    pub null_rate: f64,
    pub models: Vec<ModelRun>,
}

/// Fits every spec on one run's training half and scores it on the test half.
pub fn evaluate_run(
    ds: &Dataset,
    specs: &[ModelSpec],
    run: usize,
    cfg: &CvConfig,
) -> Result<RunRecord> {
    let split = split_for_run(ds.students().len(), run, cfg);
    let train = ds.subset(&split.train);
    let test = ds.subset(&split.test);
    let ids = |idx: &[usize]| {
        idx.iter()
            .map(|&i| ds.students()[i].id.clone())
            .collect::<Vec<_>>()
    };

    let y_train = train.outcomes();
    if y_train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset {
            stage: "cv split".into(),
        });
    }
    let null_rate = y_train.iter().sum::<f64>() / y_train.len() as f64;
    let y = test.outcomes();
    let subjects = test.event_students();
    let p_null = vec![null_rate; y.len()];

    let models = specs
        .iter()
        .map(|spec| {
            let scored =
                optimize_nonlinear(&train, spec, &cfg.fit).and_then(|m| predict(&m, &test));
            match scored {
                Ok(p) => {
                    let rmse = subject_rmse(&p, &y, &subjects);
                    ModelRun {
                        ok: true,
                        error: None,
                        mcfadden: mcfadden_r2(&p, &p_null, &y).ok(),
                        auc: auc(&p, &y).ok(),
                        mean_rmse: Some(rmse.mean),
                        subject_rmse: rmse.per_subject.into_values().collect(),
                    }
                }
                Err(e) => ModelRun::failed(&e),
            }
        })
        .collect();

    Ok(RunRecord {
        run,
        train: ids(&split.train),
        test: ids(&split.test),
        null_rate,
        models,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub label: String,
    pub spec: String,
    pub mean_mcfadden: Option<f64>,
    pub mean_rmse: Option<f64>,
    pub mean_auc: Option<f64>,
    pub failed_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairwise {
    /// Mean over runs of the paired t of per-subject RMSE differences (row − column).
    pub t: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    /// Benjamini–Yekutieli adjusted p over all unordered pairs.
    pub p_adj: Vec<Vec<f64>>,
    pub df: f64,
    /// Runs where both models fit, per pair.
    pub runs_used: Vec<Vec<usize>>,
    /// Runs whose differences had zero variance and contributed t = 0.
    pub zero_variance_runs: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub seed: u64,
    pub runs: usize,
    pub subsample: Option<usize>,
    pub summary: Vec<ModelSummary>,
    pub pairwise: Option<Pairwise>,
    pub records: Vec<RunRecord>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values.flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Paired comparison of every model pair across runs.
pub fn pairwise_compare(records: &[RunRecord], n_models: usize) -> Option<Pairwise> {
    if n_models < 2 || records.is_empty() {
        return None;
    }
    let df = records[0].test.len() as f64 - 1.0;
    let mut t = vec![vec![0.0; n_models]; n_models];
    let mut p = vec![vec![1.0; n_models]; n_models];
    let mut runs_used = vec![vec![0; n_models]; n_models];
    let mut zero_var = vec![vec![0; n_models]; n_models];
    let mut raw = Vec::new();
    for a in 0..n_models {
        for b in a + 1..n_models {
            let (mut sum, mut used, mut flat) = (0.0, 0usize, 0usize);
            for r in records {
                let (ma, mb) = (&r.models[a], &r.models[b]);
                if !(ma.ok && mb.ok) {
                    continue;
                }
                let diffs: Vec<f64> = ma
                    .subject_rmse
                    .iter()
                    .zip(&mb.subject_rmse)
                    .map(|(x, y)| x - y)
                    .collect();
                match paired_t(&diffs) {
                    Some(v) => sum += v,
                    None => flat += 1,
                }
                used += 1;
            }
            let mean_t = if used > 0 { sum / used as f64 } else { 0.0 };
            let pv = if df > 0.0 {
                t_two_sided_p(mean_t, df)
            } else {
                1.0
            };
            t[a][b] = mean_t;
            t[b][a] = -mean_t;
            p[a][b] = pv;
            p[b][a] = pv;
            runs_used[a][b] = used;
            runs_used[b][a] = used;
            zero_var[a][b] = flat;
            zero_var[b][a] = flat;
            raw.push(pv);
        }
    }
    let adj = by_adjust(&raw);
    let mut p_adj = vec![vec![1.0; n_models]; n_models];
    let mut k = 0;
    for a in 0..n_models {
        for b in a + 1..n_models {
            p_adj[a][b] = adj[k];
            p_adj[b][a] = adj[k];
            k += 1;
        }
    }
    Some(Pairwise {
        t,
        p,
        p_adj,
        df,
        runs_used,
        zero_variance_runs: zero_var,
    })
}

/// Combines run records (in any order) into a report; labels default to the spec text.
pub fn assemble(
    mut records: Vec<RunRecord>,
    specs: &[ModelSpec],
    labels: Option<&[String]>,
    cfg: &CvConfig,
) -> CvReport {
    records.sort_by_key(|r| r.run);
    let summary = specs
        .iter()
        .enumerate()
        .map(|(m, spec)| ModelSummary {
            label: labels
                .and_then(|l| l.get(m).cloned())
                .unwrap_or_else(|| spec.render()),
            spec: spec.render(),
            mean_mcfadden: mean_of(records.iter().map(|r| r.models[m].mcfadden)),
            mean_rmse: mean_of(records.iter().map(|r| r.models[m].mean_rmse)),
            mean_auc: mean_of(records.iter().map(|r| r.models[m].auc)),
            failed_runs: records.iter().filter(|r| !r.models[m].ok).count(),
        })
        .collect();
    let pairwise = pairwise_compare(&records, specs.len());
    CvReport {
        seed: cfg.seed,
        runs: cfg.runs,
        subsample: cfg.subsample,
        summary,
        pairwise,
        records,
    }
}

/// Runs the whole protocol sequentially.
pub fn split_half_cv(ds: &Dataset, specs: &[ModelSpec], cfg: &CvConfig) -> Result<CvReport> {
    check_inputs(ds, specs, cfg)?;
    let records = (0..cfg.runs)
        .map(|run| evaluate_run(ds, specs, run, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(records, specs, None, cfg))
}

/// Preconditions shared by sequential and parallel drivers.
pub fn check_inputs(ds: &Dataset, specs: &[ModelSpec], cfg: &CvConfig) -> Result<()> {
    let n = cfg
        .subsample
        .map_or(ds.students().len(), |k| k.min(ds.students().len()));
    if n < 2 {
        return Err(Error::Config(
            "cross-validation needs at least two students".into(),
        ));
    }
    if specs.is_empty() {
        return Err(Error::Config(
            "cross-validation needs at least one model".into(),
        ));
    }
    if cfg.runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    Ok(())
}
