//! Nested fitting: an outer simplex over the free nonlinear parameters, each
//! evaluation rebuilding the design and refitting the logistic regression.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::design::{ColumnKey, ColumnMap, DesignMatrix, DesignPlan};
use crate::features::ParamDef;
use crate::glm::{fit_glm, null_log_likelihood, GlmFit, GlmOptions, RIDGE_FLOOR};
use crate::math::sigmoid;
use crate::simplex::{minimize_bounded, SimplexOptions};
use crate::spec::{parse_model, validate, ModelSpec, Scope};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Ridge on every ordinary column.
    pub ridge: f64,
    /// Ridge on `@` intercept columns.
    pub random_penalty: f64,
    /// Seconds of inactivity that end a session when no session column exists.
    pub session_gap: f64,
    pub simplex: SimplexOptions,
    /// Simplex starts; the first is each parameter's default start, the rest are seeded.
    pub starts: usize,
    /// Coordinate-wise screen of box quantiles before the first start, so the
    /// search does not begin on a plateau where a feature has decayed away.
    pub screen: bool,
    pub seed: u64,
    pub glm: GlmOptions,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            ridge: RIDGE_FLOOR,
            random_penalty: 1.0,
            session_gap: 1800.0,
            simplex: SimplexOptions::default(),
            starts: 1,
            screen: true,
            seed: 0,
            glm: GlmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParam {
    pub term: usize,
    pub feature: String,
    pub name: String,
    pub value: f64,
    pub free: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub column: ColumnKey,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub separation: bool,
    pub outer_evaluations: usize,
    pub outer_converged: bool,
    pub ridge: f64,
    pub random_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    /// Canonical spec text.
    pub spec: String,
    /// Concrete nonlinear parameters per term.
    pub params: Vec<Vec<f64>>,
    pub resolved: Vec<ResolvedParam>,
    pub coefficients: Vec<Coefficient>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub base_rate: f64,
    pub n_obs: usize,
    pub session_gap: f64,
    pub diagnostics: FitDiagnostics,
}

impl FittedModel {
    pub fn model_spec(&self) -> Result<ModelSpec> {
        Ok(parse_model(&self.spec)?)
    }

    pub fn column_map(&self) -> ColumnMap {
        ColumnMap {
            keys: self.coefficients.iter().map(|c| c.column.clone()).collect(),
        }
    }

    pub fn beta(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.value).collect()
    }

    pub fn coefficient(&self, key: &ColumnKey) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|c| &c.column == key)
            .map(|c| c.value)
    }

    /// Training McFadden R² against the constant base-rate model.
    pub fn mcfadden(&self) -> f64 {
        1.0 - self.log_likelihood / self.null_log_likelihood
    }
}

/// Per-column ridge: `random_penalty` on `@` intercept columns, `ridge` elsewhere.
pub fn column_penalties(spec: &ModelSpec, columns: &ColumnMap, cfg: &FitConfig) -> Vec<f64> {
    columns
        .keys
        .iter()
        .map(|k| match k.term() {
            Some(t) if spec.terms[t].scope == Scope::Random => cfg.random_penalty,
            _ => cfg.ridge,
        })
        .collect()
}

struct Inner<'a> {
    spec: &'a ModelSpec,
    plan: DesignPlan,
    penalties: Vec<f64>,
    glm: GlmOptions,
}

impl Inner<'_> {
    fn fit(&self, free: &[f64]) -> Result<(Vec<Vec<f64>>, DesignMatrix, GlmFit)> {
        let params = self.spec.resolve(free)?;
        let x = self.plan.build(&params)?;
        let fit = fit_glm(&x, &self.penalties, &self.glm)?;
        Ok((params, x, fit))
    }
}

/// Fits `spec` on `ds`: a single logistic fit when every parameter is fixed,
/// otherwise a simplex search over the free parameters maximizing the
/// penalized training log-likelihood of the inner fit.
pub fn optimize_nonlinear(ds: &Dataset, spec: &ModelSpec, cfg: &FitConfig) -> Result<FittedModel> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset {
            stage: "fit".into(),
        });
    }
    let validated = validate(spec, ds)?;
    let plan = DesignPlan::new(ds, &validated, None, cfg.session_gap)?;
    let penalties = column_penalties(spec, plan.columns(), cfg);
    let inner = Inner {
        spec,
        plan,
        penalties,
        glm: cfg.glm.clone(),
    };

    let slots = spec.free_params();
    let mut outer_evaluations = 0;
    let mut outer_converged = true;
    let best_free: Vec<f64> = if slots.is_empty() {
        Vec::new()
    } else {
        let defs: Vec<_> = slots.iter().map(|s| s.def).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut best: Option<(f64, Vec<f64>)> = None;
        let objective = |theta: &[f64]| match inner.fit(theta) {
            Ok((_, _, fit)) => -fit.penalized,
            Err(_) => f64::INFINITY,
        };
        for start_idx in 0..cfg.starts.max(1) {
            let start: Vec<f64> = if start_idx == 0 {
                let start: Vec<f64> = defs.iter().map(|d| d.to_unbounded(d.start())).collect();
                if cfg.screen {
                    let (u, evals) = screen(&objective, &defs, start);
                    outer_evaluations += evals;
                    u
                } else {
                    start
                }
            } else {
                (0..defs.len())
                    .map(|_| rng.random_range(-2.0..2.0))
                    .collect()
            };
            let r = minimize_bounded(objective, &defs, &start, &cfg.simplex);
            outer_evaluations += r.evaluations;
            if best.as_ref().is_none_or(|(v, _)| r.value < *v) {
                outer_converged = r.converged;
                best = Some((r.value, r.x));
            }
        }
        best.expect("at least one start").1
    };

    let (params, x, fit) = inner.fit(&best_free)?;
    if slots.is_empty() {
        outer_evaluations = 1;
    }

    let n_obs = x.n_rows();
    let base_rate = x.y.iter().sum::<f64>() / n_obs as f64;
    let null_ll = null_log_likelihood(&x.y, base_rate);

    let mut resolved = Vec::new();
    let free_set: Vec<(usize, usize)> = slots.iter().map(|s| (s.term, s.index)).collect();
    for (t, term) in spec.terms.iter().enumerate() {
        for (i, def) in term.param_defs().iter().enumerate() {
            resolved.push(ResolvedParam {
                term: t,
                feature: term.feature.name().to_string(),
                name: def.name.to_string(),
                value: params[t][i],
                free: free_set.contains(&(t, i)),
            });
        }
    }

    let coefficients = x
        .columns
        .keys
        .iter()
        .zip(&fit.coefficients)
        .map(|(k, &v)| Coefficient {
            column: k.clone(),
            value: v,
        })
        .collect();

    Ok(FittedModel {
        spec: spec.render(),
        params,
        resolved,
        coefficients,
        log_likelihood: fit.log_likelihood,
        null_log_likelihood: null_ll,
        base_rate,
        n_obs,
        session_gap: cfg.session_gap,
        diagnostics: FitDiagnostics {
            converged: fit.converged,
            iterations: fit.iterations,
            separation: fit.separation,
            outer_evaluations,
            outer_converged,
            ridge: cfg.ridge,
            random_penalty: cfg.random_penalty,
        },
    })
}

/// Box quantiles tried per parameter by the screen.
const SCREEN_QUANTILES: [f64; 5] = [0.02, 0.1, 0.3, 0.6, 0.9];

/// Greedy one-parameter-at-a-time scan over [`SCREEN_QUANTILES`]; returns the
/// best point in unbounded coordinates and the number of evaluations.
fn screen<F: Fn(&[f64]) -> f64>(f: &F, defs: &[ParamDef], mut u: Vec<f64>) -> (Vec<f64>, usize) {
    let to_x = |u: &[f64]| -> Vec<f64> {
        defs.iter()
            .zip(u)
            .map(|(d, &v)| d.from_unbounded(v))
            .collect()
    };
    let score = |u: &[f64]| {
        let v = f(&to_x(u));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best = score(&u);
    let mut evals = 1;
    for i in 0..defs.len() {
        for q in SCREEN_QUANTILES {
            let mut cand = u.clone();
            cand[i] = libm::log(q / (1.0 - q));
            let v = score(&cand);
            evals += 1;
            if v < best {
                best = v;
                u = cand;
            }
        }
    }
    (u, evals)
}

/// Logits of every trial in `ds` under `model`; levels the model never saw
/// contribute nothing.
pub fn predict_logits(model: &FittedModel, ds: &Dataset) -> Result<Vec<f64>> {
    let spec = model.model_spec()?;
    let validated = validate(&spec, ds)?;
    let columns = model.column_map();
    let plan = DesignPlan::new(ds, &validated, Some(&columns), model.session_gap)?;
    let x = plan.build(&model.params)?;
    Ok(x.linear_predictor(&model.beta()))
}

/// Success probability of every trial in `ds`, in dataset order.
pub fn predict(model: &FittedModel, ds: &Dataset) -> Result<Vec<f64>> {
    Ok(predict_logits(model, ds)?
        .into_iter()
        .map(sigmoid)
        .collect())
}
