//! Synthetic learners drawn from a fully specified ground-truth model.
//!
//! Each student gets a ChaCha stream derived from `(seed, student)`; the
//! schedule and then every outcome are drawn from it, with features evaluated
//! on strictly prior state so adaptive terms feed back on sampled outcomes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Schema, TrialEvent};
use crate::design::{ColumnKey, DesignPlan};
use crate::math::{exp, log, sigmoid};
use crate::spec::{parse_model, validate};
use crate::{Error, Result};

/// Coefficient of one term: one value for the shared column or every level,
/// or a value per named level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    All(f64),
    Levels(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Model text with every nonlinear parameter bound.
    pub spec: String,
    /// One entry per term, in term order.
    pub coefficients: Vec<Coefficients>,
    /// Global intercept, used only when the spec has no intercept term.
    #[serde(default)]
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub students: usize,
    pub kcs: usize,
    pub items_per_kc: usize,
    pub trials: usize,
    /// Log-uniform range of seconds between trials within a session.
    pub gap: [f64; 2],
    pub trials_per_session: usize,
    /// Log-uniform range of seconds between sessions.
    pub session_gap: [f64; 2],
    pub truth: GroundTruth,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            students: 100,
            kcs: 10,
            items_per_kc: 3,
            trials: 100,
            gap: [5.0, 120.0],
            trials_per_session: 25,
            session_gap: [3_600.0, 7.0 * 86_400.0],
            truth: GroundTruth {
                spec: "propdec(Student, d=0.8) + intercept(KC) + logafm$(KC)".into(),
                coefficients: alloc::vec![
                    Coefficients::All(2.0),
                    Coefficients::All(-1.0),
                    Coefficients::All(0.3)
                ],
                intercept: 0.0,
            },
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn check(&self) -> Result<()> {
        let counts = [
            ("students", self.students),
            ("kcs", self.kcs),
            ("items_per_kc", self.items_per_kc),
            ("trials", self.trials),
            ("trials_per_session", self.trials_per_session),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        for (name, [lo, hi]) in [("gap", self.gap), ("session_gap", self.session_gap)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::Config(format!("{name} must be a positive range")));
            }
        }
        let finite = self.truth.intercept.is_finite()
            && self.truth.coefficients.iter().all(|c| match c {
                Coefficients::All(v) => v.is_finite(),
                Coefficients::Levels(m) => m.values().all(|v| v.is_finite()),
            });
        if !finite {
            return Err(Error::Config(
                "ground-truth coefficients must be finite".into(),
            ));
        }
        Ok(())
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi == lo {
        return lo;
    }
    exp(rng.random_range(log(lo)..log(hi)))
}

fn width(n: usize) -> usize {
    format!("{}", n.saturating_sub(1)).len()
}

/// Draws a dataset from the ground-truth model.
pub fn generate(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.check()?;
    let spec = parse_model(&cfg.truth.spec)?;
    let params = spec.resolve(&[])?;
    if cfg.truth.coefficients.len() != spec.terms.len() {
        return Err(Error::Config(format!(
            "ground truth has {} coefficient entries for {} terms",
            cfg.truth.coefficients.len(),
            spec.terms.len()
        )));
    }

    let (ws, wk, wi) = (width(cfg.students), width(cfg.kcs), width(cfg.items_per_kc));
    let mut rngs = Vec::with_capacity(cfg.students);
    let mut events = Vec::with_capacity(cfg.students * cfg.trials);
    for s in 0..cfg.students {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(s as u64);
        let student = format!("s{s:0ws$}");
        let mut t = 0.0;
        for j in 0..cfg.trials {
            if j > 0 {
                let range = if j % cfg.trials_per_session == 0 {
                    cfg.session_gap
                } else {
                    cfg.gap
                };
                t += log_uniform(&mut rng, range);
            }
            let k = (s + j) % cfg.kcs;
            let item = (j / cfg.kcs) % cfg.items_per_kc;
            let kc = format!("kc{k:0wk$}");
            events.push(
                TrialEvent::new(student.clone(), t, 0)
                    .with_item(format!("{kc}-i{item:0wi$}"))
                    .with_kcs([kc])
                    .with_session(format!("{student}-{}", j / cfg.trials_per_session)),
            );
        }
        rngs.push(rng);
    }
    let schema = Schema {
        kc: true,
        item: true,
        time: true,
        session: true,
        ..Schema::default()
    };
    let mut ds = Dataset::from_events(events, schema)?;
    ds.provenance.source = Some("simulate".into());

    let validated = validate(&spec, &ds)?;
    let plan = DesignPlan::new(&ds, &validated, None, 1800.0)?;
    let beta = plan
        .columns()
        .keys
        .iter()
        .map(|key| match key {
            ColumnKey::Global => Ok(cfg.truth.intercept),
            ColumnKey::Shared { term } => match &cfg.truth.coefficients[*term] {
                Coefficients::All(v) => Ok(*v),
                Coefficients::Levels(_) => Err(Error::Config(format!(
                    "term {term} has one shared coefficient, not per-level values"
                ))),
            },
            ColumnKey::Level { term, level } => match &cfg.truth.coefficients[*term] {
                Coefficients::All(v) => Ok(*v),
                Coefficients::Levels(m) => m.get(level).copied().ok_or_else(|| {
                    Error::Config(format!(
                        "term {term} has no coefficient for level {level:?}"
                    ))
                }),
            },
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut outcomes = Vec::with_capacity(ds.len());
    let mut cursor = plan.cursor(&params)?;
    let mut row = Vec::new();
    for (s, &(start, end)) in plan.student_spans().iter().enumerate() {
        cursor.begin_student();
        let rng = &mut rngs[s];
        for i in start..end {
            cursor.row(i, &mut row);
            let eta: f64 = row.iter().map(|&(c, v)| beta[c as usize] * v).sum();
            let y = u8::from(rng.random::<f64>() < sigmoid(eta));
            cursor.observe(i, y);
            outcomes.push(y);
        }
    }
    for (ev, y) in ds.events_mut().iter_mut().zip(outcomes) {
        ev.outcome = y;
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        let cfg = SynthConfig {
            students: 3,
            kcs: 4,
            trials: 30,
            trials_per_session: 10,
            ..SynthConfig::default()
        };
        let ds = generate(&cfg).unwrap();
        assert_eq!(ds.len(), 90);
        assert_eq!(ds.students()[2].id, "s2");
        let evs = ds.student_events(1);
        assert_eq!(evs[0].kcs, ["kc1"]);
        assert_eq!(evs[3].kcs, ["kc0"]);
        assert_eq!(evs[10].session.as_deref(), Some("s1-1"));
        assert!(evs[10].time - evs[9].time >= 3600.0);
        assert!(evs.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn unbound_truth_is_rejected() {
        let mut cfg = SynthConfig::default();
        cfg.truth.spec = "recency(KC, d=?)".into();
        assert!(matches!(
            generate(&cfg),
            Err(Error::UnboundParameter { .. })
        ));
        cfg.truth.spec = "intercept(Classroom)".into();
        cfg.truth.coefficients = alloc::vec![Coefficients::All(0.0)];
        assert_eq!(
            generate(&cfg).unwrap_err(),
            Error::MissingColumn("Classroom".into())
        );
    }
}
