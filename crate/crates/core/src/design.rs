//! Sparse design matrices built by streaming each student's events through
//! per-level feature state.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::features::{evaluate, ComponentState, FeatureKind, Moment, SessionClock};
use crate::spec::validate::event_levels;
use crate::spec::{Scope, ValidatedSpec};
use crate::{Error, Result};

/// What a design column stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKey {
    /// Implicit intercept added when the spec has no intercept term.
    Global,
    Shared {
        term: usize,
    },
    Level {
        term: usize,
        level: String,
    },
}

impl ColumnKey {
    pub fn term(&self) -> Option<usize> {
        match self {
            ColumnKey::Global => None,
            ColumnKey::Shared { term } | ColumnKey::Level { term, .. } => Some(*term),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ColumnMap {
    pub keys: Vec<ColumnKey>,
}

impl ColumnMap {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of(&self, key: &ColumnKey) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }
}

/// Row-compressed design matrix with its response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
    pub y: Vec<f64>,
    pub columns: ColumnMap,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .map(|&c| c as usize)
            .zip(self.vals[r].iter().copied())
    }

    /// Xβ.
    pub fn linear_predictor(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.row(i).map(|(c, v)| v * beta[c]).sum())
            .collect()
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols()]; self.n_rows()];
        for (i, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row(i) {
                row[c] += v;
            }
        }
        out
    }

    /// Builds a matrix from dense rows; every column is shared.
    pub fn from_dense(rows: &[Vec<f64>], y: Vec<f64>) -> DesignMatrix {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = DesignMatrix {
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            y,
            columns: ColumnMap {
                keys: (0..n_cols).map(|term| ColumnKey::Shared { term }).collect(),
            },
        };
        for r in rows {
            for (c, &v) in r.iter().enumerate() {
                m.cols.push(c as u32);
                m.vals.push(v);
            }
            m.row_ptr.push(m.cols.len());
        }
        m
    }
}

/// Per-term level bookkeeping compiled once per dataset.
#[derive(Debug, Clone)]
struct TermPlan {
    kind: FeatureKind,
    scope: Scope,
    /// Events → term-local level ids (CSR).
    level_ptr: Vec<usize>,
    level_ids: Vec<u32>,
    n_levels: usize,
    /// Column of each level (per-level scopes) or the shared column.
    level_col: Vec<Option<u32>>,
    shared_col: Option<u32>,
    numeric: Vec<f64>,
}

/// Dataset and spec compiled for repeated design builds under different
/// nonlinear parameters.
#[derive(Debug, Clone)]
pub struct DesignPlan {
    terms: Vec<TermPlan>,
    moments: Vec<Moment>,
    spans: Vec<(usize, usize)>,
    y: Vec<f64>,
    global_col: Option<u32>,
    columns: ColumnMap,
}

impl DesignPlan {
    /// Compiles `ds` against `spec`. With `columns = None` the column map is
    /// derived from the data (levels sorted per term); otherwise the given map
    /// is used and levels missing from it get no column.
    pub fn new(
        ds: &Dataset,
        spec: &ValidatedSpec,
        columns: Option<&ColumnMap>,
        session_gap: f64,
    ) -> Result<Self> {
        let terms_spec = &spec.spec.terms;
        // term-local level interning
        let mut term_levels: Vec<BTreeMap<&str, u32>> = vec![BTreeMap::new(); terms_spec.len()];
        let mut terms = Vec::with_capacity(terms_spec.len());
        for (t, term) in terms_spec.iter().enumerate() {
            let mut level_ptr = Vec::with_capacity(ds.len() + 1);
            let mut level_ids = Vec::with_capacity(ds.len());
            let mut numeric = Vec::new();
            level_ptr.push(0);
            let intern = &mut term_levels[t];
            for ev in ds.events() {
                if term.feature == FeatureKind::Numeric {
                    let name = term.component.name();
                    let raw = ev.extra.get(name).map(|s| s.trim()).unwrap_or("");
                    let v = raw
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::NonNumeric {
                            column: name.into(),
                            value: raw.into(),
                        })?;
                    numeric.push(v);
                } else {
                    for lvl in event_levels(&term.component, ev) {
                        let next = intern.len() as u32;
                        level_ids.push(*intern.entry(lvl).or_insert(next));
                    }
                }
                level_ptr.push(level_ids.len());
            }
            terms.push(TermPlan {
                kind: term.feature,
                scope: term.scope,
                level_ptr,
                level_ids,
                n_levels: intern.len(),
                level_col: Vec::new(),
                shared_col: None,
                numeric,
            });
        }

        let columns = match columns {
            Some(map) => map.clone(),
            None => {
                let mut keys = Vec::new();
                if !spec.spec.has_intercept() {
                    keys.push(ColumnKey::Global);
                }
                for (t, term) in terms_spec.iter().enumerate() {
                    if term.has_levels() {
                        // BTreeMap iterates in sorted level order
                        for lvl in term_levels[t].keys() {
                            keys.push(ColumnKey::Level {
                                term: t,
                                level: String::from(*lvl),
                            });
                        }
                    } else {
                        keys.push(ColumnKey::Shared { term: t });
                    }
                }
                ColumnMap { keys }
            }
        };

        let mut global_col = None;
        let mut level_lookup: Vec<BTreeMap<&str, u32>> = vec![BTreeMap::new(); terms.len()];
        for (c, key) in columns.keys.iter().enumerate() {
            let c = c as u32;
            match key {
                ColumnKey::Global => global_col = Some(c),
                ColumnKey::Shared { term } => {
                    let tp = terms.get_mut(*term).ok_or_else(|| bad_key(key))?;
                    tp.shared_col = Some(c);
                }
                ColumnKey::Level { term, level } => {
                    level_lookup
                        .get_mut(*term)
                        .ok_or_else(|| bad_key(key))?
                        .insert(level.as_str(), c);
                }
            }
        }
        for (t, tp) in terms.iter_mut().enumerate() {
            let mut level_col = vec![None; tp.n_levels];
            for (name, &id) in &term_levels[t] {
                level_col[id as usize] = level_lookup[t].get(name).copied();
            }
            tp.level_col = level_col;
        }

        let mut moments = Vec::with_capacity(ds.len());
        let mut spans = Vec::with_capacity(ds.students().len());
        for s in ds.students() {
            let mut clock = SessionClock::new(session_gap);
            for ev in &ds.events()[s.start..s.end] {
                moments.push(clock.tick(ev.time, ev.session.as_deref()));
            }
            spans.push((s.start, s.end));
        }

        Ok(DesignPlan {
            terms,
            moments,
            spans,
            y: ds.outcomes(),
            global_col,
            columns,
        })
    }

    pub fn columns(&self) -> &ColumnMap {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    /// Student event ranges in dataset order.
    pub fn student_spans(&self) -> &[(usize, usize)] {
        &self.spans
    }

    /// Builds the matrix for concrete per-term parameters, streaming every
    /// student's events in time order with strictly prior state.
    pub fn build(&self, params: &[Vec<f64>]) -> Result<DesignMatrix> {
        let mut cursor = self.cursor(params)?;
        let mut m = DesignMatrix {
            row_ptr: Vec::with_capacity(self.n_rows() + 1),
            cols: Vec::new(),
            vals: Vec::new(),
            y: self.y.clone(),
            columns: self.columns.clone(),
        };
        m.row_ptr.push(0);
        let mut row = Vec::new();
        for &(start, end) in &self.spans {
            cursor.begin_student();
            for i in start..end {
                cursor.row(i, &mut row);
                for &(c, v) in &row {
                    m.cols.push(c);
                    m.vals.push(v);
                }
                m.row_ptr.push(m.cols.len());
                cursor.observe(i, self.y[i] as u8);
            }
        }
        Ok(m)
    }

    /// Streaming access for callers that decide outcomes as they go.
    pub fn cursor<'a>(&'a self, params: &'a [Vec<f64>]) -> Result<DesignCursor<'a>> {
        if params.len() != self.terms.len() {
            return Err(Error::Config(format!(
                "expected parameters for {} terms, got {}",
                self.terms.len(),
                params.len()
            )));
        }
        let mut states = Vec::with_capacity(self.terms.len());
        for (t, tp) in self.terms.iter().enumerate() {
            let defs = tp.kind.params();
            if params[t].len() != defs.len() {
                let name = defs.get(params[t].len()).map_or("?", |d| d.name);
                return Err(Error::UnboundParameter {
                    term: t,
                    name: name.into(),
                });
            }
            for (def, &v) in defs.iter().zip(&params[t]) {
                if !def.contains(v) {
                    return Err(Error::ParameterOutOfBounds {
                        term: t,
                        name: def.name.into(),
                        value: v,
                    });
                }
            }
            let n = if tp.kind.is_history() { tp.n_levels } else { 0 };
            let rate = tp.kind.decay_param().map_or(1.0, |i| params[t][i]);
            states.push(vec![ComponentState::new(rate); n]);
        }
        Ok(DesignCursor {
            plan: self,
            params,
            touched: vec![Vec::new(); self.terms.len()],
            states,
        })
    }
}

fn bad_key(key: &ColumnKey) -> Error {
    Error::Config(format!("column map entry {key:?} does not match the spec"))
}

/// Row-by-row evaluation over a [`DesignPlan`].
pub struct DesignCursor<'p> {
    plan: &'p DesignPlan,
    params: &'p [Vec<f64>],
    states: Vec<Vec<ComponentState>>,
    touched: Vec<Vec<u32>>,
}

impl DesignCursor<'_> {
    /// Clears all level state; call at each student boundary.
    pub fn begin_student(&mut self) {
        for (states, touched) in self.states.iter_mut().zip(self.touched.iter_mut()) {
            for &l in touched.iter() {
                states[l as usize].reset();
            }
            touched.clear();
        }
    }

    /// Entries of row `i` from strictly prior state.
    pub fn row(&self, i: usize, out: &mut Vec<(u32, f64)>) {
        out.clear();
        let plan = self.plan;
        if let Some(c) = plan.global_col {
            out.push((c, 1.0));
        }
        let now = plan.moments[i];
        for (t, tp) in plan.terms.iter().enumerate() {
            let levels = &tp.level_ids[tp.level_ptr[i]..tp.level_ptr[i + 1]];
            match (tp.kind, tp.scope) {
                (FeatureKind::Numeric, _) => {
                    if let Some(c) = tp.shared_col {
                        out.push((c, tp.numeric[i]));
                    }
                }
                (FeatureKind::Intercept, _) => {
                    for &l in levels {
                        if let Some(c) = tp.level_col[l as usize] {
                            out.push((c, 1.0));
                        }
                    }
                }
                (kind, Scope::Shared) => {
                    if let (Some(c), false) = (tp.shared_col, levels.is_empty()) {
                        let v: f64 = levels
                            .iter()
                            .map(|&l| {
                                evaluate(kind, &self.states[t][l as usize], &self.params[t], now)
                            })
                            .sum();
                        out.push((c, v));
                    }
                }
                (kind, _) => {
                    for &l in levels {
                        if let Some(c) = tp.level_col[l as usize] {
                            out.push((
                                c,
                                evaluate(kind, &self.states[t][l as usize], &self.params[t], now),
                            ));
                        }
                    }
                }
            }
        }
    }

    /// Records the outcome of event `i` into every level state it touches.
    pub fn observe(&mut self, i: usize, outcome: u8) {
        let plan = self.plan;
        let now = plan.moments[i];
        for (t, tp) in plan.terms.iter().enumerate() {
            if !tp.kind.is_history() {
                continue;
            }
            for &l in &tp.level_ids[tp.level_ptr[i]..tp.level_ptr[i + 1]] {
                let st = &mut self.states[t][l as usize];
                if st.n_opp() == 0 {
                    self.touched[t].push(l);
                }
                // times within a student are sorted by construction
                st.update(now, outcome)
                    .expect("events are time-ordered within a student");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Schema, TrialEvent};
    use crate::spec::{parse_model, validate};

    fn plan(spec: &str, evs: Vec<TrialEvent>) -> DesignPlan {
        let ds = Dataset::from_events(
            evs,
            Schema {
                kc: true,
                item: true,
                ..Schema::default()
            },
        )
        .unwrap();
        let v = validate(&parse_model(spec).unwrap(), &ds).unwrap();
        DesignPlan::new(&ds, &v, None, 1800.0).unwrap()
    }

    #[test]
    fn multi_kc_intercepts_are_compensatory() {
        let p = plan(
            "intercept(KC)",
            alloc::vec![TrialEvent::new("s", 0.0, 1).with_kcs(["lcd", "fracadd"])],
        );
        let m = p.build(&[Vec::new()]).unwrap();
        let row: Vec<_> = m.row(0).collect();
        assert_eq!(
            m.columns.keys[0],
            ColumnKey::Level {
                term: 0,
                level: "fracadd".into()
            }
        );
        assert_eq!(row, [(1, 1.0), (0, 1.0)]);
    }

    #[test]
    fn per_level_count_uses_prior_opportunities() {
        let evs = (0..3)
            .map(|i| TrialEvent::new("s", i as f64, 1).with_kcs(["lcd"]))
            .collect();
        let p = plan("intercept(KC) + lineafm$(KC)", evs);
        let m = p.build(&[Vec::new(), Vec::new()]).unwrap();
        let third: Vec<_> = m.row(2).collect();
        assert_eq!(third, [(0, 1.0), (1, 2.0)]);
    }

    #[test]
    fn first_trial_propdec_is_one_half() {
        let evs = alloc::vec![
            TrialEvent::new("a", 0.0, 1),
            TrialEvent::new("b", 0.0, 0),
            TrialEvent::new("b", 1.0, 0)
        ];
        let p = plan("propdec(Student, d=0.8)", evs);
        let m = p.build(&[alloc::vec![0.8]]).unwrap();
        assert_eq!(
            m.columns.keys,
            [ColumnKey::Global, ColumnKey::Shared { term: 0 }]
        );
        assert_eq!(m.row(0).collect::<Vec<_>>(), [(0, 1.0), (1, 0.5)]);
        assert_eq!(m.row(1).collect::<Vec<_>>(), [(0, 1.0), (1, 0.5)]);
        let v = m.row(2).nth(1).unwrap().1;
        assert!((v - 0.8 / 2.6).abs() < 1e-15);
    }

    #[test]
    fn unseen_levels_get_no_column() {
        let train = plan(
            "intercept(KC)",
            alloc::vec![TrialEvent::new("s", 0.0, 1).with_kcs(["a"])],
        );
        let ds = Dataset::from_events(
            alloc::vec![TrialEvent::new("t", 0.0, 1).with_kcs(["a", "zzz"])],
            Schema {
                kc: true,
                ..Schema::default()
            },
        )
        .unwrap();
        let v = validate(&parse_model("intercept(KC)").unwrap(), &ds).unwrap();
        let p = DesignPlan::new(&ds, &v, Some(train.columns()), 1800.0).unwrap();
        let m = p.build(&[Vec::new()]).unwrap();
        assert_eq!(m.row(0).collect::<Vec<_>>(), [(0, 1.0)]);
    }

    #[test]
    fn out_of_bounds_parameters_are_contract_errors() {
        let p = plan(
            "propdec(Student, d=?)",
            alloc::vec![TrialEvent::new("a", 0.0, 1)],
        );
        assert!(matches!(
            p.build(&[alloc::vec![1.5]]),
            Err(Error::ParameterOutOfBounds { .. })
        ));
        assert!(matches!(
            p.build(&[Vec::new()]),
            Err(Error::UnboundParameter { .. })
        ));
    }
}
