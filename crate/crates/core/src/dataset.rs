//! Canonical event datasets: trials grouped by student, time-ordered within
//! each student.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One observed practice attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEvent {
    pub student: String,
    pub item: Option<String>,
    /// Ordered, duplicate-free KC levels tagged on the trial.
    pub kcs: Vec<String>,
    /// Seconds.
    pub time: f64,
    /// 1 = success, 0 = failure.
    pub outcome: u8,
    pub duration: Option<f64>,
    pub first_attempt: bool,
    pub session: Option<String>,
    pub extra: BTreeMap<String, String>,
}

impl TrialEvent {
    pub fn new(student: impl Into<String>, time: f64, outcome: u8) -> Self {
        TrialEvent {
            student: student.into(),
            item: None,
            kcs: Vec::new(),
            time,
            outcome,
            duration: None,
            first_attempt: true,
            session: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_item(mut self, item: impl Into<String>) -> Self {
        self.item = Some(item.into());
        self
    }

    pub fn with_kcs<I, S>(mut self, kcs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.kcs.clear();
        for kc in kcs {
            let kc = kc.into();
            if !self.kcs.contains(&kc) {
                self.kcs.push(kc);
            }
        }
        self
    }

    pub fn with_session(mut self, session: impl Into<String>) -> Self {
        self.session = Some(session.into());
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = Some(duration);
        self
    }

    pub fn with_extra(mut self, column: impl Into<String>, value: impl Into<String>) -> Self {
        self.extra.insert(column.into(), value.into());
        self
    }
}

/// Which optional columns the source carried.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub kc: bool,
    pub item: bool,
    pub time: bool,
    pub duration: bool,
    pub attempt: bool,
    pub session: bool,
    /// Additional columns available as components or covariates.
    pub extra: Vec<String>,
}

/// Removal count of one filter stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub stage: String,
    pub removed: usize,
    /// Values changed in place (winsorized or imputed), not removed.
    #[serde(default)]
    pub modified: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    /// Timestamps were synthesized from row order.
    pub synthetic_time: bool,
    pub warnings: Vec<String>,
    pub filter_log: Vec<StageLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentSpan {
    pub id: String,
    pub start: usize,
    pub end: usize,
}

impl StudentSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Events grouped by student (first-appearance order) and sorted by time
/// within each student, ties kept in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    events: Vec<TrialEvent>,
    students: Vec<StudentSpan>,
    pub schema: Schema,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn from_events(events: Vec<TrialEvent>, schema: Schema) -> Result<Self> {
        for (i, ev) in events.iter().enumerate() {
            if ev.outcome > 1 {
                return Err(Error::Config(format!("event {i}: outcome must be 0 or 1")));
            }
            if !ev.time.is_finite() {
                return Err(Error::Config(format!("event {i}: timestamp is not finite")));
            }
            if let Some(d) = ev.duration {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::Config(format!(
                        "event {i}: duration must be finite and >= 0"
                    )));
                }
            }
        }
        let mut order: BTreeMap<&str, usize> = BTreeMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, ev) in events.iter().enumerate() {
            let g = *order.entry(ev.student.as_str()).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        for g in groups.iter_mut() {
            // stable: equal timestamps keep file order
            g.sort_by(|&a, &b| events[a].time.total_cmp(&events[b].time));
        }
        let mut slots: Vec<Option<TrialEvent>> = events.into_iter().map(Some).collect();
        let mut sorted = Vec::with_capacity(slots.len());
        let mut students = Vec::with_capacity(groups.len());
        for g in groups {
            let start = sorted.len();
            for i in g {
                sorted.push(slots[i].take().expect("each event moved once"));
            }
            students.push(StudentSpan {
                id: sorted[start].student.clone(),
                start,
                end: sorted.len(),
            });
        }
        Ok(Dataset {
            events: sorted,
            students,
            schema,
            provenance: Provenance::default(),
        })
    }

    pub fn events(&self) -> &[TrialEvent] {
        &self.events
    }

    pub fn students(&self) -> &[StudentSpan] {
        &self.students
    }

    pub fn student_events(&self, index: usize) -> &[TrialEvent] {
        let s = &self.students[index];
        &self.events[s.start..s.end]
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.outcome as f64).collect()
    }

    pub fn student_index(&self, id: &str) -> Option<usize> {
        self.students.iter().position(|s| s.id == id)
    }

    /// Student id of every event, in dataset order.
    pub fn event_students(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.events.len());
        for (i, s) in self.students.iter().enumerate() {
            out.extend(core::iter::repeat_n(i, s.len()));
        }
        out
    }

    /// New dataset holding the listed students, in the listed order.
    pub fn subset(&self, students: &[usize]) -> Dataset {
        let mut events = Vec::new();
        let mut spans = Vec::with_capacity(students.len());
        for &i in students {
            let start = events.len();
            events.extend_from_slice(self.student_events(i));
            spans.push(StudentSpan {
                id: self.students[i].id.clone(),
                start,
                end: events.len(),
            });
        }
        Dataset {
            events,
            students: spans,
            schema: self.schema.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Keeps events for which `keep` is true; student order is preserved and
    /// students left without events disappear.
    pub fn retain<F: FnMut(&TrialEvent) -> bool>(&self, mut keep: F) -> Dataset {
        let mut events = Vec::new();
        let mut spans = Vec::new();
        for s in &self.students {
            let start = events.len();
            for ev in &self.events[s.start..s.end] {
                if keep(ev) {
                    events.push(ev.clone());
                }
            }
            if events.len() > start {
                spans.push(StudentSpan {
                    id: s.id.clone(),
                    start,
                    end: events.len(),
                });
            }
        }
        Dataset {
            events,
            students: spans,
            schema: self.schema.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Rewrites events in place; ordering must not be affected by `f`.
    pub(crate) fn events_mut(&mut self) -> &mut [TrialEvent] {
        &mut self.events
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.schema.extra.iter().any(|c| c == name)
    }
}
