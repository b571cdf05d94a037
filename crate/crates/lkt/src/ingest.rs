//! DataShop-style tab-delimited transaction logs.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use lkt_core::dataset::{Dataset, Schema, TrialEvent};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source column names and outcome coding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub student: String,
    pub outcome: String,
    pub kc: Option<String>,
    pub item: Option<String>,
    pub time: Option<String>,
    pub duration: Option<String>,
    pub attempt: Option<String>,
    pub session: Option<String>,
    /// Step column used to restrict first attempts to a problem's first step.
    pub step: Option<String>,
    /// Outcome cells counted as success; every other value is a failure.
    pub success: Vec<String>,
    pub kc_delimiter: String,
    /// Unmapped columns to keep as components or covariates; `None` keeps all.
    pub extra: Option<Vec<String>>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            student: "Anon Student Id".into(),
            outcome: "Outcome".into(),
            kc: Some("KC (Default)".into()),
            item: Some("Problem Name".into()),
            time: Some("Time".into()),
            duration: Some("Duration (sec)".into()),
            attempt: Some("Attempt At Step".into()),
            session: Some("Session Id".into()),
            step: Some("Step Name".into()),
            success: vec!["CORRECT".into()],
            kc_delimiter: "~~".into(),
            extra: None,
        }
    }
}

impl ColumnMap {
    fn mapped(&self) -> Vec<&str> {
        let mut v = vec![self.student.as_str(), self.outcome.as_str()];
        for c in [
            &self.kc,
            &self.item,
            &self.time,
            &self.duration,
            &self.attempt,
            &self.session,
            &self.step,
        ] {
            v.extend(c.as_deref());
        }
        v
    }
}

/// Parses a timestamp cell: seconds as a number, or an ISO-like date-time.
pub fn parse_time(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if let Ok(v) = cell.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(cell) {
        return Some(dt.timestamp_micros() as f64 / 1e6);
    }
    const FORMATS: [&str; 4] = [
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y/%m/%d %H:%M:%S%.f",
        "%m/%d/%Y %H:%M:%S%.f",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(cell, f).ok())
        .map(|dt| dt.and_utc().timestamp_micros() as f64 / 1e6)
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "." || c.eq_ignore_ascii_case("na")
}

struct Row {
    event: TrialEvent,
    step: Option<String>,
}

/// Reads a log from `reader`; `source` is recorded in the provenance.
pub fn read_datashop<R: Read>(reader: R, source: &str, columns: &ColumnMap) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| header.iter().position(|h| h == name);
    let student_col =
        find(&columns.student).ok_or_else(|| Error::MissingMandatory(columns.student.clone()))?;
    let outcome_col =
        find(&columns.outcome).ok_or_else(|| Error::MissingMandatory(columns.outcome.clone()))?;
    let opt = |c: &Option<String>| c.as_deref().and_then(find);
    let (kc_col, item_col, time_col) = (opt(&columns.kc), opt(&columns.item), opt(&columns.time));
    let (dur_col, att_col, sess_col, step_col) = (
        opt(&columns.duration),
        opt(&columns.attempt),
        opt(&columns.session),
        opt(&columns.step),
    );

    let mapped = columns.mapped();
    let extra_cols: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| !mapped.contains(&h.as_str()))
        .filter(|(_, h)| columns.extra.as_ref().is_none_or(|keep| keep.contains(h)))
        .map(|(i, h)| (i, h.clone()))
        .collect();

    let mut rows = Vec::new();
    let mut synthetic_clock: HashMap<String, f64> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let row_err = |message: String| Error::Row { line, message };
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let student = cell(student_col).trim();
        if student.is_empty() {
            return Err(row_err(format!("missing {:?}", columns.student)));
        }
        let outcome_raw = cell(outcome_col).trim();
        if outcome_raw.is_empty() {
            return Err(row_err(format!("missing {:?}", columns.outcome)));
        }
        let outcome = u8::from(columns.success.iter().any(|s| s == outcome_raw));
        let time = match time_col {
            Some(c) => parse_time(cell(c))
                .ok_or_else(|| row_err(format!("unparseable timestamp {:?}", cell(c))))?,
            None => {
                let t = synthetic_clock.entry(student.to_string()).or_insert(0.0);
                let now = *t;
                *t += 1.0;
                now
            }
        };
        let mut ev = TrialEvent::new(student, time, outcome);
        if let Some(c) = kc_col {
            ev = ev.with_kcs(
                cell(c)
                    .split(columns.kc_delimiter.as_str())
                    .map(str::trim)
                    .filter(|k| !k.is_empty()),
            );
        }
        if let Some(c) = item_col {
            let v = cell(c).trim();
            if !v.is_empty() {
                ev = ev.with_item(v);
            }
        }
        if let Some(c) = dur_col {
            let v = cell(c);
            if !is_missing(v) {
                let d = v
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|d| d.is_finite() && *d >= 0.0);
                ev = ev.with_duration(d.ok_or_else(|| row_err(format!("invalid duration {v:?}")))?);
            }
        }
        if let Some(c) = att_col {
            let v = cell(c).trim();
            let n: f64 = v
                .parse()
                .map_err(|_| row_err(format!("invalid attempt counter {v:?}")))?;
            ev.first_attempt = n == 1.0;
        }
        if let Some(c) = sess_col {
            let v = cell(c).trim();
            if !v.is_empty() {
                ev = ev.with_session(v);
            }
        }
        for (i, name) in &extra_cols {
            ev = ev.with_extra(name.clone(), cell(*i).trim());
        }
        let step = step_col.map(|c| cell(c).trim().to_string());
        rows.push(Row { event: ev, step });
    }
    if rows.is_empty() {
        return Err(lkt_core::Error::EmptyDataset {
            stage: "ingest".into(),
        }
        .into());
    }

    if att_col.is_some() && step_col.is_some() && item_col.is_some() {
        // first step of each (student, problem) by timestamp, ties to file order
        let mut first_step: HashMap<(&str, &str), (f64, usize)> = HashMap::new();
        for (i, r) in rows.iter().enumerate() {
            let Some(item) = r.event.item.as_deref() else {
                continue;
            };
            let e = first_step
                .entry((r.event.student.as_str(), item))
                .or_insert((r.event.time, i));
            if r.event.time < e.0 {
                *e = (r.event.time, i);
            }
        }
        let first: Vec<bool> = rows
            .iter()
            .map(|r| match r.event.item.as_deref() {
                Some(item) => {
                    let (_, i) = first_step[&(r.event.student.as_str(), item)];
                    rows[i].step == r.step
                }
                None => true,
            })
            .collect();
        for (r, f) in rows.iter_mut().zip(first) {
            r.event.first_attempt &= f;
        }
    }

    let schema = Schema {
        kc: kc_col.is_some(),
        item: item_col.is_some(),
        time: time_col.is_some(),
        duration: dur_col.is_some(),
        attempt: att_col.is_some(),
        session: sess_col.is_some(),
        extra: extra_cols.into_iter().map(|(_, n)| n).collect(),
    };
    let mut ds = Dataset::from_events(rows.into_iter().map(|r| r.event).collect(), schema)?;
    ds.provenance.source = Some(source.to_string());
    if time_col.is_none() {
        ds.provenance.synthetic_time = true;
        ds.provenance.warnings.push(format!(
            "no {:?} column: timestamps synthesized from row order, 1 s apart",
            columns.time.as_deref().unwrap_or("time")
        ));
    }
    Ok(ds)
}

/// Reads a log file.
pub fn load_datashop(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(Error::io(path))?;
    read_datashop(
        std::io::BufReader::new(file),
        &path.display().to_string(),
        columns,
    )
}

/// Writes `ds` in the default DataShop column layout. `header` lines are
/// emitted first as `#` comments.
pub fn write_tsv<W: Write>(ds: &Dataset, mut out: W, header: &[String]) -> Result<()> {
    let map = ColumnMap::default();
    let io = |e| Error::io("<output>")(e);
    for line in header {
        writeln!(out, "# {line}").map_err(io)?;
    }
    let mut cols = vec![map.student.clone(), map.outcome.clone()];
    let s = &ds.schema;
    let optional = [
        (s.kc, &map.kc),
        (s.item, &map.item),
        (s.time, &map.time),
        (s.duration, &map.duration),
        (s.session, &map.session),
    ];
    for (present, name) in optional {
        if present {
            cols.push(name.clone().expect("default map names every column"));
        }
    }
    cols.extend(s.extra.iter().cloned());
    writeln!(out, "{}", cols.join("\t")).map_err(io)?;
    let success = &map.success[0];
    for ev in ds.events() {
        let mut cells: Vec<String> = vec![
            ev.student.clone(),
            if ev.outcome == 1 {
                success.clone()
            } else {
                "INCORRECT".into()
            },
        ];
        if s.kc {
            cells.push(ev.kcs.join(&map.kc_delimiter));
        }
        if s.item {
            cells.push(ev.item.clone().unwrap_or_default());
        }
        if s.time {
            cells.push(format!("{}", ev.time));
        }
        if s.duration {
            cells.push(ev.duration.map(|d| format!("{d}")).unwrap_or_default());
        }
        if s.session {
            cells.push(ev.session.clone().unwrap_or_default());
        }
        for c in &s.extra {
            cells.push(ev.extra.get(c).cloned().unwrap_or_default());
        }
        writeln!(out, "{}", cells.join("\t")).map_err(io)?;
    }
    Ok(())
}

/// Items observed in `ds` with the KCs of their first occurrence.
pub fn item_kcs(ds: &Dataset) -> BTreeMap<String, Vec<String>> {
    let mut out = BTreeMap::new();
    for ev in ds.events() {
        if let Some(item) = &ev.item {
            out.entry(item.clone()).or_insert_with(|| ev.kcs.clone());
        }
    }
    out
}
