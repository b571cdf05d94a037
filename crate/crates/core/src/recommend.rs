//! Threshold scheduling: pick the practice whose predicted success is
//! closest to a target probability.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, TrialEvent};
use crate::model::{predict, FittedModel};
use crate::{Error, Result};

pub const DEFAULT_TARGET: f64 = 0.8;
pub const DEFAULT_MASTERY: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub item: String,
    pub p: f64,
    pub distance: f64,
    pub mastered: bool,
}

/// Orders candidates by |p − target|, ties by item id; flags p ≥ `mastery`.
pub fn rank(candidates: &[(String, f64)], target: f64, mastery: f64) -> Result<Vec<Ranked>> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate items".into()));
    }
    let mut out: Vec<Ranked> = candidates
        .iter()
        .map(|(item, p)| Ranked {
            item: item.clone(),
            p: *p,
            distance: (p - target).abs(),
            mastered: *p >= mastery,
        })
        .collect();
    out.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.item.cmp(&b.item))
    });
    Ok(out)
}

/// Predicted success of each candidate as the student's next trial, given
/// the student's history. Candidates carry their own item, KCs and time.
pub fn candidate_probabilities(
    model: &FittedModel,
    history: &[TrialEvent],
    candidates: &[TrialEvent],
    schema: &crate::dataset::Schema,
) -> Result<Vec<(String, f64)>> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate items".into()));
    }
    let student = history.first().map(|e| e.student.clone());
    let last_time = history
        .iter()
        .map(|e| e.time)
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .map(|cand| {
            let mut next = cand.clone();
            if let Some(s) = &student {
                next.student = s.clone();
            }
            if next.time < last_time {
                next.time = last_time;
            }
            let mut evs: Vec<TrialEvent> = history.to_vec();
            evs.push(next);
            let ds = Dataset::from_events(evs, schema.clone())?;
            let p = predict(model, &ds)?;
            let id = cand.item.clone().unwrap_or_else(|| cand.kcs.join("~~"));
            Ok((id, *p.last().expect("candidate row present")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn c(v: &[(&str, f64)]) -> Vec<(String, f64)> {
        v.iter().map(|(i, p)| (i.to_string(), *p)).collect()
    }

    #[test]
    fn distance_order_and_mastery() {
        let r = rank(&c(&[("a", 0.60), ("b", 0.79), ("c", 0.95)]), 0.8, 0.95).unwrap();
        let order: Vec<_> = r.iter().map(|x| (x.item.as_str(), x.mastered)).collect();
        assert_eq!(order, [("b", false), ("c", true), ("a", false)]);
    }

    #[test]
    fn ties_break_by_item() {
        let r = rank(&c(&[("z", 0.5), ("b", 0.5), ("m", 0.5)]), 0.8, 0.95).unwrap();
        assert_eq!(
            r.iter().map(|x| x.item.as_str()).collect::<Vec<_>>(),
            ["b", "m", "z"]
        );
    }

    #[test]
    fn target_one_is_descending() {
        let r = rank(&c(&[("a", 0.2), ("b", 0.9), ("c", 0.5)]), 1.0, 0.95).unwrap();
        assert_eq!(
            r.iter().map(|x| x.p).collect::<Vec<_>>(),
            vec![0.9, 0.5, 0.2]
        );
        assert!(rank(&[], 0.8, 0.95).is_err());
    }
}
