use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{Component, ModelSpec};
use crate::dataset::{Dataset, TrialEvent};
use crate::features::FeatureKind;
use crate::{Error, Result};

/// A spec checked against a dataset's schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSpec {
    pub spec: ModelSpec,
    /// Distinct levels per term, for terms that fit per-level coefficients.
    pub level_counts: Vec<Option<usize>>,
}

impl ValidatedSpec {
    /// Coefficients the design will carry (per-level columns, one per shared
    /// term, plus the implicit global intercept when the spec has none).
    pub fn planned_coefficients(&self) -> usize {
        let terms: usize = self.level_counts.iter().map(|c| c.unwrap_or(1)).sum();
        terms + usize::from(!self.spec.has_intercept())
    }
}

/// Levels of `component` on one event.
pub(crate) fn event_levels<'e>(component: &Component, ev: &'e TrialEvent) -> Vec<&'e str> {
    match component {
        Component::Student => alloc::vec![ev.student.as_str()],
        Component::Kc => ev.kcs.iter().map(|k| k.as_str()).collect(),
        Component::Item => ev.item.as_deref().into_iter().collect(),
        Component::Column(c) => ev
            .extra
            .get(c)
            .map(|v| v.as_str())
            .filter(|v| !v.is_empty())
            .into_iter()
            .collect(),
    }
}

pub(crate) fn check_component(component: &Component, ds: &Dataset) -> Result<()> {
    let present = match component {
        Component::Student => true,
        Component::Kc => ds.schema.kc,
        Component::Item => ds.schema.item,
        Component::Column(c) => ds.has_column(c),
    };
    if present {
        Ok(())
    } else {
        Err(Error::MissingColumn(component.name().to_string()))
    }
}

pub fn validate(spec: &ModelSpec, ds: &Dataset) -> Result<ValidatedSpec> {
    let mut level_counts = Vec::with_capacity(spec.terms.len());
    for term in &spec.terms {
        check_component(&term.component, ds)?;
        if term.feature == FeatureKind::Numeric {
            let column = term.component.name();
            for ev in ds.events() {
                let raw = ev.extra.get(column).map(|s| s.trim()).unwrap_or("");
                if !raw.parse::<f64>().is_ok_and(f64::is_finite) {
                    return Err(Error::NonNumeric {
                        column: column.to_string(),
                        value: raw.to_string(),
                    });
                }
            }
        }
        if term.has_levels() {
            let mut levels = BTreeSet::new();
            for ev in ds.events() {
                levels.extend(event_levels(&term.component, ev));
            }
            level_counts.push(Some(levels.len()));
        } else {
            level_counts.push(None);
        }
    }
    Ok(ValidatedSpec {
        spec: spec.clone(),
        level_counts,
    })
}
