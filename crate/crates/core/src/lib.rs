//! Logistic knowledge tracing.
//!
//! Learner models are written as sums of terms, each a feature of a learner's
//! prior history computed over the levels of a component column (student, KC,
//! item, or any grouping column). A model is fit as a logistic regression whose
//! nonlinear feature parameters are optimized in an outer simplex loop.
//!
//! The crate is `no_std` with `alloc`; file formats, threading and the command
//! line live in the companion `lkt` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cv;
pub mod dataset;
pub mod design;
mod error;
pub mod features;
pub mod filter;
pub mod glm;
mod linalg;
pub mod math;
pub mod metrics;
pub mod model;
pub mod recommend;
pub mod simplex;
pub mod simulate;
pub mod spec;
pub mod stats;

pub use cv::{split_half_cv, CvConfig, CvReport};
pub use dataset::{Dataset, Schema, TrialEvent};
pub use design::{ColumnKey, ColumnMap, DesignMatrix, DesignPlan};
pub use error::{Error, Result};
pub use features::{ComponentState, FeatureKind};
pub use filter::{filter_pipeline, FilterConfig, FilterLog};
pub use glm::{fit_glm, GlmFit, GlmOptions};
pub use model::{optimize_nonlinear, predict, FitConfig, FittedModel};
pub use spec::{parse_model, Component, ModelSpec, Scope, Term, ValidatedSpec};
