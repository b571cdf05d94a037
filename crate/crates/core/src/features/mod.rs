//! Learner-history features and the per-level state that feeds them.

mod eval;
mod kind;
mod state;

pub use eval::evaluate;
pub use kind::{FeatureKind, ParamDef};
pub use state::{
    ComponentState, DecayedCounts, Moment, Opportunity, SequencingError, SessionClock,
};

#[cfg(test)]
mod tests;
