//! Grounded SSPs, partial SSPs, value functions and Bellman backups.

mod bellman;
pub mod certify;
mod partial;
mod ssp;
mod value;

use thiserror::Error;

pub use bellman::{traverse, traverse_policy, BackupResult, Counters, Envelope, Evaluator, Policy};
pub use certify::{
    verify_constraint_closure, verify_epsilon_consistency, verify_lp_certificate, ClosureReport,
    ConsistencyReport, LpReport,
};
pub use partial::{ActionScope, Actions, PartialSsp};
pub use ssp::{
    ActionDef, ExplicitSsp, Issue, Outcome, StateId, ValidationReport, GIVE_UP,
    PROBABILITY_SUM_TOLERANCE,
};
pub use value::{ValueChange, ValueFunction, ValueLog};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown state #{0}")]
    UnknownState(u32),
    #[error("state {state} has no action with ordinal {ordinal}")]
    UnknownAction { state: StateId, ordinal: usize },
    #[error("state {0} has no action to back up")]
    NoActions(StateId),
    #[error("fixed penalty must be positive and finite, got {0}")]
    Penalty(f64),
    #[error("the SSP has no goal states")]
    NoGoals,
    #[error("malformed SSP: {0}")]
    Shape(String),
    #[error("invalid SSP: {0}")]
    Invalid(ValidationReport),
    #[error("contract violation: {0}")]
    Contract(String),
}
