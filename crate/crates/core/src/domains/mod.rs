//! Instance sources: Triangle Tire World, grounded JSON files, a small
//! hand-built fixture and seeded random layered SSPs.

mod grounded;
mod random;
mod selector;
mod tw;

use thiserror::Error;

use crate::model::{ActionDef, ExplicitSsp, ModelError, StateId};

pub use grounded::{parse_grounded, read_grounded, serialize_grounded, write_grounded};
pub use random::{random_layered_ssp, RandomConfig};
pub use selector::{LoadedProblem, ProblemSelector};
pub use tw::{generate_tw, generate_tw_states, has_spare, road_edges, Location, TwConfig, TwState, MAX_SIZE};

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{at}: {message}")]
    Schema { at: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl DomainError {
    fn schema(at: impl Into<String>, message: impl Into<String>) -> Self {
        DomainError::Schema {
            at: at.into(),
            message: message.into(),
        }
    }
}

/// Five-state example on which constraint generation lowers values:
///
/// ```text
/// s0 -a0-> s1 -a1--> s2 -a2(3)-> g
///             -a1'-> s3 -a3(2)-> g
/// ```
///
/// All actions are deterministic with cost 1 unless marked. Returns the SSP
/// and its bundled heuristic `{s0: 3, s1: 2, s2: 1, s3: 2, g: 0}`, which
/// tempts a search into `a1` before `a1'` turns out cheaper.
pub fn fig2_example() -> (ExplicitSsp, Vec<f64>) {
    let names = ["s0", "s1", "s2", "s3", "g"].map(String::from).to_vec();
    let [s1, s2, s3, g] = [1, 2, 3, 4].map(StateId);
    let actions = vec![
        vec![ActionDef::deterministic("a0", 1.0, s1)],
        vec![
            ActionDef::deterministic("a1", 1.0, s2),
            ActionDef::deterministic("a1'", 1.0, s3),
        ],
        vec![ActionDef::deterministic("a2", 3.0, g)],
        vec![ActionDef::deterministic("a3", 2.0, g)],
        vec![],
    ];
    let ssp = ExplicitSsp::checked(names, StateId(0), [g], actions)
        .expect("fixture is well formed");
    (ssp, vec![3.0, 2.0, 1.0, 2.0, 0.0])
}
