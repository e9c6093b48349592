//! Value iteration, iLAO*, constraint-generation iLAO* and LRTDP.
//!
//! All four share the model layer: an [`Evaluator`] that owns the value
//! function and counts every Q-value it computes. A run is sequential and
//! owns all of its mutable state, so distinct runs over the same SSP may
//! proceed in parallel.

mod lao;
mod lrtdp;
mod vi;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::heuristics::Heuristic;
use crate::model::{
    ClosureReport, ConsistencyReport, Counters, ExplicitSsp, ModelError, PartialSsp, StateId,
    ValueFunction,
};

pub use lao::{
    cg_ilao_solve, ilao_solve, snapshot_policy, FixRecord, IterationTrace, ViolationSet,
};
pub use lrtdp::lrtdp_solve;
pub use vi::{optimal_values, vi_solve};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("{count} non-goal states have no actions (first {first}); apply the fixed-penalty transform")]
    DeadEnds { count: usize, first: StateId },
    #[error("value iteration exceeded {0} sweeps")]
    SweepCap(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// Penalty of the give-up action; used by callers that transform the
    /// SSP, not by the solvers themselves.
    pub penalty: f64,
    pub seed: u64,
    pub max_wall_time: Option<Duration>,
    /// Outer iterations (LAO family), sweeps (VI) or trials (LRTDP).
    pub iteration_cap: u64,
    /// Keep a per-iteration record of expansions, values and `Γ`.
    pub record_trace: bool,
    /// Log every strict decrease of a state value.
    pub watch_values: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-4,
            penalty: 500.0,
            seed: 0,
            max_wall_time: None,
            iteration_cap: 10_000_000,
            record_trace: false,
            watch_values: false,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn watching_values(mut self) -> Self {
        self.watch_values = true;
        self
    }

    pub fn with_timeout(mut self, limit: Duration) -> Self {
        self.max_wall_time = Some(limit);
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.epsilon > 0.0) {
            return Err(SolverError::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.penalty > 0.0) {
            return Err(SolverError::Config(format!(
                "penalty must be positive, got {}",
                self.penalty
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Vi,
    Ilao,
    CgIlao,
    Lrtdp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Vi,
        Algorithm::Ilao,
        Algorithm::CgIlao,
        Algorithm::Lrtdp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Vi => "vi",
            Algorithm::Ilao => "ilao",
            Algorithm::CgIlao => "cg-ilao",
            Algorithm::Lrtdp => "lrtdp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected vi, ilao, cg-ilao or lrtdp)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    Timeout,
    IterationCap,
    /// An LRTDP trial exceeded its depth cap.
    DepthCap,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::Converged => "converged",
            Termination::Timeout => "timeout",
            Termination::IterationCap => "iteration cap",
            Termination::DepthCap => "trial depth cap",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult<'a> {
    pub algorithm: Algorithm,
    pub values: ValueFunction<'a>,
    /// Final partial SSP; only the LAO family builds one.
    pub partial: Option<PartialSsp<'a>>,
    pub v_s0: f64,
    pub counters: Counters,
    pub iterations: u64,
    pub termination: Termination,
    /// ε-consistency of the final value function.
    pub consistency: ConsistencyReport,
    /// Full scan for `V(s) > Q(s,a) + ε` over the final partial SSP.
    pub closure: Option<ClosureReport>,
    /// `Σ|Â(s)|` over the states the run considered.
    pub partial_actions: usize,
    /// `Σ|A(s)|` over the same states.
    pub potential_actions: usize,
    pub trace: Vec<IterationTrace>,
    pub elapsed: Duration,
}

impl SolveResult<'_> {
    pub fn solved(&self) -> bool {
        self.termination == Termination::Converged && self.consistency.passed()
    }

    pub fn heuristic_calls(&self) -> u64 {
        self.values.heuristic_calls()
    }

    /// Strict per-state value decreases, when the run watched values.
    pub fn value_decreases(&self) -> Option<usize> {
        self.values.log().map(|l| l.decreases.len())
    }
}

/// Runs `algorithm` on `ssp`.
pub fn solve<'a>(
    algorithm: Algorithm,
    ssp: &'a ExplicitSsp,
    heuristic: &'a Heuristic,
    cfg: &SolverConfig,
) -> Result<SolveResult<'a>, SolverError> {
    match algorithm {
        Algorithm::Vi => vi_solve(ssp, heuristic, cfg),
        Algorithm::Ilao => ilao_solve(ssp, heuristic, cfg),
        Algorithm::CgIlao => cg_ilao_solve(ssp, heuristic, cfg),
        Algorithm::Lrtdp => lrtdp_solve(ssp, heuristic, cfg),
    }
}

fn prepare(ssp: &ExplicitSsp, heuristic: &Heuristic, cfg: &SolverConfig) -> Result<(), SolverError> {
    cfg.validate()?;
    heuristic
        .check_size(ssp)
        .map_err(|e| SolverError::Config(e.to_string()))?;
    let dead = ssp.dead_ends();
    if let Some(&first) = dead.first() {
        return Err(SolverError::DeadEnds {
            count: dead.len(),
            first,
        });
    }
    Ok(())
}

/// Cooperative wall-clock limit.
#[derive(Debug, Clone, Copy)]
struct Clock {
    start: Instant,
    deadline: Option<Instant>,
}

impl Clock {
    fn start(limit: Option<Duration>) -> Self {
        let start = Instant::now();
        Clock {
            start,
            deadline: limit.map(|d| start + d),
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}
