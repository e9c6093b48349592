use crate::heuristics::Heuristic;

use super::{ExplicitSsp, StateId};

/// A per-state change to `V`, recorded by the value log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueChange {
    pub state: StateId,
    pub from: f64,
    pub to: f64,
}

/// Records every strict decrease of a state's value.
///
/// A decrease is only counted when it exceeds `1e-9 · max(1, |from|)`, so
/// that rounding in probability-weighted sums is not mistaken for one.
#[derive(Debug, Clone, Default)]
pub struct ValueLog {
    pub updates: u64,
    pub decreases: Vec<ValueChange>,
}

impl ValueLog {
    const SLACK: f64 = 1e-9;

    fn record(&mut self, change: ValueChange) {
        self.updates += 1;
        if change.to < change.from - Self::SLACK * change.from.abs().max(1.0) {
            self.decreases.push(change);
        }
    }
}

/// Cost-to-go estimates, materialised from the heuristic on first read.
///
/// Real goals always read as 0 and never consult the heuristic.
#[derive(Debug, Clone)]
pub struct ValueFunction<'a> {
    ssp: &'a ExplicitSsp,
    heuristic: &'a Heuristic,
    values: Vec<f64>,
    initialized: Vec<bool>,
    heuristic_calls: u64,
    log: Option<ValueLog>,
}

impl<'a> ValueFunction<'a> {
    pub fn new(ssp: &'a ExplicitSsp, heuristic: &'a Heuristic) -> Self {
        let n = ssp.num_states();
        ValueFunction {
            ssp,
            heuristic,
            values: vec![0.0; n],
            initialized: vec![false; n],
            heuristic_calls: 0,
            log: None,
        }
    }

    /// Starts recording value changes.
    pub fn watch(&mut self) {
        self.log.get_or_insert_with(ValueLog::default);
    }

    pub fn log(&self) -> Option<&ValueLog> {
        self.log.as_ref()
    }

    pub fn heuristic(&self) -> &'a Heuristic {
        self.heuristic
    }

    /// Number of distinct states initialised from the heuristic.
    pub fn heuristic_calls(&self) -> u64 {
        self.heuristic_calls
    }

    #[inline]
    pub fn get(&mut self, s: StateId) -> f64 {
        let i = s.index();
        if !self.initialized[i] {
            self.initialized[i] = true;
            self.values[i] = if self.ssp.is_goal(s) {
                0.0
            } else {
                self.heuristic_calls += 1;
                self.heuristic.value(s)
            };
        }
        self.values[i]
    }

    /// Current value without side effects: the stored value, or what the
    /// heuristic would give for a state not yet read.
    #[inline]
    pub fn peek(&self, s: StateId) -> f64 {
        let i = s.index();
        if self.initialized[i] {
            self.values[i]
        } else if self.ssp.is_goal(s) {
            0.0
        } else {
            self.heuristic.value(s)
        }
    }

    pub fn is_initialized(&self, s: StateId) -> bool {
        self.initialized[s.index()]
    }

    pub fn set(&mut self, s: StateId, v: f64) {
        debug_assert!(!self.ssp.is_goal(s), "goal values are pinned at 0");
        let from = self.get(s);
        self.values[s.index()] = v;
        if let Some(log) = self.log.as_mut() {
            log.record(ValueChange { state: s, from, to: v });
        }
    }

    /// Snapshot of every state's value as [`ValueFunction::peek`] sees it.
    pub fn to_vec(&self) -> Vec<f64> {
        self.ssp.states().map(|s| self.peek(s)).collect()
    }

    pub fn initialized_count(&self) -> usize {
        self.initialized.iter().filter(|&&b| b).count()
    }
}
