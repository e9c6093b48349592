//! Post-hoc checks of a solver's output. Everything here recomputes
//! Q-values from the raw model and never touches solver counters.

use std::fmt;

use super::{ActionScope, ExplicitSsp, PartialSsp, StateId, ValueFunction};

fn q(ssp: &ExplicitSsp, value: &dyn Fn(StateId) -> f64, s: StateId, a: usize) -> f64 {
    let act = &ssp.actions(s)[a];
    act.cost
        + act
            .outcomes
            .iter()
            .map(|o| o.prob * value(o.target))
            .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConsistencyViolation {
    /// Residual above ε at an envelope state.
    Residual { state: StateId, residual: f64 },
    /// The greedy policy reaches a non-goal state with no scoped action or an
    /// artificial goal, so it is not closed w.r.t. `s0`.
    OpenLeaf { state: StateId },
}

impl fmt::Display for ConsistencyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConsistencyViolation::Residual { state, residual } => {
                write!(f, "residual {residual:e} at {state}")
            }
            ConsistencyViolation::OpenLeaf { state } => {
                write!(f, "greedy policy reaches non-goal leaf {state}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub epsilon: f64,
    pub envelope_size: usize,
    pub max_residual: f64,
    pub first_violation: Option<ConsistencyViolation>,
    pub violations: usize,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_violation {
            None => write!(
                f,
                "pass ({} envelope states, max residual {:.3e} <= {:e})",
                self.envelope_size, self.max_residual, self.epsilon
            ),
            Some(v) => write!(f, "FAIL ({} violations; first: {v})", self.violations),
        }
    }
}

/// Re-derives the greedy envelope of `V` from `s0` over `scope` and checks
/// that every state on it has residual at most `epsilon` and that every leaf
/// is a real goal.
pub fn verify_epsilon_consistency<S: ActionScope + ?Sized>(
    scope: &S,
    values: &ValueFunction<'_>,
    epsilon: f64,
) -> ConsistencyReport {
    let ssp = scope.base();
    let value = |s: StateId| values.peek(s);
    let mut report = ConsistencyReport {
        epsilon,
        envelope_size: 0,
        max_residual: 0.0,
        first_violation: None,
        violations: 0,
    };
    let note = |report: &mut ConsistencyReport, v: ConsistencyViolation| {
        report.violations += 1;
        if report.first_violation.is_none() {
            report.first_violation = Some(v);
        }
    };
    let mut seen = vec![false; ssp.num_states()];
    let mut frontier = vec![ssp.initial()];
    seen[ssp.initial().index()] = true;
    while let Some(s) = frontier.pop() {
        if ssp.is_goal(s) {
            continue;
        }
        report.envelope_size += 1;
        let actions: Vec<usize> = if scope.is_terminal(s) {
            Vec::new()
        } else {
            scope.scoped_actions(s).collect()
        };
        if actions.is_empty() {
            note(&mut report, ConsistencyViolation::OpenLeaf { state: s });
            continue;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        for a in actions {
            let qa = q(ssp, &value, s, a);
            if qa < best.0 {
                best = (qa, a);
            }
        }
        let residual = (value(s) - best.0).abs();
        report.max_residual = report.max_residual.max(residual);
        if residual > epsilon {
            note(&mut report, ConsistencyViolation::Residual { state: s, residual });
        }
        for o in &ssp.actions(s)[best.1].outcomes {
            if !seen[o.target.index()] {
                seen[o.target.index()] = true;
                frontier.push(o.target);
            }
        }
    }
    report
}

/// A pair whose constraint `V(s) ≤ Q(s,a) + ε` fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintViolation {
    pub state: StateId,
    pub ordinal: usize,
    pub value: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub epsilon: f64,
    pub pairs_checked: usize,
    pub violations: Vec<ConstraintViolation>,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ClosureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violations.first() {
            None => write!(f, "pass ({} pairs checked)", self.pairs_checked),
            Some(v) => write!(
                f,
                "FAIL ({} violations; first: V({})={} > Q(.,{})={} + eps)",
                self.violations.len(),
                v.state,
                v.value,
                v.ordinal,
                v.q
            ),
        }
    }
}

/// Full scan over every regular state of the partial SSP and every action
/// applicable to it in the base SSP (not only the partial ones), looking for
/// `V(s) > Q(s,a) + ε`.
pub fn verify_constraint_closure(
    partial: &PartialSsp<'_>,
    values: &ValueFunction<'_>,
    epsilon: f64,
) -> ClosureReport {
    let ssp = partial.base_ssp();
    let value = |s: StateId| values.peek(s);
    let mut report = ClosureReport {
        epsilon,
        pairs_checked: 0,
        violations: Vec::new(),
    };
    for &s in partial.states() {
        if !partial.is_interior(s) {
            continue;
        }
        let vs = value(s);
        for a in 0..ssp.num_actions(s) {
            report.pairs_checked += 1;
            let qa = q(ssp, &value, s, a);
            if vs > qa + epsilon {
                report.violations.push(ConstraintViolation {
                    state: s,
                    ordinal: a,
                    value: vs,
                    q: qa,
                });
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpReport {
    pub epsilon: f64,
    /// Constraints `V(s) ≤ Q(s,a) + ε` (and `V(g) ≤ ε`) that fail.
    pub infeasible: Vec<ConstraintViolation>,
    /// Greedy-envelope states where no constraint is within ε of tight.
    pub slack_states: Vec<StateId>,
    pub envelope_size: usize,
}

impl LpReport {
    pub fn feasible(&self) -> bool {
        self.infeasible.is_empty()
    }

    pub fn tight(&self) -> bool {
        self.slack_states.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.feasible() && self.tight()
    }
}

impl fmt::Display for LpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(
                f,
                "pass (feasible; tight on all {} envelope states)",
                self.envelope_size
            );
        }
        write!(f, "FAIL (")?;
        if let Some(v) = self.infeasible.first() {
            write!(
                f,
                "{} infeasible constraints, first V({})={} > Q(.,{})={}",
                self.infeasible.len(),
                v.state,
                v.value,
                v.ordinal,
                v.q
            )?;
        } else {
            write!(f, "feasible")?;
        }
        if let Some(s) = self.slack_states.first() {
            write!(
                f,
                "; slack certificate: {} envelope states without a tight constraint, first {s}",
                self.slack_states.len()
            )?;
        }
        write!(f, ")")
    }
}

/// Checks a full-state value vector against the value-iteration LP:
/// feasibility of every constraint within ε, and at least one tight
/// constraint at each state of the greedy envelope from `s0`.
pub fn verify_lp_certificate(ssp: &ExplicitSsp, values: &[f64], epsilon: f64) -> LpReport {
    assert_eq!(values.len(), ssp.num_states(), "one value per state");
    let value = |s: StateId| values[s.index()];
    let mut report = LpReport {
        epsilon,
        infeasible: Vec::new(),
        slack_states: Vec::new(),
        envelope_size: 0,
    };
    for s in ssp.states() {
        if ssp.is_goal(s) {
            if value(s) > epsilon {
                report.infeasible.push(ConstraintViolation {
                    state: s,
                    ordinal: usize::MAX,
                    value: value(s),
                    q: 0.0,
                });
            }
            continue;
        }
        for a in 0..ssp.num_actions(s) {
            let qa = q(ssp, &value, s, a);
            if value(s) > qa + epsilon {
                report.infeasible.push(ConstraintViolation {
                    state: s,
                    ordinal: a,
                    value: value(s),
                    q: qa,
                });
            }
        }
    }
    let mut seen = vec![false; ssp.num_states()];
    let mut frontier = vec![ssp.initial()];
    seen[ssp.initial().index()] = true;
    while let Some(s) = frontier.pop() {
        if ssp.is_goal(s) || ssp.num_actions(s) == 0 {
            continue;
        }
        report.envelope_size += 1;
        let mut best = (f64::INFINITY, 0usize);
        let mut tight = false;
        for a in 0..ssp.num_actions(s) {
            let qa = q(ssp, &value, s, a);
            if (value(s) - qa).abs() <= epsilon {
                tight = true;
            }
            if qa < best.0 {
                best = (qa, a);
            }
        }
        if !tight {
            report.slack_states.push(s);
        }
        for o in &ssp.actions(s)[best.1].outcomes {
            if !seen[o.target.index()] {
                seen[o.target.index()] = true;
                frontier.push(o.target);
            }
        }
    }
    report
}
