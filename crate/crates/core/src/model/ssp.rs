use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Tolerance on the sum of an action's outcome probabilities.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// Dense index of a state inside its owning [`ExplicitSsp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for StateId {
    fn from(i: usize) -> Self {
        StateId(i as u32)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub target: StateId,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionDef {
    pub name: String,
    pub cost: f64,
    pub outcomes: Vec<Outcome>,
}

impl ActionDef {
    pub fn new(name: impl Into<String>, cost: f64, outcomes: Vec<Outcome>) -> Self {
        ActionDef {
            name: name.into(),
            cost,
            outcomes,
        }
    }

    pub fn deterministic(name: impl Into<String>, cost: f64, target: StateId) -> Self {
        Self::new(name, cost, vec![Outcome { target, prob: 1.0 }])
    }

    pub fn successors(&self) -> impl Iterator<Item = StateId> + '_ {
        self.outcomes.iter().map(|o| o.target)
    }
}

/// A fully grounded SSP: states, initial state, goals and per-state actions.
///
/// Immutable once built. Action ordinals are positions in the per-state
/// action list and are stable for the lifetime of the value. The predecessor
/// index is derived from the outcome lists at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSsp {
    names: Vec<String>,
    initial: StateId,
    goals: Vec<StateId>,
    is_goal: Vec<bool>,
    actions: Vec<Vec<ActionDef>>,
    predecessors: Vec<Vec<(StateId, usize)>>,
    penalty: Option<f64>,
}

impl ExplicitSsp {
    /// Assembles an SSP and builds its predecessor index without checking
    /// probability sums or costs; call [`ExplicitSsp::validate`] for that.
    /// Fails only on structurally unusable input (dangling indices).
    pub fn new(
        names: Vec<String>,
        initial: StateId,
        goals: impl IntoIterator<Item = StateId>,
        actions: Vec<Vec<ActionDef>>,
    ) -> Result<Self, ModelError> {
        let n = names.len();
        if actions.len() != n {
            return Err(ModelError::Shape(format!(
                "{} states but {} action lists",
                n,
                actions.len()
            )));
        }
        if initial.index() >= n {
            return Err(ModelError::UnknownState(initial.0));
        }
        let mut is_goal = vec![false; n];
        for g in goals {
            if g.index() >= n {
                return Err(ModelError::UnknownState(g.0));
            }
            is_goal[g.index()] = true;
        }
        let goals: Vec<StateId> = (0..n).filter(|&i| is_goal[i]).map(StateId::from).collect();
        let mut predecessors = vec![Vec::new(); n];
        for (s, acts) in actions.iter().enumerate() {
            for (a, act) in acts.iter().enumerate() {
                for o in &act.outcomes {
                    if o.target.index() >= n {
                        return Err(ModelError::UnknownState(o.target.0));
                    }
                    predecessors[o.target.index()].push((StateId::from(s), a));
                }
            }
        }
        for p in &mut predecessors {
            p.sort_unstable();
            p.dedup();
        }
        Ok(ExplicitSsp {
            names,
            initial,
            goals,
            is_goal,
            actions,
            predecessors,
            penalty: None,
        })
    }

    /// Like [`ExplicitSsp::new`] but rejects any instance that fails
    /// [`ExplicitSsp::validate`].
    pub fn checked(
        names: Vec<String>,
        initial: StateId,
        goals: impl IntoIterator<Item = StateId>,
        actions: Vec<Vec<ActionDef>>,
    ) -> Result<Self, ModelError> {
        let ssp = Self::new(names, initial, goals, actions)?;
        let report = ssp.validate();
        if report.is_valid() {
            Ok(ssp)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.names.len()).map(StateId::from)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn goals(&self) -> &[StateId] {
        &self.goals
    }

    #[inline]
    pub fn is_goal(&self, s: StateId) -> bool {
        self.is_goal[s.index()]
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name).map(StateId::from)
    }

    #[inline]
    pub fn actions(&self, s: StateId) -> &[ActionDef] {
        &self.actions[s.index()]
    }

    #[inline]
    pub fn num_actions(&self, s: StateId) -> usize {
        self.actions[s.index()].len()
    }

    pub fn action(&self, s: StateId, ordinal: usize) -> Result<&ActionDef, ModelError> {
        self.actions
            .get(s.index())
            .ok_or(ModelError::UnknownState(s.0))?
            .get(ordinal)
            .ok_or(ModelError::UnknownAction { state: s, ordinal })
    }

    pub fn total_actions(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    /// Every `(s', a')` with `s` among the outcome targets of `a'` in `s'`.
    pub fn predecessors(&self, s: StateId) -> &[(StateId, usize)] {
        &self.predecessors[s.index()]
    }

    /// Penalty of the give-up action, when this SSP came out of
    /// [`ExplicitSsp::apply_fixed_penalty`].
    pub fn penalty(&self) -> Option<f64> {
        self.penalty
    }

    /// Non-goal states without any applicable action.
    pub fn dead_ends(&self) -> Vec<StateId> {
        self.states()
            .filter(|&s| !self.is_goal(s) && self.actions(s).is_empty())
            .collect()
    }

    /// Adds a deterministic give-up action of cost `penalty` to every
    /// non-goal state. It targets the first goal by id and is always the
    /// last ordinal, so existing ordinals are untouched.
    pub fn apply_fixed_penalty(&self, penalty: f64) -> Result<ExplicitSsp, ModelError> {
        if !(penalty > 0.0) || !penalty.is_finite() {
            return Err(ModelError::Penalty(penalty));
        }
        let sink = *self.goals.first().ok_or(ModelError::NoGoals)?;
        let mut actions = self.actions.clone();
        for (i, acts) in actions.iter_mut().enumerate() {
            if !self.is_goal[i] {
                acts.push(ActionDef::deterministic(GIVE_UP, penalty, sink));
            }
        }
        let mut out = ExplicitSsp::new(
            self.names.clone(),
            self.initial,
            self.goals.iter().copied(),
            actions,
        )?;
        out.penalty = Some(penalty);
        Ok(out)
    }

    /// Checks every structural invariant and reports each violation with
    /// its location.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if self.goals.is_empty() {
            issues.push(Issue::NoGoals);
        }
        for s in self.states() {
            let acts = self.actions(s);
            if self.is_goal(s) {
                if !acts.is_empty() {
                    issues.push(Issue::GoalHasActions { state: s });
                }
                continue;
            }
            if acts.is_empty() {
                issues.push(Issue::DeadEnd { state: s });
            }
            for (a, act) in acts.iter().enumerate() {
                if !(act.cost > 0.0) || !act.cost.is_finite() {
                    issues.push(Issue::NonPositiveCost {
                        state: s,
                        ordinal: a,
                        cost: act.cost,
                    });
                }
                if act.outcomes.is_empty() {
                    issues.push(Issue::NoOutcomes { state: s, ordinal: a });
                    continue;
                }
                let mut sum = 0.0;
                for (k, o) in act.outcomes.iter().enumerate() {
                    if !(o.prob > 0.0 && o.prob <= 1.0) {
                        issues.push(Issue::BadProbability {
                            state: s,
                            ordinal: a,
                            prob: o.prob,
                        });
                    }
                    if act.outcomes[..k].iter().any(|p| p.target == o.target) {
                        issues.push(Issue::DuplicateTarget {
                            state: s,
                            ordinal: a,
                            target: o.target,
                        });
                    }
                    sum += o.prob;
                }
                if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                    issues.push(Issue::ProbabilitySum {
                        state: s,
                        ordinal: a,
                        sum,
                    });
                }
            }
        }
        // predecessor index must be the exact inverse of the outcome relation
        let mut outcome_entries = 0usize;
        for s in self.states() {
            for (a, act) in self.actions(s).iter().enumerate() {
                for t in act.successors() {
                    if act.successors().filter(|&u| u == t).count() == 1 {
                        outcome_entries += 1;
                    }
                    if !self.predecessors(t).contains(&(s, a)) {
                        issues.push(Issue::PredecessorIndex { state: t });
                    }
                }
            }
        }
        let pred_entries: usize = self.predecessors.iter().map(Vec::len).sum();
        let has_duplicates = issues
            .iter()
            .any(|i| matches!(i, Issue::DuplicateTarget { .. }));
        if pred_entries != outcome_entries && !has_duplicates {
            issues.push(Issue::PredecessorCount {
                predecessors: pred_entries,
                outcomes: outcome_entries,
            });
        }
        ValidationReport { issues }
    }
}

/// Name of the action added by [`ExplicitSsp::apply_fixed_penalty`].
pub const GIVE_UP: &str = "give-up";

#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    NoGoals,
    GoalHasActions { state: StateId },
    DeadEnd { state: StateId },
    NonPositiveCost { state: StateId, ordinal: usize, cost: f64 },
    NoOutcomes { state: StateId, ordinal: usize },
    BadProbability { state: StateId, ordinal: usize, prob: f64 },
    DuplicateTarget { state: StateId, ordinal: usize, target: StateId },
    ProbabilitySum { state: StateId, ordinal: usize, sum: f64 },
    PredecessorIndex { state: StateId },
    PredecessorCount { predecessors: usize, outcomes: usize },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NoGoals => write!(f, "goal set is empty"),
            Issue::GoalHasActions { state } => write!(f, "goal {state} has actions"),
            Issue::DeadEnd { state } => write!(f, "non-goal state {state} has no actions"),
            Issue::NonPositiveCost { state, ordinal, cost } => {
                write!(f, "state {state} action {ordinal}: cost {cost} is not positive")
            }
            Issue::NoOutcomes { state, ordinal } => {
                write!(f, "state {state} action {ordinal}: no outcomes")
            }
            Issue::BadProbability { state, ordinal, prob } => {
                write!(f, "state {state} action {ordinal}: probability {prob} outside (0, 1]")
            }
            Issue::DuplicateTarget { state, ordinal, target } => {
                write!(f, "state {state} action {ordinal}: duplicate target {target}")
            }
            Issue::ProbabilitySum { state, ordinal, sum } => {
                write!(f, "state {state} action {ordinal}: probabilities sum to {sum}")
            }
            Issue::PredecessorIndex { state } => {
                write!(f, "predecessor index of {state} is inconsistent")
            }
            Issue::PredecessorCount { predecessors, outcomes } => write!(
                f,
                "{predecessors} predecessor entries for {outcomes} outcome entries"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    /// Valid apart from dead ends, which the fixed-penalty transform removes.
    pub fn is_valid(&self) -> bool {
        self.issues
            .iter()
            .all(|i| matches!(i, Issue::DeadEnd { .. }))
    }

    pub fn is_dead_end_free(&self) -> bool {
        !self.issues.iter().any(|i| matches!(i, Issue::DeadEnd { .. }))
    }

    pub fn dead_ends(&self) -> usize {
        self.issues
            .iter()
            .filter(|i| matches!(i, Issue::DeadEnd { .. }))
            .count()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::fig2_example;

    fn tiny(outcomes: Vec<Outcome>, cost: f64) -> ExplicitSsp {
        ExplicitSsp::new(
            vec!["s".into(), "g".into(), "h".into()],
            StateId(0),
            [StateId(1)],
            vec![vec![ActionDef::new("a", cost, outcomes)], vec![], vec![]],
        )
        .unwrap()
    }

    #[test]
    fn fig2_fixture_is_valid() {
        let (ssp, _) = fig2_example();
        let report = ssp.validate();
        assert!(report.issues.is_empty(), "{report}");
    }

    #[test]
    fn probability_sum_violation_is_reported() {
        let ssp = tiny(
            vec![
                Outcome { target: StateId(1), prob: 0.5 },
                Outcome { target: StateId(2), prob: 0.6 },
            ],
            1.0,
        );
        let report = ssp.validate();
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, Issue::ProbabilitySum { state: StateId(0), ordinal: 0, .. })));
        assert!(!report.is_valid());
    }

    #[test]
    fn zero_cost_is_reported() {
        let ssp = tiny(vec![Outcome { target: StateId(1), prob: 1.0 }], 0.0);
        let report = ssp.validate();
        assert!(report
            .issues
            .contains(&Issue::NonPositiveCost { state: StateId(0), ordinal: 0, cost: 0.0 }));
    }

    #[test]
    fn goal_with_actions_and_empty_goals_are_reported() {
        let ssp = ExplicitSsp::new(
            vec!["s".into(), "g".into()],
            StateId(0),
            [StateId(1)],
            vec![
                vec![ActionDef::deterministic("a", 1.0, StateId(1))],
                vec![ActionDef::deterministic("b", 1.0, StateId(0))],
            ],
        )
        .unwrap();
        assert!(ssp
            .validate()
            .issues
            .contains(&Issue::GoalHasActions { state: StateId(1) }));

        let no_goals = ExplicitSsp::new(vec!["s".into()], StateId(0), [], vec![vec![]]).unwrap();
        assert!(no_goals.validate().issues.contains(&Issue::NoGoals));
    }

    #[test]
    fn dangling_target_is_rejected_at_construction() {
        let err = ExplicitSsp::new(
            vec!["s".into(), "g".into()],
            StateId(0),
            [StateId(1)],
            vec![vec![ActionDef::deterministic("a", 1.0, StateId(7))], vec![]],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownState(7)));
    }

    #[test]
    fn predecessors_of_fig2() {
        let (ssp, _) = fig2_example();
        let s1 = ssp.state_by_name("s1").unwrap();
        let s2 = ssp.state_by_name("s2").unwrap();
        assert_eq!(ssp.predecessors(s2), &[(s1, 0)]);
        assert!(ssp.predecessors(ssp.initial()).is_empty());
    }

    #[test]
    fn fixed_penalty_appends_give_up_last() {
        let (ssp, _) = fig2_example();
        let t = ssp.apply_fixed_penalty(500.0).unwrap();
        for s in ssp.states() {
            if ssp.is_goal(s) {
                assert!(t.actions(s).is_empty());
                continue;
            }
            let n = ssp.num_actions(s);
            assert_eq!(t.num_actions(s), n + 1);
            assert_eq!(&t.actions(s)[..n], ssp.actions(s));
            let give_up = &t.actions(s)[n];
            assert_eq!(give_up.name, GIVE_UP);
            assert_eq!(give_up.cost, 500.0);
            assert_eq!(give_up.outcomes, vec![Outcome { target: ssp.goals()[0], prob: 1.0 }]);
        }
        assert_eq!(t.penalty(), Some(500.0));
        assert!(t.validate().issues.is_empty());
    }

    #[test]
    fn fixed_penalty_rejects_non_positive() {
        let (ssp, _) = fig2_example();
        assert!(matches!(ssp.apply_fixed_penalty(0.0), Err(ModelError::Penalty(_))));
        assert!(matches!(ssp.apply_fixed_penalty(-3.0), Err(ModelError::Penalty(_))));
    }
}
