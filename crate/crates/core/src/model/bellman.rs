use std::collections::HashMap;

use super::{ActionScope, ExplicitSsp, ModelError, StateId, ValueFunction};

/// Work counters for one solver run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub q_values: u64,
    /// Q-values computed by constraint-violation guards (subset of `q_values`).
    pub q_guard: u64,
    pub backups: u64,
    pub expansions: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackupResult {
    pub q_min: f64,
    pub residual: f64,
    /// Ordinals attaining `q_min` exactly, ascending.
    pub argmin: Vec<usize>,
}

impl BackupResult {
    /// Lowest-ordinal member of the argmin set.
    pub fn greedy(&self) -> usize {
        self.argmin[0]
    }
}

/// Greedy policy over some set of states: state → action ordinal.
pub type Policy = HashMap<StateId, usize>;

/// A value function paired with the counters charged for reading it.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    pub ssp: &'a ExplicitSsp,
    pub values: ValueFunction<'a>,
    pub counters: Counters,
}

impl<'a> Evaluator<'a> {
    pub fn new(values: ValueFunction<'a>, ssp: &'a ExplicitSsp) -> Self {
        Evaluator {
            ssp,
            values,
            counters: Counters::default(),
        }
    }

    /// `C(s,a) + Σ P(s'|s,a)·V(s')`, counted once.
    pub fn q_value(&mut self, s: StateId, a: usize) -> Result<f64, ModelError> {
        let act = self.ssp.action(s, a)?;
        self.counters.q_values += 1;
        let mut q = act.cost;
        for o in &act.outcomes {
            q += o.prob * self.values.get(o.target);
        }
        Ok(q)
    }

    /// Minimum Q-value over the scoped actions of `s`. Does not assign `V(s)`.
    pub fn backup<S: ActionScope + ?Sized>(
        &mut self,
        scope: &S,
        s: StateId,
    ) -> Result<BackupResult, ModelError> {
        let mut q_min = f64::INFINITY;
        let mut argmin = Vec::new();
        for a in scope.scoped_actions(s) {
            let q = self.q_value(s, a)?;
            if q < q_min {
                q_min = q;
                argmin.clear();
                argmin.push(a);
            } else if q == q_min {
                argmin.push(a);
            }
        }
        if argmin.is_empty() {
            return Err(ModelError::NoActions(s));
        }
        self.counters.backups += 1;
        let residual = (self.values.get(s) - q_min).abs();
        Ok(BackupResult {
            q_min,
            residual,
            argmin,
        })
    }

    pub fn greedy_action<S: ActionScope + ?Sized>(
        &mut self,
        scope: &S,
        s: StateId,
    ) -> Result<usize, ModelError> {
        Ok(self.backup(scope, s)?.greedy())
    }

    /// Depth-first traversal of the greedy policy from `s0`, computing the
    /// greedy action afresh at every non-terminal state it reaches.
    pub fn greedy_envelope<S: ActionScope + ?Sized>(
        &mut self,
        scope: &S,
    ) -> Result<Envelope, ModelError> {
        let mut residuals = HashMap::new();
        let mut env = traverse(scope, |s| {
            let r = self.backup(scope, s)?;
            residuals.insert(s, r.residual);
            Ok(r.greedy())
        })?;
        env.residuals = residuals;
        Ok(env)
    }
}

/// States reachable from `s0` under a greedy policy, in DFS post-order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Envelope {
    /// Post-order over every reached non-goal state. Artificial goals appear
    /// as leaves; real goals are omitted.
    pub order: Vec<StateId>,
    /// Artificial goals reached, in the order they were first seen.
    pub fringe: Vec<StateId>,
    /// The action followed at each non-terminal state of `order`.
    pub policy: Policy,
    /// Bellman residual at each non-terminal state, when computed.
    pub residuals: HashMap<StateId, f64>,
}

impl Envelope {
    /// `order` without the artificial-goal leaves.
    pub fn interior(&self) -> Vec<StateId> {
        self.order
            .iter()
            .copied()
            .filter(|s| self.policy.contains_key(s))
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn is_closed(&self) -> bool {
        self.fringe.is_empty()
    }
}

/// Post-order DFS from `s0` following `choose` at non-terminal states.
/// Children are visited in outcome order; already-visited states are not
/// re-entered, so cycles terminate and their members appear in finish order.
pub fn traverse<S, F>(scope: &S, mut choose: F) -> Result<Envelope, ModelError>
where
    S: ActionScope + ?Sized,
    F: FnMut(StateId) -> Result<usize, ModelError>,
{
    let ssp = scope.base();
    let mut env = Envelope::default();
    let mut visited = vec![false; ssp.num_states()];
    let s0 = ssp.initial();
    if ssp.is_goal(s0) {
        return Ok(env);
    }
    // (state, chosen action, next outcome index)
    let mut stack: Vec<(StateId, usize, usize)> = Vec::new();
    let mut enter = |s: StateId,
                     visited: &mut [bool],
                     env: &mut Envelope,
                     stack: &mut Vec<(StateId, usize, usize)>|
     -> Result<(), ModelError> {
        visited[s.index()] = true;
        if scope.is_terminal(s) {
            env.fringe.push(s);
            env.order.push(s);
        } else {
            let a = choose(s)?;
            env.policy.insert(s, a);
            stack.push((s, a, 0));
        }
        Ok(())
    };
    enter(s0, &mut visited, &mut env, &mut stack)?;
    while let Some(&(s, a, k)) = stack.last() {
        let outcomes = &ssp.actions(s)[a].outcomes;
        if k < outcomes.len() {
            if let Some(top) = stack.last_mut() {
                top.2 += 1;
            }
            let t = outcomes[k].target;
            if !visited[t.index()] && !ssp.is_goal(t) {
                enter(t, &mut visited, &mut env, &mut stack)?;
            }
        } else {
            stack.pop();
            env.order.push(s);
        }
    }
    Ok(env)
}

/// Traversal following a fixed policy map; states missing from the map are
/// a contract violation.
pub fn traverse_policy<S: ActionScope + ?Sized>(
    scope: &S,
    policy: &Policy,
) -> Result<Envelope, ModelError> {
    traverse(scope, |s| {
        policy
            .get(&s)
            .copied()
            .ok_or_else(|| ModelError::Contract(format!("no policy entry for {s}")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::fig2_example;
    use crate::heuristics::Heuristic;
    use crate::model::{ActionDef, Outcome, PartialSsp};

    fn fig2_ids(ssp: &ExplicitSsp) -> [StateId; 5] {
        ["s0", "s1", "s2", "s3", "g"].map(|n| ssp.state_by_name(n).unwrap())
    }

    #[test]
    fn fig2_q_value_with_heuristic() {
        let (ssp, table) = fig2_example();
        let h = Heuristic::from_table("fig2", table);
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        let [_, s1, ..] = fig2_ids(&ssp);
        assert_eq!(ev.q_value(s1, 0).unwrap(), 2.0);
        assert_eq!(ev.q_value(s1, 1).unwrap(), 3.0);
        assert_eq!(ev.counters.q_values, 2);
        assert!(matches!(
            ev.q_value(s1, 2),
            Err(ModelError::UnknownAction { ordinal: 2, .. })
        ));
        assert_eq!(ev.counters.q_values, 2);
    }

    fn two_outcome_ssp() -> ExplicitSsp {
        // s -a(1)-> {x: .5, y: .5}; x -> g cost 2, y -> g cost 4; t -> g cost 3
        ExplicitSsp::new(
            ["s", "x", "y", "g", "t"].map(String::from).to_vec(),
            StateId(0),
            [StateId(3)],
            vec![
                vec![ActionDef::new(
                    "a",
                    1.0,
                    vec![
                        Outcome { target: StateId(1), prob: 0.5 },
                        Outcome { target: StateId(2), prob: 0.5 },
                    ],
                )],
                vec![ActionDef::deterministic("x", 2.0, StateId(3))],
                vec![ActionDef::deterministic("y", 4.0, StateId(3))],
                vec![],
                vec![ActionDef::deterministic("t", 3.0, StateId(3))],
            ],
        )
        .unwrap()
    }

    #[test]
    fn q_value_arithmetic() {
        let ssp = two_outcome_ssp();
        let h = Heuristic::zero();
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        ev.values.set(StateId(1), 2.0);
        ev.values.set(StateId(2), 4.0);
        assert_eq!(ev.q_value(StateId(0), 0).unwrap(), 4.0);
        // single outcome to the goal
        assert_eq!(ev.q_value(StateId(4), 0).unwrap(), 3.0);
        // at the fixed point the residual is zero
        ev.values.set(StateId(4), 3.0);
        let r = ev.backup(&ssp, StateId(4)).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn backup_on_empty_scope_is_contract_violation() {
        let (ssp, table) = fig2_example();
        let h = Heuristic::from_table("fig2", table);
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        let p = PartialSsp::new(&ssp);
        assert!(matches!(
            ev.backup(&p, ssp.initial()),
            Err(ModelError::NoActions(_))
        ));
    }

    #[test]
    fn ties_go_to_lowest_ordinal() {
        let names = ["s", "g"].map(String::from).to_vec();
        let acts = (0..6)
            .map(|k| {
                let cost = if k == 2 || k == 5 { 1.0 } else { 2.0 };
                ActionDef::deterministic(format!("a{k}"), cost, StateId(1))
            })
            .collect();
        let ssp = ExplicitSsp::new(names, StateId(0), [StateId(1)], vec![acts, vec![]]).unwrap();
        let h = Heuristic::zero();
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        let r = ev.backup(&ssp, StateId(0)).unwrap();
        assert_eq!(r.argmin, vec![2, 5]);
        assert_eq!(ev.greedy_action(&ssp, StateId(0)).unwrap(), 2);
    }

    #[test]
    fn envelope_of_fig2_after_partial_expansion() {
        let (ssp, table) = fig2_example();
        let h = Heuristic::from_table("fig2", table);
        let [s0, s1, s2, ..] = fig2_ids(&ssp);
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        let mut p = PartialSsp::new(&ssp);

        let env = ev.greedy_envelope(&p).unwrap();
        assert!(env.interior().is_empty());
        assert_eq!(env.fringe, vec![s0]);

        p.open_tip(s0).unwrap();
        p.add_actions(s0, &[0]).unwrap();
        p.open_tip(s1).unwrap();
        p.add_actions(s1, &[0]).unwrap();
        let env = ev.greedy_envelope(&p).unwrap();
        assert_eq!(env.interior(), vec![s1, s0]);
        assert_eq!(env.order, vec![s2, s1, s0]);
        assert_eq!(env.fringe, vec![s2]);
        assert_eq!(env.policy, Policy::from([(s0, 0), (s1, 0)]));
    }

    #[test]
    fn envelope_of_goal_initial_is_empty() {
        let ssp = ExplicitSsp::new(vec!["g".into()], StateId(0), [StateId(0)], vec![vec![]])
            .unwrap();
        let h = Heuristic::zero();
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        let env = ev.greedy_envelope(&ssp).unwrap();
        assert!(env.order.is_empty() && env.fringe.is_empty());
    }

    #[test]
    fn chain_post_order() {
        // s0 -> s1 -> s2 (goal)
        let ssp = ExplicitSsp::new(
            ["s0", "s1", "s2"].map(String::from).to_vec(),
            StateId(0),
            [StateId(2)],
            vec![
                vec![ActionDef::deterministic("a", 1.0, StateId(1))],
                vec![ActionDef::deterministic("b", 1.0, StateId(2))],
                vec![],
            ],
        )
        .unwrap();
        let h = Heuristic::zero();
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        let env = ev.greedy_envelope(&ssp).unwrap();
        assert_eq!(env.order, vec![StateId(1), StateId(0)]);
        assert!(env.is_closed());
    }

    #[test]
    fn cycles_terminate() {
        // s0 <-> s1 with an exit to g from s1
        let ssp = ExplicitSsp::new(
            ["s0", "s1", "g"].map(String::from).to_vec(),
            StateId(0),
            [StateId(2)],
            vec![
                vec![ActionDef::deterministic("a", 1.0, StateId(1))],
                vec![ActionDef::new(
                    "b",
                    1.0,
                    vec![
                        Outcome { target: StateId(0), prob: 0.5 },
                        Outcome { target: StateId(2), prob: 0.5 },
                    ],
                )],
                vec![],
            ],
        )
        .unwrap();
        let h = Heuristic::zero();
        let mut ev = Evaluator::new(ValueFunction::new(&ssp, &h), &ssp);
        let env = ev.greedy_envelope(&ssp).unwrap();
        assert_eq!(env.order, vec![StateId(1), StateId(0)]);
    }
}
