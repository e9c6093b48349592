//! iLAO* and its constraint-generation variant.
//!
//! Both grow a partial SSP from `s0`, alternating a DFS over the greedy
//! policy, expansion of the artificial goals it reaches, and Bellman backups
//! over the traversed states in post-order. The constraint-generation
//! variant expands a fringe state with only its tied-best actions and later
//! admits further actions when their constraint `V(s) ≤ Q(s,a) + ε` breaks.

use indexmap::IndexSet;
use serde::Serialize;

use crate::heuristics::Heuristic;
use crate::model::{
    traverse, verify_constraint_closure, verify_epsilon_consistency, Envelope, Evaluator,
    ExplicitSsp, PartialSsp, Policy, StateId, ValueFunction,
};

use super::{prepare, Algorithm, Clock, SolveResult, SolverConfig, SolverError, Termination};

/// Sweeps a single backup phase may run while potential violations are
/// pending. A partial SSP whose restricted actions trap the greedy policy in
/// a cycle makes values climb without bound; handing control to the
/// violation check lets the missing exit action in.
const SWEEPS_BEFORE_FIX: u32 = 100;

/// Pairs `(s, a)` whose constraint may be violated, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationSet(IndexSet<(StateId, usize)>);

impl ViolationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: StateId, a: usize) -> bool {
        self.0.insert((s, a))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: StateId, a: usize) -> bool {
        self.0.contains(&(s, a))
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<(StateId, usize)> {
        self.iter().collect()
    }
}

impl Extend<(StateId, usize)> for ViolationSet {
    fn extend<I: IntoIterator<Item = (StateId, usize)>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

/// One repaired constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixRecord {
    pub state: StateId,
    pub ordinal: usize,
    pub from: f64,
    pub to: f64,
    /// Whether the action was new to the partial SSP.
    pub added: bool,
}

/// What one outer iteration did.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: u64,
    /// Fringe states expanded, with the actions each received.
    pub expanded: Vec<(StateId, Vec<usize>)>,
    pub sweeps: u32,
    /// Values of the partial SSP's members after the backup phase.
    pub values_after_backups: Vec<(StateId, f64)>,
    pub violations_after_backups: Vec<(StateId, usize)>,
    pub fixes: Vec<FixRecord>,
    pub values_after_fix: Vec<(StateId, f64)>,
    pub violations_after_fix: Vec<(StateId, usize)>,
    pub residual: f64,
    pub policy_changed: bool,
    pub fringe_reached: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Full,
    ConstraintGeneration,
}

impl Variant {
    fn algorithm(self) -> Algorithm {
        match self {
            Variant::Full => Algorithm::Ilao,
            Variant::ConstraintGeneration => Algorithm::CgIlao,
        }
    }
}

/// iLAO*: expands each fringe state with all of its actions.
pub fn ilao_solve<'a>(
    ssp: &'a ExplicitSsp,
    heuristic: &'a Heuristic,
    cfg: &SolverConfig,
) -> Result<SolveResult<'a>, SolverError> {
    Search::new(ssp, heuristic, cfg, Variant::Full)?.run()
}

/// iLAO* with constraint generation: expands a fringe state with only the
/// actions tied for the minimum Q-value and repairs broken constraints.
pub fn cg_ilao_solve<'a>(
    ssp: &'a ExplicitSsp,
    heuristic: &'a Heuristic,
    cfg: &SolverConfig,
) -> Result<SolveResult<'a>, SolverError> {
    Search::new(ssp, heuristic, cfg, Variant::ConstraintGeneration)?.run()
}

/// Greedy policy over the non-tip states reachable from `s0`.
pub fn snapshot_policy(
    ev: &mut Evaluator<'_>,
    partial: &PartialSsp<'_>,
) -> Result<Policy, SolverError> {
    Ok(ev.greedy_envelope(partial)?.policy)
}

struct Sweep {
    residual: f64,
    changed: bool,
    sweeps: u32,
    timed_out: bool,
}

struct Search<'a, 'c> {
    ssp: &'a ExplicitSsp,
    cfg: &'c SolverConfig,
    variant: Variant,
    ev: Evaluator<'a>,
    partial: PartialSsp<'a>,
    gamma: ViolationSet,
    clock: Clock,
    trace: Vec<IterationTrace>,
}

impl<'a, 'c> Search<'a, 'c> {
    fn new(
        ssp: &'a ExplicitSsp,
        heuristic: &'a Heuristic,
        cfg: &'c SolverConfig,
        variant: Variant,
    ) -> Result<Self, SolverError> {
        prepare(ssp, heuristic, cfg)?;
        let mut values = ValueFunction::new(ssp, heuristic);
        if cfg.watch_values {
            values.watch();
        }
        Ok(Search {
            ssp,
            cfg,
            variant,
            ev: Evaluator::new(values, ssp),
            partial: PartialSsp::new(ssp),
            gamma: ViolationSet::new(),
            clock: Clock::start(cfg.max_wall_time),
            trace: Vec::new(),
        })
    }

    fn run(mut self) -> Result<SolveResult<'a>, SolverError> {
        let eps = self.cfg.epsilon;
        let mut iterations = 0;
        let mut candidate = false;
        let termination = loop {
            if self.clock.expired() {
                break Termination::Timeout;
            }
            let env = self.ev.greedy_envelope(&self.partial)?;
            // The stopping test held last iteration; confirm it on a fresh
            // traversal before returning.
            if candidate && env.is_closed() && env.max_residual() <= eps {
                break Termination::Converged;
            }
            if iterations >= self.cfg.iteration_cap {
                break Termination::IterationCap;
            }
            iterations += 1;
            let mut record = IterationTrace {
                iteration: iterations,
                ..Default::default()
            };

            let mut policy = env.policy.clone();
            record.expanded = self.expand_fringes(&env, &mut policy)?;
            let after = if record.expanded.is_empty() {
                env.clone()
            } else {
                // Expanded states may lead into interior states the previous
                // traversal never reached; those get their greedy action now.
                let (ev, partial) = (&mut self.ev, &self.partial);
                traverse(partial, |s| match policy.get(&s) {
                    Some(&a) => Ok(a),
                    None => ev.greedy_action(partial, s),
                })?
            };
            let fringe_reached = !after.fringe.is_empty();

            let sweep = self.backups(&env, &after.policy, fringe_reached)?;
            if self.cfg.record_trace {
                record.sweeps = sweep.sweeps;
                record.values_after_backups = self.member_values();
                record.violations_after_backups = self.gamma.to_vec();
            }
            if sweep.timed_out {
                self.push_trace(record);
                break Termination::Timeout;
            }
            let mut residual = sweep.residual;
            if self.variant == Variant::ConstraintGeneration {
                let fixes;
                (residual, fixes) = self.fix_constraints(residual)?;
                if self.cfg.record_trace {
                    record.fixes = fixes;
                    record.values_after_fix = self.member_values();
                    record.violations_after_fix = self.gamma.to_vec();
                }
            }
            record.residual = residual;
            record.policy_changed = sweep.changed;
            record.fringe_reached = fringe_reached;
            self.push_trace(record);
            candidate = !fringe_reached && !sweep.changed && residual <= eps;
        };
        self.finish(termination, iterations)
    }

    fn push_trace(&mut self, record: IterationTrace) {
        if self.cfg.record_trace {
            self.trace.push(record);
        }
    }

    fn member_values(&self) -> Vec<(StateId, f64)> {
        self.partial
            .states()
            .iter()
            .map(|&s| (s, self.ev.values.peek(s)))
            .collect()
    }

    /// Opens every artificial goal the traversal reached and gives it either
    /// all of its actions or only its tied-best ones. The greedy action of
    /// each opened state joins `policy`.
    fn expand_fringes(
        &mut self,
        env: &Envelope,
        policy: &mut Policy,
    ) -> Result<Vec<(StateId, Vec<usize>)>, SolverError> {
        let mut expanded = Vec::with_capacity(env.fringe.len());
        for &sf in &env.fringe {
            if !self.partial.is_artificial_goal(sf) {
                continue;
            }
            self.partial.open_tip(sf)?;
            let best = self.ev.backup(self.ssp, sf)?;
            let added = match self.variant {
                Variant::Full => (0..self.ssp.num_actions(sf)).collect(),
                Variant::ConstraintGeneration => best.argmin.clone(),
            };
            self.partial.add_actions(sf, &added)?;
            self.ev.counters.expansions += 1;
            policy.insert(sf, best.greedy());
            expanded.push((sf, added));
        }
        Ok(expanded)
    }

    /// Repeated post-order sweeps over the traversed non-tip states until the
    /// residual drops to ε, the greedy policy moves away from `old`, or the
    /// traversal had reached a fringe.
    fn backups(
        &mut self,
        env: &Envelope,
        old: &Policy,
        fringe_reached: bool,
    ) -> Result<Sweep, SolverError> {
        let eps = self.cfg.epsilon;
        let cg = self.variant == Variant::ConstraintGeneration;
        let mut changed = false;
        let mut sweeps = 0;
        loop {
            if self.clock.expired() {
                return Ok(Sweep {
                    residual: f64::INFINITY,
                    changed,
                    sweeps,
                    timed_out: true,
                });
            }
            sweeps += 1;
            let mut residual: f64 = 0.0;
            for &s in &env.order {
                if self.partial.is_tip(s) {
                    continue;
                }
                let r = self.ev.backup(&self.partial, s)?;
                if cg {
                    let v = self.ev.values.get(s);
                    if r.q_min - v > eps {
                        self.gamma.extend(self.partial.external_successor_pairs(s));
                    } else if v - r.q_min > eps {
                        self.gamma.extend(self.ssp.predecessors(s).iter().copied());
                    }
                }
                residual = residual.max(r.residual);
                self.ev.values.set(s, r.q_min);
                if old.get(&s) != Some(&r.greedy()) {
                    changed = true;
                }
            }
            let stalled = cg && sweeps >= SWEEPS_BEFORE_FIX && !self.gamma.is_empty();
            if residual <= eps || changed || fringe_reached || stalled {
                return Ok(Sweep {
                    residual,
                    changed,
                    sweeps,
                    timed_out: false,
                });
            }
        }
    }

    /// Checks every pending pair and repairs those with `V(s) > Q(s,a) + ε`,
    /// admitting the action when it is new. Predecessors of repaired states
    /// form the next pending set.
    fn fix_constraints(&mut self, residual: f64) -> Result<(f64, Vec<FixRecord>), SolverError> {
        let eps = self.cfg.epsilon;
        let pending = std::mem::take(&mut self.gamma);
        let mut next = ViolationSet::new();
        let mut residual = residual;
        let mut fixes = Vec::new();
        for (s, a) in pending.iter() {
            // Tips are priced by the heuristic and carry no constraints.
            if !self.partial.is_interior(s) {
                continue;
            }
            let q = self.ev.q_value(s, a)?;
            self.ev.counters.q_guard += 1;
            let v = self.ev.values.get(s);
            if v > q + eps {
                let added = !self.partial.has_action(s, a);
                if added {
                    self.partial.add_actions(s, &[a])?;
                }
                residual = residual.max(v - q);
                self.ev.values.set(s, q);
                next.extend(self.ssp.predecessors(s).iter().copied());
                if self.cfg.record_trace {
                    fixes.push(FixRecord {
                        state: s,
                        ordinal: a,
                        from: v,
                        to: q,
                        added,
                    });
                }
            }
        }
        self.gamma = next;
        Ok((residual, fixes))
    }

    fn finish(self, termination: Termination, iterations: u64) -> Result<SolveResult<'a>, SolverError> {
        let eps = self.cfg.epsilon;
        let consistency = verify_epsilon_consistency(&self.partial, &self.ev.values, eps);
        let closure = verify_constraint_closure(&self.partial, &self.ev.values, eps);
        Ok(SolveResult {
            algorithm: self.variant.algorithm(),
            v_s0: self.ev.values.peek(self.ssp.initial()),
            partial_actions: self.partial.partial_action_count(),
            potential_actions: self.partial.potential_action_count(),
            values: self.ev.values,
            partial: Some(self.partial),
            counters: self.ev.counters,
            iterations,
            termination,
            consistency,
            closure: Some(closure),
            trace: self.trace,
            elapsed: self.clock.elapsed(),
        })
    }
}
