use crate::heuristics::Heuristic;
use crate::model::{verify_epsilon_consistency, Evaluator, ExplicitSsp, ValueFunction};

use super::{prepare, Algorithm, Clock, SolveResult, SolverConfig, SolverError, Termination};

/// In-place value iteration over every state in ascending id order, starting
/// from the heuristic, until a full sweep changes no value by more than ε.
pub fn vi_solve<'a>(
    ssp: &'a ExplicitSsp,
    heuristic: &'a Heuristic,
    cfg: &SolverConfig,
) -> Result<SolveResult<'a>, SolverError> {
    prepare(ssp, heuristic, cfg)?;
    let clock = Clock::start(cfg.max_wall_time);
    let mut values = ValueFunction::new(ssp, heuristic);
    if cfg.watch_values {
        values.watch();
    }
    let mut ev = Evaluator::new(values, ssp);
    let mut sweeps = 0;
    let termination = loop {
        if clock.expired() {
            break Termination::Timeout;
        }
        if sweeps >= cfg.iteration_cap {
            break Termination::IterationCap;
        }
        sweeps += 1;
        let mut res: f64 = 0.0;
        for s in ssp.states() {
            if ssp.is_goal(s) {
                continue;
            }
            let r = ev.backup(ssp, s)?;
            res = res.max(r.residual);
            ev.values.set(s, r.q_min);
        }
        if res <= cfg.epsilon {
            break Termination::Converged;
        }
    };
    let consistency = verify_epsilon_consistency(ssp, &ev.values, cfg.epsilon);
    let actions = ssp.total_actions();
    Ok(SolveResult {
        algorithm: Algorithm::Vi,
        v_s0: ev.values.peek(ssp.initial()),
        values: ev.values,
        partial: None,
        counters: ev.counters,
        iterations: sweeps,
        termination,
        consistency,
        closure: None,
        partial_actions: actions,
        potential_actions: actions,
        trace: Vec::new(),
        elapsed: clock.elapsed(),
    })
}

/// `V*` to within `epsilon` by value iteration from zero. Starting below
/// `V*` keeps every iterate a lower bound.
pub fn optimal_values(ssp: &ExplicitSsp, epsilon: f64) -> Result<Vec<f64>, SolverError> {
    const SWEEP_CAP: u64 = 1_000_000;
    let mut v = vec![0.0; ssp.num_states()];
    for sweep in 1.. {
        let mut res: f64 = 0.0;
        for s in ssp.states() {
            if ssp.is_goal(s) {
                continue;
            }
            let mut best = f64::INFINITY;
            for act in ssp.actions(s) {
                let q = act.cost
                    + act
                        .outcomes
                        .iter()
                        .map(|o| o.prob * v[o.target.index()])
                        .sum::<f64>();
                best = best.min(q);
            }
            if best.is_infinite() {
                return Err(SolverError::DeadEnds { count: 1, first: s });
            }
            res = res.max((best - v[s.index()]).abs());
            v[s.index()] = best;
        }
        if res <= epsilon {
            break;
        }
        if sweep >= SWEEP_CAP {
            return Err(SolverError::SweepCap(SWEEP_CAP));
        }
    }
    Ok(v)
}
