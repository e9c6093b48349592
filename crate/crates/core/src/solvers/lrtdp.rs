use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::heuristics::Heuristic;
use crate::model::{verify_epsilon_consistency, Evaluator, ExplicitSsp, StateId, ValueFunction};

use super::{prepare, Algorithm, Clock, SolveResult, SolverConfig, SolverError, Termination};

/// Labelled RTDP: greedy trials from `s0` with sampled outcomes, each
/// followed by a solved-labelling pass back along the trial.
pub fn lrtdp_solve<'a>(
    ssp: &'a ExplicitSsp,
    heuristic: &'a Heuristic,
    cfg: &SolverConfig,
) -> Result<SolveResult<'a>, SolverError> {
    prepare(ssp, heuristic, cfg)?;
    let mut values = ValueFunction::new(ssp, heuristic);
    if cfg.watch_values {
        values.watch();
    }
    let mut run = Run {
        ssp,
        eps: cfg.epsilon,
        ev: Evaluator::new(values, ssp),
        solved: ssp.states().map(|s| ssp.is_goal(s)).collect(),
        touched: vec![false; ssp.num_states()],
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        clock: Clock::start(cfg.max_wall_time),
        depth_cap: 10 * ssp.num_states(),
    };
    let s0 = ssp.initial();
    let mut trials = 0;
    let termination = loop {
        if run.solved[s0.index()] {
            break Termination::Converged;
        }
        if run.clock.expired() {
            break Termination::Timeout;
        }
        if trials >= cfg.iteration_cap {
            break Termination::IterationCap;
        }
        trials += 1;
        if let Some(stop) = run.trial()? {
            break stop;
        }
    };
    let consistency = verify_epsilon_consistency(ssp, &run.ev.values, cfg.epsilon);
    let explored: usize = ssp
        .states()
        .filter(|s| run.touched[s.index()])
        .map(|s| ssp.num_actions(s))
        .sum();
    Ok(SolveResult {
        algorithm: Algorithm::Lrtdp,
        v_s0: run.ev.values.peek(s0),
        values: run.ev.values,
        partial: None,
        counters: run.ev.counters,
        iterations: trials,
        termination,
        consistency,
        closure: None,
        partial_actions: explored,
        potential_actions: explored,
        trace: Vec::new(),
        elapsed: run.clock.elapsed(),
    })
}

struct Run<'a> {
    ssp: &'a ExplicitSsp,
    eps: f64,
    ev: Evaluator<'a>,
    solved: Vec<bool>,
    /// States backed up at least once.
    touched: Vec<bool>,
    rng: ChaCha8Rng,
    clock: Clock,
    depth_cap: usize,
}

impl Run<'_> {
    /// Backs up `s`, assigns the new value and returns (greedy action, residual).
    fn update(&mut self, s: StateId) -> Result<(usize, f64), SolverError> {
        let r = self.ev.backup(self.ssp, s)?;
        self.touched[s.index()] = true;
        self.ev.values.set(s, r.q_min);
        Ok((r.greedy(), r.residual))
    }

    fn sample(&mut self, s: StateId, a: usize) -> StateId {
        let outcomes = &self.ssp.actions(s)[a].outcomes;
        let mut u: f64 = self.rng.gen();
        for o in outcomes {
            if u < o.prob {
                return o.target;
            }
            u -= o.prob;
        }
        // rounding left `u` just above the last cumulative bound
        outcomes[outcomes.len() - 1].target
    }

    /// One trial; `Some` ends the search early.
    fn trial(&mut self) -> Result<Option<Termination>, SolverError> {
        let mut path = Vec::new();
        let mut s = self.ssp.initial();
        while !self.solved[s.index()] {
            if path.len() >= self.depth_cap {
                return Ok(Some(Termination::DepthCap));
            }
            path.push(s);
            let (a, _) = self.update(s)?;
            s = self.sample(s, a);
        }
        while let Some(s) = path.pop() {
            if self.clock.expired() {
                return Ok(Some(Termination::Timeout));
            }
            if !self.check_solved(s)? {
                break;
            }
        }
        Ok(None)
    }

    /// Labels the greedy envelope below `s` solved when every residual in it
    /// is within ε; otherwise backs those states up in reverse discovery order.
    fn check_solved(&mut self, s: StateId) -> Result<bool, SolverError> {
        if self.solved[s.index()] {
            return Ok(true);
        }
        let mut consistent = true;
        let mut open = vec![s];
        let mut closed = Vec::new();
        let mut seen = std::collections::HashSet::from([s]);
        while let Some(x) = open.pop() {
            closed.push(x);
            let r = self.ev.backup(self.ssp, x)?;
            self.touched[x.index()] = true;
            if r.residual > self.eps {
                consistent = false;
                continue;
            }
            for t in self.ssp.actions(x)[r.greedy()].successors() {
                if !self.solved[t.index()] && seen.insert(t) {
                    open.push(t);
                }
            }
        }
        if consistent {
            for x in closed {
                self.solved[x.index()] = true;
            }
        } else {
            while let Some(x) = closed.pop() {
                self.update(x)?;
            }
        }
        Ok(consistent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::fig2_example;

    #[test]
    fn fig2_converges_to_optimum() {
        let (ssp, table) = fig2_example();
        let h = Heuristic::from_table("fig2", table);
        let r = lrtdp_solve(&ssp, &h, &SolverConfig::default()).unwrap();
        assert!(r.solved());
        assert!((r.v_s0 - 4.0).abs() <= 1e-4);
    }

    #[test]
    fn same_seed_same_run() {
        let (ssp, _) = fig2_example();
        let h = Heuristic::zero();
        let cfg = SolverConfig::default().with_seed(7);
        let a = lrtdp_solve(&ssp, &h, &cfg).unwrap();
        let b = lrtdp_solve(&ssp, &h, &cfg).unwrap();
        assert_eq!(a.counters, b.counters);
        assert_eq!(a.values.to_vec(), b.values.to_vec());
    }
}
