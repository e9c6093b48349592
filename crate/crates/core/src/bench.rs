//! Solver × heuristic × instance × seed matrices, run in parallel and
//! written as CSV.
//!
//! `heuristic_calls` counts distinct non-goal states whose value was first
//! read from the heuristic; repeated reads of a state are free.

use std::fmt;
use std::io;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{DomainError, LoadedProblem, ProblemSelector};
use crate::heuristics::{Heuristic, HeuristicError, HeuristicSpec};
use crate::model::{ExplicitSsp, PartialSsp, StateId};
use crate::solvers::{solve, Algorithm, SolveResult, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("heuristic `given` needs a problem that bundles a table; {0} does not")]
    NoBundledHeuristic(String),
    #[error("invalid bench spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub domain: String,
    pub instance: String,
    pub algo: String,
    pub heuristic: String,
    pub seed: u64,
    pub epsilon: f64,
    pub penalty: f64,
    pub solved: bool,
    pub wall_time_s: f64,
    pub v_s0: f64,
    pub q_value_count: u64,
    pub q_value_guard_count: u64,
    pub heuristic_calls: u64,
    pub backup_count: u64,
    pub expansions: u64,
    pub partial_actions: usize,
    pub potential_actions: usize,
}

impl RunMetrics {
    /// Every field except the wall time.
    pub fn without_timing(&self) -> RunMetrics {
        RunMetrics {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// A problem after the fixed-penalty transform, ready to be solved.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    pub ssp: ExplicitSsp,
    pub bundled_heuristic: Option<Vec<f64>>,
    pub domain: &'static str,
    pub instance: String,
}

impl PreparedProblem {
    pub fn new(problem: LoadedProblem, penalty: f64) -> Result<Self, BenchError> {
        Ok(PreparedProblem {
            ssp: problem
                .ssp
                .apply_fixed_penalty(penalty)
                .map_err(DomainError::from)?,
            bundled_heuristic: problem.bundled_heuristic,
            domain: problem.domain,
            instance: problem.instance,
        })
    }

    pub fn load(selector: &ProblemSelector, penalty: f64) -> Result<Self, BenchError> {
        Self::new(selector.load()?, penalty)
    }
}

/// Builds the heuristic named by `spec` for `ssp`. `seed` keys the
/// perturbation of `pert:<w>`.
pub fn build_heuristic(
    spec: HeuristicSpec,
    ssp: &ExplicitSsp,
    bundled: Option<&[f64]>,
    seed: u64,
) -> Result<Heuristic, BenchError> {
    Ok(match spec {
        HeuristicSpec::Zero => Heuristic::zero(),
        HeuristicSpec::Det => Heuristic::determinization(ssp),
        HeuristicSpec::Pert(w) => Heuristic::perturbed(ssp, w, seed)?,
        HeuristicSpec::Given => {
            let table = bundled.ok_or_else(|| BenchError::NoBundledHeuristic(String::new()))?;
            Heuristic::from_table("given", table.to_vec())
        }
    })
}

/// Metrics of a finished run.
pub fn metrics_of(
    problem: &PreparedProblem,
    heuristic: HeuristicSpec,
    cfg: &SolverConfig,
    result: &SolveResult<'_>,
) -> RunMetrics {
    RunMetrics {
        domain: problem.domain.to_string(),
        instance: problem.instance.clone(),
        algo: result.algorithm.to_string(),
        heuristic: heuristic.to_string(),
        seed: cfg.seed,
        epsilon: cfg.epsilon,
        penalty: cfg.penalty,
        solved: result.solved(),
        wall_time_s: result.elapsed.as_secs_f64(),
        v_s0: result.v_s0,
        q_value_count: result.counters.q_values,
        q_value_guard_count: result.counters.q_guard,
        heuristic_calls: result.heuristic_calls(),
        backup_count: result.counters.backups,
        expansions: result.counters.expansions,
        partial_actions: result.partial_actions,
        potential_actions: result.potential_actions,
    }
}

/// Builds the heuristic, runs `algorithm` and reports its metrics. A run
/// counts as solved only when it converged and its value function passes
/// the ε-consistency check.
pub fn run_single(
    problem: &PreparedProblem,
    algorithm: Algorithm,
    heuristic: HeuristicSpec,
    cfg: &SolverConfig,
) -> Result<RunMetrics, BenchError> {
    let h = build_heuristic(
        heuristic,
        &problem.ssp,
        problem.bundled_heuristic.as_deref(),
        cfg.seed,
    )
    .map_err(|e| match e {
        BenchError::NoBundledHeuristic(_) => BenchError::NoBundledHeuristic(problem.instance.clone()),
        e => e,
    })?;
    let result = solve(algorithm, &problem.ssp, &h, cfg)?;
    Ok(metrics_of(problem, heuristic, cfg, &result))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub problems: Vec<ProblemSelector>,
    pub algorithms: Vec<Algorithm>,
    pub heuristics: Vec<HeuristicSpec>,
    /// Seeds `0..seeds` are run for every cell.
    pub seeds: u64,
    pub epsilon: f64,
    pub penalty: f64,
    pub timeout: Option<Duration>,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        let empty = [
            (self.problems.is_empty(), "problems"),
            (self.algorithms.is_empty(), "algorithms"),
            (self.heuristics.is_empty(), "heuristics"),
        ];
        if let Some((_, what)) = empty.iter().find(|(e, _)| *e) {
            return Err(BenchError::Spec(format!("no {what} given")));
        }
        if self.seeds == 0 {
            return Err(BenchError::Spec("at least one seed is required".into()));
        }
        self.solver_config(0).validate()?;
        Ok(())
    }

    fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            penalty: self.penalty,
            seed,
            max_wall_time: self.timeout,
            ..SolverConfig::default()
        }
    }

    pub fn cell_count(&self) -> usize {
        self.problems.len() * self.algorithms.len() * self.heuristics.len() * self.seeds as usize
    }
}

/// A cell that could not run, and why.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub row: usize,
    pub message: String,
}

impl fmt::Display for CellFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}", self.row, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct MatrixOutcome {
    /// One row per (problem, algorithm, heuristic, seed), in that nesting
    /// order. Failed cells keep their row with `solved = false`.
    pub rows: Vec<RunMetrics>,
    pub failures: Vec<CellFailure>,
}

/// Runs every cell of `spec`, in parallel. Problems are loaded once; a
/// problem or cell that fails becomes an unsolved row plus a failure note.
pub fn run_matrix(spec: &BenchSpec) -> Result<MatrixOutcome, BenchError> {
    spec.validate()?;
    let problems: Vec<Result<PreparedProblem, String>> = spec
        .problems
        .par_iter()
        .map(|sel| PreparedProblem::load(sel, spec.penalty).map_err(|e| e.to_string()))
        .collect();

    let mut cells = Vec::with_capacity(spec.cell_count());
    for (p, sel) in spec.problems.iter().enumerate() {
        for &algo in &spec.algorithms {
            for &h in &spec.heuristics {
                for seed in 0..spec.seeds {
                    cells.push((p, sel, algo, h, seed));
                }
            }
        }
    }

    let results: Vec<(RunMetrics, Option<String>)> = cells
        .par_iter()
        .map(|&(p, sel, algo, h, seed)| {
            let cfg = spec.solver_config(seed);
            let outcome = match &problems[p] {
                Ok(problem) => run_single(problem, algo, h, &cfg).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            match outcome {
                Ok(m) => (m, None),
                Err(message) => {
                    let failed = RunMetrics {
                        domain: sel.domain().to_string(),
                        instance: sel.to_string(),
                        algo: algo.to_string(),
                        heuristic: h.to_string(),
                        seed,
                        epsilon: spec.epsilon,
                        penalty: spec.penalty,
                        solved: false,
                        wall_time_s: 0.0,
                        v_s0: f64::NAN,
                        q_value_count: 0,
                        q_value_guard_count: 0,
                        heuristic_calls: 0,
                        backup_count: 0,
                        expansions: 0,
                        partial_actions: 0,
                        potential_actions: 0,
                    };
                    (failed, Some(message))
                }
            }
        })
        .collect();

    let mut outcome = MatrixOutcome::default();
    for (row, (metrics, failure)) in results.into_iter().enumerate() {
        if let Some(message) = failure {
            outcome.failures.push(CellFailure { row, message });
        }
        outcome.rows.push(metrics);
    }
    Ok(outcome)
}

pub fn write_csv<W: io::Write>(rows: &[RunMetrics], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<RunMetrics>, BenchError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(BenchError::from)
}

/// `|Â(s)|/|A(s)|` over the expanded states of a partial SSP.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    /// Expanded states in admission order with their density.
    pub densities: Vec<(StateId, f64)>,
    /// `(d, fraction of states with density ≤ d)` for each distinct `d`,
    /// ascending.
    pub cumulative: Vec<(f64, f64)>,
    pub at_most_half: f64,
}

pub fn density_report(partial: &PartialSsp<'_>) -> DensityReport {
    let base = partial.base_ssp();
    let densities: Vec<(StateId, f64)> = partial
        .states()
        .iter()
        .copied()
        .filter(|&s| partial.is_interior(s))
        .map(|s| (s, partial.actions(s).len() as f64 / base.num_actions(s) as f64))
        .collect();
    let n = densities.len() as f64;
    let mut sorted: Vec<f64> = densities.iter().map(|&(_, d)| d).collect();
    sorted.sort_by(f64::total_cmp);
    let mut cumulative: Vec<(f64, f64)> = Vec::new();
    for (k, &d) in sorted.iter().enumerate() {
        let frac = (k + 1) as f64 / n;
        match cumulative.last_mut() {
            Some(last) if last.0 == d => last.1 = frac,
            _ => cumulative.push((d, frac)),
        }
    }
    let at_most_half = if densities.is_empty() {
        0.0
    } else {
        sorted.iter().filter(|&&d| d <= 0.5).count() as f64 / n
    };
    DensityReport {
        densities,
        cumulative,
        at_most_half,
    }
}

impl fmt::Display for DensityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "expanded states: {}", self.densities.len())?;
        writeln!(f, "density  cumulative fraction")?;
        for (d, frac) in &self.cumulative {
            writeln!(f, "{d:>7.3}  {frac:.3}")?;
        }
        write!(f, "fraction with density <= 0.5: {:.3}", self.at_most_half)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> PreparedProblem {
        PreparedProblem::load(&ProblemSelector::Fig2, 500.0).unwrap()
    }

    #[test]
    fn fixture_runs() {
        let p = fig2();
        let cfg = SolverConfig::default();
        let m = run_single(&p, Algorithm::CgIlao, HeuristicSpec::Given, &cfg).unwrap();
        assert!(m.solved);
        assert_eq!(m.v_s0, 4.0);
        let m = run_single(&p, Algorithm::Vi, HeuristicSpec::Zero, &cfg).unwrap();
        assert!(m.solved);
        assert!((m.v_s0 - 4.0).abs() < 1e-9);
        assert!(m.q_value_count >= m.backup_count);
        assert!(m.partial_actions <= m.potential_actions);
    }

    #[test]
    fn zero_timeout_is_unsolved() {
        let p = fig2();
        let cfg = SolverConfig::default().with_timeout(Duration::ZERO);
        for algo in Algorithm::ALL {
            let m = run_single(&p, algo, HeuristicSpec::Zero, &cfg).unwrap();
            assert!(!m.solved, "{algo}");
        }
    }

    #[test]
    fn given_needs_a_bundled_table() {
        let p = PreparedProblem::load(&"tw:1,2".parse().unwrap(), 500.0).unwrap();
        let err = run_single(&p, Algorithm::Vi, HeuristicSpec::Given, &SolverConfig::default());
        assert!(matches!(err, Err(BenchError::NoBundledHeuristic(_))));
    }

    fn spec() -> BenchSpec {
        BenchSpec {
            problems: vec![ProblemSelector::Fig2, "tw:1,2".parse().unwrap()],
            algorithms: vec![Algorithm::Ilao, Algorithm::CgIlao],
            heuristics: vec![HeuristicSpec::Det],
            seeds: 3,
            epsilon: 1e-4,
            penalty: 500.0,
            timeout: None,
        }
    }

    #[test]
    fn matrix_has_one_row_per_cell_and_round_trips() {
        let out = run_matrix(&spec()).unwrap();
        assert_eq!(out.rows.len(), 12);
        assert!(out.failures.is_empty());
        let mut buf = Vec::new();
        write_csv(&out.rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, out.rows);
        let header = String::from_utf8(buf).unwrap();
        assert!(header.starts_with(
            "domain,instance,algo,heuristic,seed,epsilon,penalty,solved,wall_time_s,v_s0,\
             q_value_count,q_value_guard_count,heuristic_calls,backup_count,expansions,\
             partial_actions,potential_actions\n"
        ));
    }

    #[test]
    fn failures_keep_their_row() {
        let mut s = spec();
        s.heuristics = vec![HeuristicSpec::Given];
        let out = run_matrix(&s).unwrap();
        assert_eq!(out.rows.len(), 12);
        assert_eq!(out.failures.len(), 6);
        assert!(out.rows[6..].iter().all(|r| !r.solved));
    }

    #[test]
    fn density_of_full_expansion_is_one() {
        let p = fig2();
        let h = Heuristic::determinization(&p.ssp);
        let r = solve(Algorithm::Ilao, &p.ssp, &h, &SolverConfig::default()).unwrap();
        let report = density_report(r.partial.as_ref().unwrap());
        assert!(report.densities.iter().all(|&(_, d)| d == 1.0));
        assert_eq!(report.cumulative, vec![(1.0, 1.0)]);
    }

    #[test]
    fn cumulative_distribution() {
        let (ssp, table) = crate::domains::fig2_example();
        let h = Heuristic::from_table("fig2", table);
        let r = solve(Algorithm::CgIlao, &ssp, &h, &SolverConfig::default()).unwrap();
        let report = density_report(r.partial.as_ref().unwrap());
        let s1 = ssp.state_by_name("s1").unwrap();
        assert!(report.densities.contains(&(s1, 1.0)));
    }
}
