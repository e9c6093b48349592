//! The `sspkit` command line: `gen`, `solve`, `bench`, `verify` and
//! `density`.
//!
//! Exit codes: 0 on success, 1 when a run fails or a certificate is
//! violated, 2 on a usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    build_heuristic, density_report, run_matrix, write_csv, BenchError, BenchSpec,
    PreparedProblem,
};
use crate::domains::{serialize_grounded, ProblemSelector};
use crate::heuristics::{Heuristic, HeuristicSpec};
use crate::model::{verify_lp_certificate, ExplicitSsp};
use crate::solvers::{solve, vi_solve, Algorithm, SolveResult, SolverConfig};

/// Largest instance `verify` will also solve with VI for the LP check.
pub const LP_CHECK_STATE_LIMIT: usize = 200_000;

/// Largest allowed gap between a solver's `V(s0)` and VI's in `verify`.
pub const REFERENCE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "sspkit", version, about = "Stochastic shortest path planners and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a problem as grounded JSON.
    Gen {
        /// tw:<n>,<d>[,nc] | file:<path> | fig2 | rand:<layers>,<width>,<branching>,<outcomes>,<seed>
        #[arg(long)]
        problem: ProblemSelector,
        /// Apply the fixed-penalty transform with this penalty first.
        #[arg(long)]
        penalty: Option<f64>,
        /// Output file (standard output when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one problem and print a summary.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Also print the per-iteration trace of the LAO solvers as JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Run a problem × algorithm × heuristic × seed matrix and write CSV.
    Bench(BenchArgs),
    /// Solve, then check every certificate; exit 1 on any violation.
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print |Â(s)|/|A(s)| over the expanded states of an iLAO* run.
    Density {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub problem: ProblemSelector,
    /// vi | ilao | cg-ilao | lrtdp
    #[arg(long, default_value = "cg-ilao")]
    pub algo: Algorithm,
    /// zero | det | pert:<w> | given
    #[arg(long, default_value = "det")]
    pub heuristic: HeuristicSpec,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 500.0)]
    pub penalty: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Problem selectors; repeat the flag or separate with ';'.
    #[arg(long, required = true, value_delimiter = ';')]
    pub problems: Vec<ProblemSelector>,
    #[arg(long, value_delimiter = ',', default_value = "ilao,cg-ilao")]
    pub algos: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "det")]
    pub heuristics: Vec<HeuristicSpec>,
    /// Seeds 0..N per cell.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 500.0)]
    pub penalty: f64,
    /// Per-run wall-clock limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// CSV destination (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command, writing the
/// human-readable summary to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Gen {
            problem,
            penalty,
            out: path,
        } => generate(&problem, penalty, path, out),
        Command::Solve { run, trace } => solve_cmd(&run, trace, out),
        Command::Bench(args) => bench_cmd(args, out),
        Command::Verify { run } => verify_cmd(&run, out),
        Command::Density { run } => density_cmd(&run, out),
    }
}

fn timeout(flag: Option<f64>, name: &str) -> Result<Option<Duration>, Failure> {
    flag.map(|t| {
        Duration::try_from_secs_f64(t)
            .map_err(|_| Failure::Usage(format!("{name}: `{t}` is not a non-negative duration")))
    })
    .transpose()
}

impl RunArgs {
    fn config(&self) -> Result<SolverConfig, Failure> {
        let cfg = SolverConfig {
            epsilon: self.epsilon,
            penalty: self.penalty,
            seed: self.seed,
            max_wall_time: timeout(self.timeout, "--timeout")?,
            ..SolverConfig::default()
        };
        cfg.validate()
            .map_err(|e| Failure::Usage(format!("--epsilon/--penalty: {e}")))?;
        Ok(cfg)
    }

    fn prepare(&self) -> Result<(SolverConfig, PreparedProblem, Heuristic), Failure> {
        let cfg = self.config()?;
        let problem = PreparedProblem::load(&self.problem, self.penalty)
            .map_err(|e| Failure::Usage(format!("--problem: {e}")))?;
        let h = build_heuristic(
            self.heuristic,
            &problem.ssp,
            problem.bundled_heuristic.as_deref(),
            self.seed,
        )
        .map_err(|e| match e {
            BenchError::NoBundledHeuristic(_) => Failure::Usage(format!(
                "--heuristic: {} bundles no heuristic table",
                problem.instance
            )),
            e => Failure::Usage(format!("--heuristic: {e}")),
        })?;
        Ok((cfg, problem, h))
    }
}

fn generate(
    problem: &ProblemSelector,
    penalty: Option<f64>,
    path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut ssp = problem
        .load()
        .map_err(|e| Failure::Usage(format!("--problem: {e}")))?
        .ssp;
    if let Some(d) = penalty {
        ssp = ssp
            .apply_fixed_penalty(d)
            .map_err(|e| Failure::Usage(format!("--penalty: {e}")))?;
    }
    let json = serialize_grounded(&ssp);
    match path {
        Some(p) => {
            std::fs::write(&p, json + "\n")
                .map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?;
            writeln!(out, "wrote {} states to {}", ssp.num_states(), p.display())?;
        }
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}

fn summary(
    out: &mut dyn Write,
    problem: &PreparedProblem,
    args: &RunArgs,
    r: &SolveResult<'_>,
) -> io::Result<()> {
    let ssp: &ExplicitSsp = &problem.ssp;
    writeln!(
        out,
        "problem: {} ({} states, {} actions, penalty {})",
        problem.instance,
        ssp.num_states(),
        ssp.total_actions(),
        args.penalty
    )?;
    writeln!(
        out,
        "algorithm: {}  heuristic: {}  epsilon: {}  seed: {}",
        r.algorithm, args.heuristic, args.epsilon, args.seed
    )?;
    writeln!(out, "termination: {} after {} iterations", r.termination, r.iterations)?;
    writeln!(out, "v_s0 = {}", r.v_s0)?;
    writeln!(out, "solved: {}", r.solved())?;
    writeln!(
        out,
        "q-values: {} (guards {})  backups: {}  expansions: {}  heuristic calls: {}",
        r.counters.q_values,
        r.counters.q_guard,
        r.counters.backups,
        r.counters.expansions,
        r.heuristic_calls()
    )?;
    writeln!(
        out,
        "actions considered: {} of {}",
        r.partial_actions, r.potential_actions
    )?;
    writeln!(out, "epsilon-consistency: {}", r.consistency)?;
    if let Some(c) = &r.closure {
        writeln!(out, "constraint closure: {c}")?;
    }
    Ok(())
}

fn solve_cmd(args: &RunArgs, trace: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let (mut cfg, problem, h) = args.prepare()?;
    cfg.record_trace = trace;
    let r = solve(args.algo, &problem.ssp, &h, &cfg).map_err(|e| Failure::Run(e.to_string()))?;
    summary(out, &problem, args, &r)?;
    if trace {
        for it in &r.trace {
            let line = serde_json::to_string(it).map_err(|e| Failure::Run(e.to_string()))?;
            writeln!(out, "{line}")?;
        }
    }
    eprintln!("wall time: {:.3} s", r.elapsed.as_secs_f64());
    if r.solved() {
        Ok(())
    } else {
        Err(Failure::Run(format!("not solved ({})", r.termination)))
    }
}

fn verify_cmd(args: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (cfg, problem, h) = args.prepare()?;
    let ssp = &problem.ssp;
    let r = solve(args.algo, ssp, &h, &cfg).map_err(|e| Failure::Run(e.to_string()))?;
    summary(out, &problem, args, &r)?;
    let mut problems = Vec::new();
    if !r.solved() {
        problems.push(format!("run did not solve the problem ({})", r.termination));
    }
    if !r.consistency.passed() {
        problems.push("epsilon-consistency violated".to_string());
    }
    if r.closure.as_ref().is_some_and(|c| !c.passed()) {
        problems.push("constraint closure violated".to_string());
    }

    if ssp.num_states() <= LP_CHECK_STATE_LIMIT {
        // The LP check needs a value for every state; non-VI solvers leave
        // most states at their heuristic value, so VI supplies the reference.
        let zero = Heuristic::zero();
        let reference;
        let full: &SolveResult<'_> = if args.algo == Algorithm::Vi {
            &r
        } else {
            reference = vi_solve(ssp, &zero, &cfg).map_err(|e| Failure::Run(e.to_string()))?;
            &reference
        };
        let lp = verify_lp_certificate(ssp, &full.values.to_vec(), cfg.epsilon);
        writeln!(out, "lp certificate (value iteration): {lp}")?;
        if !lp.passed() {
            problems.push("lp certificate violated".to_string());
        }
        let gap = (r.v_s0 - full.v_s0).abs();
        writeln!(out, "gap to value iteration at s0: {gap:e}")?;
        if gap > REFERENCE_TOLERANCE {
            problems.push(format!("v_s0 differs from value iteration by {gap}"));
        }
    } else {
        writeln!(
            out,
            "lp certificate: skipped ({} states exceed {LP_CHECK_STATE_LIMIT})",
            ssp.num_states()
        )?;
    }
    if problems.is_empty() {
        writeln!(out, "verify: all certificates passed")?;
        Ok(())
    } else {
        Err(Failure::Run(problems.join("; ")))
    }
}

fn density_cmd(args: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if !matches!(args.algo, Algorithm::Ilao | Algorithm::CgIlao) {
        return Err(Failure::Usage(format!(
            "--algo: density needs ilao or cg-ilao, got {}",
            args.algo
        )));
    }
    let (cfg, problem, h) = args.prepare()?;
    let r = solve(args.algo, &problem.ssp, &h, &cfg).map_err(|e| Failure::Run(e.to_string()))?;
    summary(out, &problem, args, &r)?;
    let partial = r.partial.as_ref().expect("LAO solvers return a partial SSP");
    writeln!(out, "{}", density_report(partial))?;
    Ok(())
}

fn bench_cmd(args: BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = BenchSpec {
        problems: args.problems,
        algorithms: args.algos,
        heuristics: args.heuristics,
        seeds: args.seeds,
        epsilon: args.epsilon,
        penalty: args.penalty,
        timeout: timeout(args.timeout, "--timeout")?,
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let outcome = run_matrix(&spec).map_err(|e| Failure::Run(e.to_string()))?;
    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
            write_csv(&outcome.rows, BufWriter::new(file))
                .map_err(|e| Failure::Run(e.to_string()))?;
            let solved = outcome.rows.iter().filter(|r| r.solved).count();
            writeln!(
                out,
                "{} runs, {} solved; CSV written to {}",
                outcome.rows.len(),
                solved,
                path.display()
            )?;
        }
        None => write_csv(&outcome.rows, &mut *out).map_err(|e| Failure::Run(e.to_string()))?,
    }
    for f in &outcome.failures {
        eprintln!("failed: {f}");
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Run(format!("{} runs failed", outcome.failures.len())))
    }
}
