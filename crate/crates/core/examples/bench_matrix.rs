//! Runs a small benchmark matrix in parallel and prints it as CSV.
use sspkit::bench::{run_matrix, write_csv, BenchSpec};
use sspkit::heuristics::HeuristicSpec;
use sspkit::solvers::Algorithm;

fn main() {
    let spec = BenchSpec {
        problems: ["tw:2,2", "tw:2,4", "rand:4,4,2,2,1"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect(),
        algorithms: vec![Algorithm::Ilao, Algorithm::CgIlao],
        heuristics: vec![HeuristicSpec::Det, HeuristicSpec::Pert(0.5)],
        seeds: 2,
        epsilon: 1e-4,
        penalty: 500.0,
        timeout: None,
    };
    let out = run_matrix(&spec).unwrap();
    write_csv(&out.rows, std::io::stdout().lock()).unwrap();
    for f in &out.failures {
        eprintln!("failed cell: {f:?}");
    }
}
