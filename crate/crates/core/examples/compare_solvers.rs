//! Runs all four solvers on the same instance and compares their effort.
use sspkit::domains::{generate_tw, TwConfig};
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{solve, Algorithm, SolverConfig};

fn main() {
    let ssp = generate_tw(&TwConfig::new(3, 4))
        .unwrap()
        .apply_fixed_penalty(500.0)
        .unwrap();
    let h = Heuristic::determinization(&ssp);
    let cfg = SolverConfig::default();
    println!("{:<8} {:>10} {:>10} {:>10} {:>9}", "solver", "V(s0)", "Q-values", "actions", "solved");
    for algo in Algorithm::ALL {
        let r = solve(algo, &ssp, &h, &cfg).unwrap();
        println!(
            "{:<8} {:>10.4} {:>10} {:>10} {:>9}",
            algo.name(),
            r.v_s0,
            r.counters.q_values,
            r.partial_actions,
            r.solved()
        );
    }
}
