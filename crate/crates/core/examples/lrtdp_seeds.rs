//! LRTDP is seeded: the same seed reproduces the same run, different seeds
//! sample different trials but converge to the same value.
use sspkit::domains::{random_layered_ssp, RandomConfig};
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{lrtdp_solve, SolverConfig};

fn main() {
    let ssp = random_layered_ssp(&RandomConfig::new(6, 5, 3, 3, 11))
        .unwrap()
        .apply_fixed_penalty(500.0)
        .unwrap();
    let h = Heuristic::determinization(&ssp);
    for seed in 0..4 {
        let r = lrtdp_solve(&ssp, &h, &SolverConfig::default().with_seed(seed)).unwrap();
        println!(
            "seed {seed}: V(s0) = {:.6}, {} trials, {} Q-values",
            r.v_s0, r.iterations, r.counters.q_values
        );
    }
}
