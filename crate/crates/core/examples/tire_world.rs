//! Generates a Triangle Tire World instance and solves it with
//! constraint-generation iLAO*.
//!
//! `cargo run --release --example tire_world -- 3 4`
use sspkit::domains::{generate_tw, TwConfig};
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{cg_ilao_solve, SolverConfig};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u32>().expect("integer argument"));
    let n = args.next().unwrap_or(2);
    let d = args.next().unwrap_or(2 * n);
    let raw = generate_tw(&TwConfig::new(n, d)).expect("valid size");
    println!(
        "tire world n={n} d={d}: {} states, {} actions, {} dead ends",
        raw.num_states(),
        raw.total_actions(),
        raw.dead_ends().len()
    );
    let ssp = raw.apply_fixed_penalty(500.0).unwrap();
    let h = Heuristic::determinization(&ssp);
    let r = cg_ilao_solve(&ssp, &h, &SolverConfig::default()).unwrap();
    println!("V(s0) = {:.4} ({})", r.v_s0, r.termination);
    println!(
        "{} Q-values, {} of {} actions kept, {:?}",
        r.counters.q_values, r.partial_actions, r.potential_actions, r.elapsed
    );
}
