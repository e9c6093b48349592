//! Checks a solution three ways: epsilon-consistency on the greedy envelope,
//! closure of the constraint set, and the LP optimality certificate.
use sspkit::domains::{generate_tw, TwConfig};
use sspkit::heuristics::Heuristic;
use sspkit::model::verify_lp_certificate;
use sspkit::solvers::{cg_ilao_solve, optimal_values, SolverConfig};

fn main() {
    let ssp = generate_tw(&TwConfig::new(2, 3))
        .unwrap()
        .apply_fixed_penalty(500.0)
        .unwrap();
    let h = Heuristic::determinization(&ssp);
    let r = cg_ilao_solve(&ssp, &h, &SolverConfig::default()).unwrap();
    println!("consistency: {}", r.consistency);
    if let Some(c) = &r.closure {
        println!("closure: {c}");
    }

    let vstar = optimal_values(&ssp, 1e-8).unwrap();
    println!("lp, optimal values: {}", verify_lp_certificate(&ssp, &vstar, 1e-4));
    // Inflating every non-goal value breaks feasibility next to the goal.
    let inflated: Vec<f64> = ssp
        .states()
        .map(|s| if ssp.is_goal(s) { 0.0 } else { vstar[s.index()] + 1.0 })
        .collect();
    println!("lp, inflated values: {}", verify_lp_certificate(&ssp, &inflated, 1e-4));
}
