//! Compares the zero, determinization and perturbed heuristics against the
//! optimal values, and shows how they change the search effort.
use sspkit::domains::{generate_tw, TwConfig};
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{cg_ilao_solve, ilao_solve, optimal_values, SolverConfig};

fn main() {
    let ssp = generate_tw(&TwConfig::new(2, 4))
        .unwrap()
        .apply_fixed_penalty(500.0)
        .unwrap();
    let vstar = optimal_values(&ssp, 1e-8).unwrap();
    let mut hs = vec![Heuristic::zero(), Heuristic::determinization(&ssp)];
    for w in [0.1, 0.5, 0.9] {
        hs.push(Heuristic::perturbed(&ssp, w, 0).unwrap());
    }
    let cfg = SolverConfig::default();
    for h in &hs {
        let gap = ssp
            .states()
            .map(|s| vstar[s.index()] - h.value(s))
            .fold(0.0f64, f64::max);
        let il = ilao_solve(&ssp, h, &cfg).unwrap();
        let cg = cg_ilao_solve(&ssp, h, &cfg).unwrap();
        println!(
            "{:<20} max shortfall {:>8.3}  iLAO* {:>6} Q  CG-iLAO* {:>6} Q",
            h.kind().to_string(),
            gap,
            il.counters.q_values,
            cg.counters.q_values
        );
    }
}
