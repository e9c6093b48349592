//! How many actions per expanded state each LAO variant keeps.
use sspkit::bench::density_report;
use sspkit::domains::{generate_tw, TwConfig};
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{cg_ilao_solve, ilao_solve, SolverConfig};

fn main() {
    let ssp = generate_tw(&TwConfig::new(3, 6))
        .unwrap()
        .apply_fixed_penalty(500.0)
        .unwrap();
    let h = Heuristic::determinization(&ssp);
    let cfg = SolverConfig::default();
    let il = ilao_solve(&ssp, &h, &cfg).unwrap();
    let cg = cg_ilao_solve(&ssp, &h, &cfg).unwrap();
    println!("iLAO*:\n{}", density_report(il.partial.as_ref().unwrap()));
    println!("CG-iLAO*:\n{}", density_report(cg.partial.as_ref().unwrap()));
}
