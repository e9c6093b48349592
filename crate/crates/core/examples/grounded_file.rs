//! Writes a random SSP to grounded JSON, reads it back and solves it.
use sspkit::domains::{random_layered_ssp, read_grounded, write_grounded, RandomConfig};
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{vi_solve, SolverConfig};

fn main() {
    let ssp = random_layered_ssp(&RandomConfig::new(4, 3, 2, 3, 42)).unwrap();
    let path = std::env::temp_dir().join("sspkit_random.json");
    write_grounded(&ssp, &path).unwrap();
    let back = read_grounded(&path).unwrap();
    println!("{}: {} states, {} actions", path.display(), back.num_states(), back.total_actions());

    let back = back.apply_fixed_penalty(500.0).unwrap();
    let zero = Heuristic::zero();
    let r = vi_solve(&back, &zero, &SolverConfig::default()).unwrap();
    println!("V(s0) = {:.4} after {} sweeps", r.v_s0, r.iterations);

    match sspkit::domains::parse_grounded(r#"{"states":["a"],"initial":"a","goals":["b"],"actions":{}}"#) {
        Ok(_) => unreachable!(),
        Err(e) => println!("malformed input is rejected: {e}"),
    }
}
