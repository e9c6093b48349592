use sspkit::domains::{generate_tw, has_spare, ProblemSelector, TwConfig};
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{optimal_values, vi_solve, SolverConfig};

fn tw_value(n: u32, d: u32) -> f64 {
    let ssp = generate_tw(&TwConfig::new(n, d))
        .unwrap()
        .apply_fixed_penalty(500.0)
        .unwrap();
    let zero = Heuristic::zero();
    let r = vi_solve(&ssp, &zero, &SolverConfig::default()).unwrap();
    assert!(r.solved());
    r.v_s0
}

#[test]
fn tire_world_gets_harder_with_distance() {
    for n in 1..=2 {
        let values: Vec<f64> = (1..=2 * n).map(|d| tw_value(n, d)).collect();
        for pair in values.windows(2) {
            assert!(pair[0] <= pair[1] + 1e-9, "n={n}: {values:?}");
        }
    }
}

#[test]
fn penalty_transform_leaves_every_value_finite() {
    for n in 1..=3 {
        for d in 1..=2 * n {
            let raw = generate_tw(&TwConfig::new(n, d)).unwrap();
            let ssp = raw.apply_fixed_penalty(500.0).unwrap();
            assert!(ssp.dead_ends().is_empty());
            let v = optimal_values(&ssp, 1e-6).unwrap();
            assert!(v.iter().all(|x| x.is_finite() && *x <= 500.0 + 1e-6), "tw:{n},{d}");
        }
    }
}

#[test]
fn original_tire_world_has_dead_ends_that_the_transform_removes() {
    let raw = generate_tw(&TwConfig::new(2, 4)).unwrap();
    assert!(!raw.dead_ends().is_empty());
    assert!(raw.apply_fixed_penalty(500.0).unwrap().dead_ends().is_empty());
}

#[test]
fn non_consumable_spares_never_cost_more() {
    for (n, d) in [(1, 2), (2, 3), (2, 4)] {
        let consumable = tw_value(n, d);
        let ssp = generate_tw(&TwConfig::new(n, d).non_consumable())
            .unwrap()
            .apply_fixed_penalty(500.0)
            .unwrap();
        let zero = Heuristic::zero();
        let v = vi_solve(&ssp, &zero, &SolverConfig::default()).unwrap().v_s0;
        assert!(v <= consumable + 1e-6, "tw:{n},{d}: {v} > {consumable}");
    }
}

#[test]
fn state_space_grows_with_size() {
    let sizes: Vec<usize> = (1..=4)
        .map(|n| generate_tw(&TwConfig::new(n, 1)).unwrap().num_states())
        .collect();
    assert!(sizes.windows(2).all(|w| w[0] < w[1]), "{sizes:?}");
}

#[test]
fn goal_row_has_no_spares() {
    for n in 1..=4 {
        let cfg = TwConfig::original(n);
        assert!(cfg.locations().filter(|l| l.row == 1).all(|l| !has_spare(l)));
    }
}

#[test]
fn selectors_round_trip_through_display() {
    for text in ["tw:2,3", "tw:2,3,nc", "fig2", "rand:3,4,2,2,7", "file:some/path.json"] {
        let sel: ProblemSelector = text.parse().unwrap();
        assert_eq!(sel.to_string(), text);
    }
    for bad in ["tw:0,1", "tw:2", "rand:1,2", "nope", "tw:2,9"] {
        assert!(bad.parse::<ProblemSelector>().is_err(), "{bad}");
    }
}
