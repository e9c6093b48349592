use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ActionDef, ExplicitSsp, Outcome, StateId};

use super::DomainError;

/// Shape of a random layered SSP.
///
/// Layer 0 is `s0` alone, layers `1..layers` hold `width` states each, and a
/// final layer of `width` goals follows. Every state gets `branching`
/// actions with between 1 and `max_outcomes` outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomConfig {
    pub layers: usize,
    pub width: usize,
    pub branching: usize,
    pub max_outcomes: usize,
    pub seed: u64,
}

impl RandomConfig {
    pub fn new(layers: usize, width: usize, branching: usize, max_outcomes: usize, seed: u64) -> Self {
        RandomConfig {
            layers,
            width,
            branching,
            max_outcomes,
            seed,
        }
    }

    pub fn num_states(&self) -> usize {
        1 + self.layers * self.width
    }
}

/// Chance that an outcome after the first goes backwards or sideways.
const BACK_EDGE_RATE: f64 = 0.2;

/// Seeded layered SSP: mostly forward edges plus some back edges, costs in
/// `[0.1, 10]`. The first action of every state has an outcome in the next
/// layer, so the goal layer is reachable with positive probability from
/// everywhere and no state is a dead end.
pub fn random_layered_ssp(cfg: &RandomConfig) -> Result<ExplicitSsp, DomainError> {
    let RandomConfig {
        layers,
        width,
        branching,
        max_outcomes,
        seed,
    } = *cfg;
    if layers == 0 || width == 0 || branching == 0 || max_outcomes == 0 {
        return Err(DomainError::Config(
            "random SSP parameters must all be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // layer k > 0 starts at 1 + (k-1)·width; layer `layers` is the goals
    let layer_of = |k: usize| -> Vec<StateId> {
        if k == 0 {
            vec![StateId(0)]
        } else {
            (0..width)
                .map(|x| StateId::from(1 + (k - 1) * width + x))
                .collect()
        }
    };
    let n = cfg.num_states();
    let mut names = Vec::with_capacity(n);
    names.push("s0".to_string());
    for k in 1..=layers {
        for x in 0..width {
            names.push(if k == layers {
                format!("g{x}")
            } else {
                format!("l{k}.{x}")
            });
        }
    }

    let mut actions = vec![Vec::new(); n];
    for k in 0..layers {
        let forward = layer_of(k + 1);
        let behind: Vec<StateId> = (0..=k).flat_map(layer_of).collect();
        for s in layer_of(k) {
            for a in 0..branching {
                let want = rng.gen_range(1..=max_outcomes);
                let mut targets: Vec<StateId> = Vec::with_capacity(want);
                if a == 0 {
                    targets.push(*forward.choose(&mut rng).expect("width ≥ 1"));
                }
                let mut attempts = 0;
                while targets.len() < want && attempts < 8 * want {
                    attempts += 1;
                    let pool = if rng.gen_bool(BACK_EDGE_RATE) { &behind } else { &forward };
                    let t = *pool.choose(&mut rng).expect("pools are nonempty");
                    if !targets.contains(&t) {
                        targets.push(t);
                    }
                }
                let weights: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.05..=1.0)).collect();
                let total: f64 = weights.iter().sum();
                let outcomes = targets
                    .into_iter()
                    .zip(weights)
                    .map(|(target, w)| Outcome {
                        target,
                        prob: w / total,
                    })
                    .collect();
                let cost = rng.gen_range(0.1..=10.0);
                actions[s.index()].push(ActionDef::new(format!("a{a}"), cost, outcomes));
            }
        }
    }
    Ok(ExplicitSsp::checked(names, StateId(0), layer_of(layers), actions)?)
}
