//! Admissible heuristics: zero, optimistic determinization, and the
//! perturbed-optimal family `V*(s)·r` with `r` drawn from `(w, 1]`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ExplicitSsp, StateId};
use crate::solvers::optimal_values;

/// Penalty assumed when a determinization is built on an SSP that never
/// went through the fixed-penalty transform.
pub const DEFAULT_PENALTY: f64 = 500.0;

/// Largest instance the perturbed heuristic will run its VI oracle on.
pub const ORACLE_STATE_LIMIT: usize = 500_000;

/// Residual bound of the VI oracle behind [`Heuristic::perturbed`].
pub const ORACLE_EPSILON: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("perturbation weight must lie in [0, 1), got {0}")]
    Weight(f64),
    #[error("instance has {states} states; the VI oracle is limited to {limit}")]
    TooLarge { states: usize, limit: usize },
    #[error("VI oracle did not converge: {0}")]
    Oracle(String),
    #[error("unknown heuristic selector `{0}` (expected zero, det, pert:<w> or given)")]
    Selector(String),
    #[error("table has {got} entries for {expected} states")]
    TableSize { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeuristicKind {
    Zero,
    Determinization,
    Perturbed { w: f64, seed: u64 },
    Table(String),
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicKind::Zero => write!(f, "zero"),
            HeuristicKind::Determinization => write!(f, "det"),
            HeuristicKind::Perturbed { w, .. } => write!(f, "pert:{w}"),
            HeuristicKind::Table(name) => write!(f, "{name}"),
        }
    }
}

/// A heuristic as a read-only table over the states of one SSP (or the
/// constant zero function).
#[derive(Debug, Clone, PartialEq)]
pub struct Heuristic {
    kind: HeuristicKind,
    table: Option<Vec<f64>>,
}

impl Heuristic {
    pub fn zero() -> Self {
        Heuristic {
            kind: HeuristicKind::Zero,
            table: None,
        }
    }

    pub fn from_table(name: impl Into<String>, table: Vec<f64>) -> Self {
        Heuristic {
            kind: HeuristicKind::Table(name.into()),
            table: Some(table),
        }
    }

    /// Cheapest cost to any goal when each action may pick whichever of its
    /// successors it likes. Computed by a backward uniform-cost sweep over
    /// the predecessor index; states with no such path get the penalty.
    pub fn determinization(ssp: &ExplicitSsp) -> Self {
        let cap = ssp.penalty().unwrap_or(DEFAULT_PENALTY);
        let mut dist = vec![f64::INFINITY; ssp.num_states()];
        let mut heap = BinaryHeap::new();
        for &g in ssp.goals() {
            dist[g.index()] = 0.0;
            heap.push(Frontier(0.0, g));
        }
        while let Some(Frontier(d, s)) = heap.pop() {
            if d > dist[s.index()] {
                continue;
            }
            for &(p, a) in ssp.predecessors(s) {
                let nd = d + ssp.actions(p)[a].cost;
                if nd < dist[p.index()] {
                    dist[p.index()] = nd;
                    heap.push(Frontier(nd, p));
                }
            }
        }
        for d in &mut dist {
            *d = d.min(cap);
        }
        Heuristic {
            kind: HeuristicKind::Determinization,
            table: Some(dist),
        }
    }

    /// `V*(s)·r(s)` with `r(s)` uniform on `(w, 1]`, drawn from a ChaCha8
    /// stream keyed by `(seed, s)` so the value of a state does not depend
    /// on evaluation order. `V*` comes from value iteration started at zero,
    /// which approaches `V*` from below.
    pub fn perturbed(ssp: &ExplicitSsp, w: f64, seed: u64) -> Result<Self, HeuristicError> {
        if !(0.0..1.0).contains(&w) {
            return Err(HeuristicError::Weight(w));
        }
        if ssp.num_states() > ORACLE_STATE_LIMIT {
            return Err(HeuristicError::TooLarge {
                states: ssp.num_states(),
                limit: ORACLE_STATE_LIMIT,
            });
        }
        let vstar = optimal_values(ssp, ORACLE_EPSILON)
            .map_err(|e| HeuristicError::Oracle(e.to_string()))?;
        Ok(Self::perturb(&vstar, w, seed))
    }

    /// The perturbation step of [`Heuristic::perturbed`] applied to a given
    /// value table.
    pub fn perturb(vstar: &[f64], w: f64, seed: u64) -> Self {
        let table = vstar
            .iter()
            .enumerate()
            .map(|(i, &v)| v * perturbation_factor(w, seed, StateId::from(i)))
            .collect();
        Heuristic {
            kind: HeuristicKind::Perturbed { w, seed },
            table: Some(table),
        }
    }

    /// Caps every entry at `cap`.
    pub fn clamped(mut self, cap: f64) -> Self {
        if let Some(t) = self.table.as_mut() {
            for v in t {
                *v = v.min(cap);
            }
        }
        self
    }

    pub fn kind(&self) -> &HeuristicKind {
        &self.kind
    }

    pub fn table(&self) -> Option<&[f64]> {
        self.table.as_deref()
    }

    #[inline]
    pub fn value(&self, s: StateId) -> f64 {
        match &self.table {
            None => 0.0,
            Some(t) => t[s.index()],
        }
    }

    pub fn check_size(&self, ssp: &ExplicitSsp) -> Result<(), HeuristicError> {
        match &self.table {
            Some(t) if t.len() != ssp.num_states() => Err(HeuristicError::TableSize {
                got: t.len(),
                expected: ssp.num_states(),
            }),
            _ => Ok(()),
        }
    }
}

/// `r ∈ (w, 1]` for state `s`.
pub fn perturbation_factor(w: f64, seed: u64, s: StateId) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s.0 as u64);
    let u: f64 = rng.gen();
    1.0 - u * (1.0 - w)
}

#[derive(PartialEq)]
struct Frontier(f64, StateId);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Command-line heuristic selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeuristicSpec {
    Zero,
    Det,
    Pert(f64),
    /// The table bundled with the problem (only the Fig-2 fixture has one).
    Given,
}

impl FromStr for HeuristicSpec {
    type Err = HeuristicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(HeuristicSpec::Zero),
            "det" => Ok(HeuristicSpec::Det),
            "given" => Ok(HeuristicSpec::Given),
            _ => {
                let w = s
                    .strip_prefix("pert:")
                    .and_then(|w| w.parse::<f64>().ok())
                    .ok_or_else(|| HeuristicError::Selector(s.to_string()))?;
                if !(0.0..1.0).contains(&w) {
                    return Err(HeuristicError::Weight(w));
                }
                Ok(HeuristicSpec::Pert(w))
            }
        }
    }
}

impl fmt::Display for HeuristicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicSpec::Zero => write!(f, "zero"),
            HeuristicSpec::Det => write!(f, "det"),
            HeuristicSpec::Pert(w) => write!(f, "pert:{w}"),
            HeuristicSpec::Given => write!(f, "given"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{fig2_example, generate_tw, TwConfig};

    /// Plain Dijkstra over forward edges from each state, run once per
    /// source; independent of the backward sweep.
    fn forward_shortest(ssp: &ExplicitSsp, from: StateId) -> f64 {
        let mut dist = vec![f64::INFINITY; ssp.num_states()];
        let mut done = vec![false; ssp.num_states()];
        dist[from.index()] = 0.0;
        loop {
            let next = (0..dist.len())
                .filter(|&i| !done[i] && dist[i].is_finite())
                .min_by(|&a, &b| dist[a].total_cmp(&dist[b]));
            let Some(i) = next else { break };
            done[i] = true;
            let s = StateId::from(i);
            if ssp.is_goal(s) {
                return dist[i];
            }
            for act in ssp.actions(s) {
                for t in act.successors() {
                    dist[t.index()] = dist[t.index()].min(dist[i] + act.cost);
                }
            }
        }
        f64::INFINITY
    }

    #[test]
    fn zero_is_zero() {
        let (ssp, _) = fig2_example();
        let h = Heuristic::zero();
        assert!(ssp.states().all(|s| h.value(s) == 0.0));
    }

    #[test]
    fn determinization_on_fig2_is_optimal() {
        let (ssp, _) = fig2_example();
        let h = Heuristic::determinization(&ssp);
        assert_eq!(h.table().unwrap(), &[4.0, 3.0, 3.0, 2.0, 0.0]);
        for s in ssp.states() {
            assert_eq!(h.value(s), forward_shortest(&ssp, s));
        }
    }

    #[test]
    fn determinization_on_tw_1_2_start_is_two() {
        let ssp = generate_tw(&TwConfig::new(1, 2)).unwrap();
        let ssp = ssp.apply_fixed_penalty(500.0).unwrap();
        let h = Heuristic::determinization(&ssp);
        assert_eq!(h.value(ssp.initial()), 2.0);
        for &g in ssp.goals() {
            assert_eq!(h.value(g), 0.0);
        }
        for s in ssp.states() {
            assert_eq!(h.value(s), forward_shortest(&ssp, s).min(500.0));
        }
    }

    #[test]
    fn perturbed_interval_and_determinism() {
        let ssp = generate_tw(&TwConfig::new(1, 2))
            .unwrap()
            .apply_fixed_penalty(500.0)
            .unwrap();
        let vstar = optimal_values(&ssp, ORACLE_EPSILON).unwrap();
        for &w in &[0.0, 0.5, 0.999] {
            let h = Heuristic::perturbed(&ssp, w, 7).unwrap();
            for s in ssp.states() {
                let v = vstar[s.index()];
                let hv = h.value(s);
                assert!(hv <= v);
                if v > 0.0 {
                    assert!(hv > w * v, "w={w} h={hv} v*={v}");
                }
            }
            assert_eq!(h, Heuristic::perturbed(&ssp, w, 7).unwrap());
        }
        assert_ne!(
            Heuristic::perturbed(&ssp, 0.0, 1).unwrap(),
            Heuristic::perturbed(&ssp, 0.0, 2).unwrap()
        );
    }

    #[test]
    fn perturbed_rejects_bad_weight() {
        let (ssp, _) = fig2_example();
        assert!(matches!(
            Heuristic::perturbed(&ssp, 1.0, 0),
            Err(HeuristicError::Weight(_))
        ));
        assert!(matches!(
            Heuristic::perturbed(&ssp, -0.1, 0),
            Err(HeuristicError::Weight(_))
        ));
    }

    #[test]
    fn factor_is_order_independent() {
        let a: Vec<f64> = (0..50u32)
            .map(|i| perturbation_factor(0.3, 11, StateId(i)))
            .collect();
        let b: Vec<f64> = (0..50u32)
            .rev()
            .map(|i| perturbation_factor(0.3, 11, StateId(i)))
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|&r| r > 0.3 && r <= 1.0));
    }

    #[test]
    fn selectors_parse() {
        assert_eq!("zero".parse::<HeuristicSpec>().unwrap(), HeuristicSpec::Zero);
        assert_eq!("det".parse::<HeuristicSpec>().unwrap(), HeuristicSpec::Det);
        assert_eq!(
            "pert:0.25".parse::<HeuristicSpec>().unwrap(),
            HeuristicSpec::Pert(0.25)
        );
        assert!("pert:1".parse::<HeuristicSpec>().is_err());
        assert!("pert:x".parse::<HeuristicSpec>().is_err());
        assert!("lmcut".parse::<HeuristicSpec>().is_err());
    }
}
