//! Triangle Tire World with a head start.
//!
//! Locations form a triangle of `2n+1` rows; row `i` holds `2n+2-i`
//! locations. The agent drives from a point on the left edge towards the
//! top-right corner and may get a flat tyre on every move.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ActionDef, ExplicitSsp, Outcome, StateId};

use super::DomainError;

/// Largest size whose locations fit the consumed-spare bitmask.
pub const MAX_SIZE: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub row: u32,
    pub col: u32,
}

impl Location {
    pub const fn new(row: u32, col: u32) -> Self {
        Location { row, col }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwConfig {
    pub n: u32,
    /// Distance of the start from the bottom-left corner, `1..=2n`.
    pub d: u32,
    /// Whether loading a spare uses it up.
    pub consumable_spares: bool,
}

impl TwConfig {
    pub fn new(n: u32, d: u32) -> Self {
        TwConfig {
            n,
            d,
            consumable_spares: true,
        }
    }

    /// The original problem of size `n`: start at the top-left corner.
    pub fn original(n: u32) -> Self {
        Self::new(n, 2 * n)
    }

    pub fn non_consumable(mut self) -> Self {
        self.consumable_spares = false;
        self
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.n == 0 || self.n > MAX_SIZE {
            return Err(DomainError::Config(format!(
                "tire world size must be in 1..={MAX_SIZE}, got {}",
                self.n
            )));
        }
        if self.d == 0 || self.d > 2 * self.n {
            return Err(DomainError::Config(format!(
                "head start must be in 1..={} for size {}, got {}",
                2 * self.n,
                self.n,
                self.d
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> u32 {
        2 * self.n + 1
    }

    pub fn row_len(&self, row: u32) -> u32 {
        2 * self.n + 2 - row
    }

    pub fn contains(&self, l: Location) -> bool {
        (1..=self.rows()).contains(&l.row) && (1..=self.row_len(l.row)).contains(&l.col)
    }

    pub fn start(&self) -> Location {
        Location::new(self.rows() - self.d, 1)
    }

    pub fn goal(&self) -> Location {
        Location::new(1, self.rows())
    }

    /// Every location, row by row.
    pub fn locations(&self) -> impl Iterator<Item = Location> + '_ {
        (1..=self.rows()).flat_map(move |i| (1..=self.row_len(i)).map(move |j| Location::new(i, j)))
    }

    fn location_index(&self, l: Location) -> u32 {
        // rows above `l.row` hold (2n+1) + 2n + ... + (2n+3-l.row) locations
        let before: u32 = (1..l.row).map(|i| self.row_len(i)).sum();
        before + l.col - 1
    }
}

/// Whether a spare tyre is placed at `l` initially.
pub fn has_spare(l: Location) -> bool {
    l.row >= 2 && !(l.row % 2 == 1 && l.col % 2 == 0)
}

/// Road edges leaving `from`, in action order: along the row, up a row,
/// then diagonally down a row.
fn edges_from(cfg: &TwConfig, from: Location) -> Vec<Location> {
    let Location { row: i, col: j } = from;
    let odd_row = i % 2 == 1;
    let odd_col = j % 2 == 1;
    let mut out = Vec::with_capacity(3);
    let along = Location::new(i, j + 1);
    if odd_row && cfg.contains(along) {
        out.push(along);
    }
    let up = Location::new(i + 1, j);
    if (odd_row || odd_col) && cfg.contains(up) {
        out.push(up);
    }
    if i >= 2 {
        let down = Location::new(i - 1, j + 1);
        if (!odd_row || (i >= 3 && odd_col)) && cfg.contains(down) {
            out.push(down);
        }
    }
    out
}

/// All road edges of the size-`n` triangle, grouped by source location.
pub fn road_edges(n: u32) -> Vec<(Location, Location)> {
    let cfg = TwConfig::new(n, 1);
    cfg.locations()
        .flat_map(|l| edges_from(&cfg, l).into_iter().map(move |t| (l, t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwState {
    pub location: Location,
    pub tyre_ok: bool,
    pub has_spare: bool,
    /// Spares already loaded, one bit per location index.
    pub consumed: u128,
}

impl TwState {
    fn name(&self, consumable: bool) -> String {
        let tyre = if self.tyre_ok { "ok" } else { "flat" };
        let spare = if self.has_spare { "spare" } else { "none" };
        if consumable {
            format!("{}:{tyre}:{spare}:{:x}", self.location, self.consumed)
        } else {
            format!("{}:{tyre}:{spare}", self.location)
        }
    }

    /// A spare is available at the current location.
    pub fn spare_here(&self, cfg: &TwConfig) -> bool {
        has_spare(self.location)
            && self.consumed & (1u128 << cfg.location_index(self.location)) == 0
    }
}

/// Builds the reachable SSP of `cfg`. State 0 is the start; any state at the
/// goal corner is a goal. Flat states with no spare on board or on the
/// ground have no actions.
pub fn generate_tw(cfg: &TwConfig) -> Result<ExplicitSsp, DomainError> {
    Ok(generate_tw_states(cfg)?.0)
}

/// [`generate_tw`] plus the decoded state behind each id.
pub fn generate_tw_states(cfg: &TwConfig) -> Result<(ExplicitSsp, Vec<TwState>), DomainError> {
    cfg.validate()?;
    let roads: HashMap<Location, Vec<Location>> =
        cfg.locations().map(|l| (l, edges_from(cfg, l))).collect();
    let goal = cfg.goal();
    let start = TwState {
        location: cfg.start(),
        tyre_ok: true,
        has_spare: false,
        consumed: 0,
    };

    let mut ids: HashMap<TwState, StateId> = HashMap::from([(start, StateId(0))]);
    let mut states = vec![start];
    let mut actions: Vec<Vec<ActionDef>> = Vec::new();
    let mut queue = VecDeque::from([start]);
    let mut intern = |st: TwState, states: &mut Vec<TwState>, queue: &mut VecDeque<TwState>| {
        *ids.entry(st).or_insert_with(|| {
            states.push(st);
            queue.push_back(st);
            StateId::from(states.len() - 1)
        })
    };

    while let Some(st) = queue.pop_front() {
        let mut acts = Vec::new();
        if st.location != goal {
            if st.tyre_ok {
                for &to in &roads[&st.location] {
                    let ok = intern(TwState { location: to, ..st }, &mut states, &mut queue);
                    let flat = intern(
                        TwState {
                            location: to,
                            tyre_ok: false,
                            ..st
                        },
                        &mut states,
                        &mut queue,
                    );
                    acts.push(ActionDef::new(
                        format!("move({},{})", st.location, to),
                        1.0,
                        vec![
                            Outcome { target: ok, prob: 0.5 },
                            Outcome { target: flat, prob: 0.5 },
                        ],
                    ));
                }
            }
            if !st.has_spare && st.spare_here(cfg) {
                let consumed = if cfg.consumable_spares {
                    st.consumed | 1u128 << cfg.location_index(st.location)
                } else {
                    st.consumed
                };
                let next = TwState {
                    has_spare: true,
                    consumed,
                    ..st
                };
                let t = intern(next, &mut states, &mut queue);
                acts.push(ActionDef::deterministic(
                    format!("load({})", st.location),
                    1.0,
                    t,
                ));
            }
            if !st.tyre_ok && st.has_spare {
                let next = TwState {
                    tyre_ok: true,
                    has_spare: false,
                    ..st
                };
                let t = intern(next, &mut states, &mut queue);
                acts.push(ActionDef::deterministic("change", 1.0, t));
            }
        }
        actions.push(acts);
    }

    let names = states
        .iter()
        .map(|s| s.name(cfg.consumable_spares))
        .collect();
    let goals: Vec<StateId> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.location == goal)
        .map(|(i, _)| StateId::from(i))
        .collect();
    let ssp = ExplicitSsp::new(names, StateId(0), goals, actions)?;
    Ok((ssp, states))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_set(n: u32) -> Vec<String> {
        let mut v: Vec<String> = road_edges(n)
            .into_iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        v.sort();
        v
    }

    fn sorted(list: &[&str]) -> Vec<String> {
        let mut v: Vec<String> = list.iter().map(|s| s.to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn size_one_layout() {
        let cfg = TwConfig::new(1, 2);
        assert_eq!(cfg.locations().count(), 6);
        assert_eq!(
            edge_set(1),
            sorted(&[
                "1-1->1-2", "1-1->2-1", "1-2->1-3", "1-2->2-2", "2-1->1-2", "2-1->3-1",
                "2-2->1-3", "3-1->2-2",
            ])
        );
        let spares: Vec<String> = cfg
            .locations()
            .filter(|&l| has_spare(l))
            .map(|l| l.to_string())
            .collect();
        assert_eq!(spares, ["2-1", "2-2", "3-1"]);
    }

    #[test]
    fn size_two_layout() {
        let cfg = TwConfig::new(2, 4);
        assert_eq!(cfg.locations().count(), 15);
        let expected = sorted(&[
            "1-1->1-2", "1-1->2-1", "1-2->1-3", "1-2->2-2", "1-3->1-4", "1-3->2-3",
            "1-4->1-5", "1-4->2-4", "2-1->1-2", "2-1->3-1", "2-2->1-3", "2-3->1-4",
            "2-3->3-3", "2-4->1-5", "3-1->3-2", "3-1->2-2", "3-1->4-1", "3-3->2-4",
            "3-2->3-3", "3-2->4-2", "4-1->3-2", "4-1->5-1", "4-2->3-3", "5-1->4-2",
        ]);
        assert_eq!(expected.len(), 24);
        assert_eq!(edge_set(2), expected);
        let bare: Vec<String> = cfg
            .locations()
            .filter(|&l| !has_spare(l))
            .map(|l| l.to_string())
            .collect();
        assert_eq!(bare, ["1-1", "1-2", "1-3", "1-4", "1-5", "3-2"]);
    }

    #[test]
    fn start_positions() {
        assert_eq!(TwConfig::new(2, 1).start(), Location::new(4, 1));
        assert_eq!(TwConfig::new(2, 4).start(), Location::new(1, 1));
        assert_eq!(TwConfig::new(1, 2).goal(), Location::new(1, 3));
    }

    #[test]
    fn bad_head_start_is_rejected() {
        assert!(generate_tw(&TwConfig::new(2, 5)).is_err());
        assert!(generate_tw(&TwConfig::new(2, 0)).is_err());
        assert!(generate_tw(&TwConfig::new(0, 1)).is_err());
    }

    #[test]
    fn dead_ends_are_flat_without_any_spare() {
        for cfg in [TwConfig::new(1, 2), TwConfig::new(2, 3), TwConfig::new(2, 4).non_consumable()] {
            let (ssp, states) = generate_tw_states(&cfg).unwrap();
            for s in ssp.states() {
                let st = states[s.index()];
                let stuck = !st.tyre_ok && !st.has_spare && !st.spare_here(&cfg);
                let dead = !ssp.is_goal(s) && ssp.actions(s).is_empty();
                assert_eq!(dead, stuck && st.location != cfg.goal(), "{}", ssp.name(s));
            }
        }
    }

    #[test]
    fn locations_are_a_dag() {
        // every road edge strictly increases 2·col + row
        for n in 1..=4 {
            for (a, b) in road_edges(n) {
                assert!(2 * b.col + b.row > 2 * a.col + a.row, "{a}->{b}");
            }
        }
    }
}
