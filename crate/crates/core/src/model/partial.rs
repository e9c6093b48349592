use std::ops::Range;
use std::slice;

use super::{ExplicitSsp, ModelError, StateId};

/// Which actions a Bellman backup may consider in a state, and which states
/// are terminal. Implemented by the full SSP and by partial SSPs.
pub trait ActionScope {
    fn base(&self) -> &ExplicitSsp;

    /// Terminal states are never backed up: real goals, and for partial SSPs
    /// also artificial goals.
    fn is_terminal(&self, s: StateId) -> bool;

    fn scoped_actions(&self, s: StateId) -> Actions<'_>;
}

/// Iterator over action ordinals.
#[derive(Debug, Clone)]
pub enum Actions<'a> {
    All(Range<usize>),
    Subset(slice::Iter<'a, usize>),
}

impl Iterator for Actions<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        match self {
            Actions::All(r) => r.next(),
            Actions::Subset(it) => it.next().copied(),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            Actions::All(r) => r.size_hint(),
            Actions::Subset(it) => it.size_hint(),
        }
    }
}

impl ExactSizeIterator for Actions<'_> {}

impl ActionScope for ExplicitSsp {
    fn base(&self) -> &ExplicitSsp {
        self
    }

    fn is_terminal(&self, s: StateId) -> bool {
        self.is_goal(s)
    }

    fn scoped_actions(&self, s: StateId) -> Actions<'_> {
        Actions::All(0..self.num_actions(s))
    }
}

/// A sub-SSP over a subset of states and actions of a base SSP.
///
/// Tips (`Ĝ`) are terminal: real goals plus artificial goals, the latter
/// priced by the heuristic. Non-tip members carry at least one action and
/// every outcome of a member action is itself a member.
#[derive(Debug, Clone)]
pub struct PartialSsp<'a> {
    base: &'a ExplicitSsp,
    member: Vec<bool>,
    tip: Vec<bool>,
    actions: Vec<Vec<usize>>,
    order: Vec<StateId>,
}

impl<'a> PartialSsp<'a> {
    /// The initial partial SSP: only `s0`, which is also its only tip.
    pub fn new(base: &'a ExplicitSsp) -> Self {
        let n = base.num_states();
        let mut p = PartialSsp {
            base,
            member: vec![false; n],
            tip: vec![false; n],
            actions: vec![Vec::new(); n],
            order: Vec::new(),
        };
        p.admit(base.initial());
        p
    }

    fn admit(&mut self, s: StateId) -> bool {
        if self.member[s.index()] {
            return false;
        }
        self.member[s.index()] = true;
        self.tip[s.index()] = true;
        self.order.push(s);
        true
    }

    pub fn base_ssp(&self) -> &'a ExplicitSsp {
        self.base
    }

    #[inline]
    pub fn contains(&self, s: StateId) -> bool {
        self.member[s.index()]
    }

    #[inline]
    pub fn is_tip(&self, s: StateId) -> bool {
        self.tip[s.index()]
    }

    #[inline]
    pub fn is_artificial_goal(&self, s: StateId) -> bool {
        self.tip[s.index()] && !self.base.is_goal(s)
    }

    /// Member, not a tip.
    #[inline]
    pub fn is_interior(&self, s: StateId) -> bool {
        self.member[s.index()] && !self.tip[s.index()]
    }

    pub fn actions(&self, s: StateId) -> &[usize] {
        &self.actions[s.index()]
    }

    pub fn has_action(&self, s: StateId, ordinal: usize) -> bool {
        self.actions[s.index()].binary_search(&ordinal).is_ok()
    }

    /// Members in admission order.
    pub fn states(&self) -> &[StateId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Turns an artificial goal into a regular state. Must be followed by
    /// [`PartialSsp::add_actions`] with a nonempty set.
    pub fn open_tip(&mut self, s: StateId) -> Result<(), ModelError> {
        if !self.is_artificial_goal(s) {
            return Err(ModelError::Contract(format!(
                "{s} is not an artificial goal of the partial SSP"
            )));
        }
        self.tip[s.index()] = false;
        Ok(())
    }

    /// Adds `ordinals` to `Â(s)`. Outcome targets not yet in the partial SSP
    /// join it as tips. Returns the newly admitted states.
    pub fn add_actions(
        &mut self,
        s: StateId,
        ordinals: &[usize],
    ) -> Result<Vec<StateId>, ModelError> {
        if !self.contains(s) {
            return Err(ModelError::Contract(format!("{s} is not in the partial SSP")));
        }
        let base = self.base;
        let mut admitted = Vec::new();
        for &a in ordinals {
            let act = base.action(s, a)?;
            let list = &mut self.actions[s.index()];
            match list.binary_search(&a) {
                Ok(_) => continue,
                Err(pos) => list.insert(pos, a),
            }
            for t in act.successors() {
                if self.admit(t) {
                    admitted.push(t);
                }
            }
        }
        Ok(admitted)
    }

    /// `{(s, a) : a ∈ A(s) \ Â(s)}`.
    pub fn external_successor_pairs(&self, s: StateId) -> Vec<(StateId, usize)> {
        let own = &self.actions[s.index()];
        (0..self.base.num_actions(s))
            .filter(|a| own.binary_search(a).is_err())
            .map(|a| (s, a))
            .collect()
    }

    /// `Σ_{s ∈ Ŝ} |Â(s)|`.
    pub fn partial_action_count(&self) -> usize {
        self.order.iter().map(|s| self.actions[s.index()].len()).sum()
    }

    /// `Σ_{s ∈ Ŝ} |A(s)|`.
    pub fn potential_action_count(&self) -> usize {
        self.order.iter().map(|&s| self.base.num_actions(s)).sum()
    }

    /// Checks the partial-SSP invariants; returns the first broken one.
    pub fn check_invariants(&self) -> Result<(), String> {
        for &s in &self.order {
            if self.base.is_goal(s) && !self.tip[s.index()] {
                return Err(format!("goal {s} is a member but not a tip"));
            }
            let own = &self.actions[s.index()];
            if !self.tip[s.index()] && own.is_empty() {
                return Err(format!("non-tip {s} has no actions"));
            }
            for &a in own {
                let act = self
                    .base
                    .action(s, a)
                    .map_err(|e| format!("{s}: {e}"))?;
                for t in act.successors() {
                    if !self.contains(t) {
                        return Err(format!("{s} action {a} leads outside to {t}"));
                    }
                }
            }
        }
        if !self.contains(self.base.initial()) {
            return Err("initial state missing".into());
        }
        let tips = self.order.iter().filter(|s| self.tip[s.index()]).count();
        if tips == self.order.len() && self.order.len() > 1 {
            return Err("every member is a tip".into());
        }
        for i in 0..self.member.len() {
            if !self.member[i] && (self.tip[i] || !self.actions[i].is_empty()) {
                return Err(format!("non-member #{i} carries partial state"));
            }
        }
        Ok(())
    }
}

impl ActionScope for PartialSsp<'_> {
    fn base(&self) -> &ExplicitSsp {
        self.base
    }

    fn is_terminal(&self, s: StateId) -> bool {
        !self.member[s.index()] || self.tip[s.index()]
    }

    fn scoped_actions(&self, s: StateId) -> Actions<'_> {
        Actions::Subset(self.actions[s.index()].iter())
    }
}
