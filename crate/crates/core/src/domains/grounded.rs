//! Grounded SSPs as JSON:
//!
//! ```json
//! {
//!   "states": ["s", "g"],
//!   "initial": "s",
//!   "goals": ["g"],
//!   "actions": {
//!     "s": [{ "name": "go", "cost": 1.0, "outcomes": [{ "target": "g", "prob": 1.0 }] }]
//!   }
//! }
//! ```

use std::collections::HashMap;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::model::{ActionDef, ExplicitSsp, Outcome, StateId, PROBABILITY_SUM_TOLERANCE};

use super::DomainError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSsp {
    states: Vec<String>,
    initial: String,
    goals: Vec<String>,
    #[serde(default)]
    actions: IndexMap<String, Vec<FileAction>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAction {
    name: String,
    cost: f64,
    outcomes: Vec<FileOutcome>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOutcome {
    target: String,
    prob: f64,
}

/// Parses and validates a grounded SSP. Errors name the offending field.
pub fn parse_grounded(text: &str) -> Result<ExplicitSsp, DomainError> {
    let file: FileSsp = serde_json::from_str(text)?;
    let mut index = HashMap::with_capacity(file.states.len());
    for (i, name) in file.states.iter().enumerate() {
        if index.insert(name.as_str(), StateId::from(i)).is_some() {
            return Err(DomainError::schema(
                format!("states[{i}]"),
                format!("duplicate state name `{name}`"),
            ));
        }
    }
    let lookup = |name: &str, at: String| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| DomainError::schema(at, format!("unknown state `{name}`")))
    };

    let initial = lookup(&file.initial, "initial".into())?;
    if file.goals.is_empty() {
        return Err(DomainError::schema("goals", "at least one goal is required"));
    }
    let mut goals = Vec::with_capacity(file.goals.len());
    for (i, g) in file.goals.iter().enumerate() {
        goals.push(lookup(g, format!("goals[{i}]"))?);
    }

    let mut actions: Vec<Vec<ActionDef>> = vec![Vec::new(); file.states.len()];
    for (state, acts) in &file.actions {
        let s = lookup(state, format!("actions[{state:?}]"))?;
        if goals.contains(&s) && !acts.is_empty() {
            return Err(DomainError::schema(
                format!("actions[{state:?}]"),
                "goal states must not have actions",
            ));
        }
        for (k, act) in acts.iter().enumerate() {
            let at = format!("actions[{state:?}][{k}]");
            if !(act.cost > 0.0 && act.cost.is_finite()) {
                return Err(DomainError::schema(
                    format!("{at}.cost"),
                    format!("cost must be positive and finite, got {}", act.cost),
                ));
            }
            if act.outcomes.is_empty() {
                return Err(DomainError::schema(format!("{at}.outcomes"), "no outcomes"));
            }
            let mut outcomes = Vec::with_capacity(act.outcomes.len());
            let mut sum = 0.0;
            for (m, o) in act.outcomes.iter().enumerate() {
                let oat = format!("{at}.outcomes[{m}]");
                let target = lookup(&o.target, format!("{oat}.target"))?;
                if !(o.prob > 0.0 && o.prob <= 1.0) {
                    return Err(DomainError::schema(
                        format!("{oat}.prob"),
                        format!("probability must lie in (0, 1], got {}", o.prob),
                    ));
                }
                if outcomes.iter().any(|x: &Outcome| x.target == target) {
                    return Err(DomainError::schema(
                        format!("{oat}.target"),
                        format!("`{}` appears twice", o.target),
                    ));
                }
                sum += o.prob;
                outcomes.push(Outcome {
                    target,
                    prob: o.prob,
                });
            }
            if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                return Err(DomainError::schema(
                    format!("{at}.outcomes"),
                    format!("probabilities sum to {sum}, not 1"),
                ));
            }
            actions[s.index()].push(ActionDef::new(act.name.clone(), act.cost, outcomes));
        }
    }
    Ok(ExplicitSsp::checked(file.states, initial, goals, actions)?)
}

pub fn read_grounded(path: impl AsRef<Path>) -> Result<ExplicitSsp, DomainError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_grounded(&text)
}

/// Pretty-printed JSON in the format [`parse_grounded`] reads. States with
/// no actions are left out of the `actions` map.
pub fn serialize_grounded(ssp: &ExplicitSsp) -> String {
    let name = |s: StateId| ssp.name(s).to_string();
    let actions = ssp
        .states()
        .filter(|&s| !ssp.actions(s).is_empty())
        .map(|s| {
            let acts = ssp
                .actions(s)
                .iter()
                .map(|a| FileAction {
                    name: a.name.clone(),
                    cost: a.cost,
                    outcomes: a
                        .outcomes
                        .iter()
                        .map(|o| FileOutcome {
                            target: name(o.target),
                            prob: o.prob,
                        })
                        .collect(),
                })
                .collect();
            (name(s), acts)
        })
        .collect();
    let file = FileSsp {
        states: ssp.names().to_vec(),
        initial: name(ssp.initial()),
        goals: ssp.goals().iter().map(|&g| name(g)).collect(),
        actions,
    };
    serde_json::to_string_pretty(&file).expect("grounded SSPs always serialize")
}

pub fn write_grounded(ssp: &ExplicitSsp, path: impl AsRef<Path>) -> Result<(), DomainError> {
    let path = path.as_ref();
    std::fs::write(path, serialize_grounded(ssp)).map_err(|source| DomainError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::fig2_example;

    const TINY: &str = r#"{
        "states": ["s", "t", "g"],
        "initial": "s",
        "goals": ["g"],
        "actions": {
            "s": [{"name": "a", "cost": 1, "outcomes": [{"target": "t", "prob": 0.5}, {"target": "g", "prob": 0.5}]}],
            "t": [{"name": "b", "cost": 2, "outcomes": [{"target": "g", "prob": 1}]}]
        }
    }"#;

    #[test]
    fn parses_tiny_file() {
        let ssp = parse_grounded(TINY).unwrap();
        assert_eq!(ssp.num_states(), 3);
        assert_eq!(ssp.actions(StateId(0))[0].outcomes.len(), 2);
        assert_eq!(ssp.goals(), &[StateId(2)]);
    }

    #[test]
    fn fixture_round_trips() {
        let (ssp, _) = fig2_example();
        let back = parse_grounded(&serialize_grounded(&ssp)).unwrap();
        assert_eq!(back, ssp);
    }

    fn rejection(text: &str) -> String {
        parse_grounded(text).unwrap_err().to_string()
    }

    #[test]
    fn short_probabilities_are_rejected() {
        let bad = TINY.replace(r#""prob": 0.5}, {"target": "g", "prob": 0.5}"#, r#""prob": 0.5}, {"target": "g", "prob": 0.4}"#);
        let msg = rejection(&bad);
        assert!(msg.contains("actions[\"s\"][0].outcomes"), "{msg}");
        assert!(msg.contains("sum"), "{msg}");
    }

    #[test]
    fn unknown_target_is_rejected() {
        let msg = rejection(&TINY.replace(r#""target": "t""#, r#""target": "nowhere""#));
        assert!(msg.contains("outcomes[0].target"), "{msg}");
        assert!(msg.contains("nowhere"), "{msg}");
    }

    #[test]
    fn duplicate_names_and_bad_costs_are_rejected() {
        let msg = rejection(&TINY.replace(r#"["s", "t", "g"]"#, r#"["s", "t", "t", "g"]"#));
        assert!(msg.contains("states[2]"), "{msg}");
        let msg = rejection(&TINY.replace(r#""cost": 2"#, r#""cost": 0"#));
        assert!(msg.contains("actions[\"t\"][0].cost"), "{msg}");
    }

    #[test]
    fn goal_with_actions_is_rejected() {
        let bad = TINY.replace(r#""goals": ["g"]"#, r#""goals": ["t"]"#);
        assert!(rejection(&bad).contains("goal states must not have actions"));
    }

    #[test]
    fn malformed_json_reports_position() {
        let msg = rejection("{\"states\": [");
        assert!(msg.contains("line"), "{msg}");
    }
}
