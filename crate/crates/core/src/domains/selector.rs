use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::model::ExplicitSsp;

use super::{fig2_example, generate_tw, random_layered_ssp, read_grounded, DomainError, RandomConfig, TwConfig};

/// Names a problem instance on the command line:
/// `tw:<n>,<d>[,nc]`, `file:<path>`, `fig2` or
/// `rand:<layers>,<width>,<branching>,<outcomes>,<seed>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSelector {
    Tw(TwConfig),
    File(PathBuf),
    Fig2,
    Random(RandomConfig),
}

/// An instance together with the heuristic table bundled with it, if any.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub ssp: ExplicitSsp,
    pub bundled_heuristic: Option<Vec<f64>>,
    pub domain: &'static str,
    pub instance: String,
}

impl ProblemSelector {
    pub fn domain(&self) -> &'static str {
        match self {
            ProblemSelector::Tw(_) => "tw",
            ProblemSelector::File(_) => "file",
            ProblemSelector::Fig2 => "fig2",
            ProblemSelector::Random(_) => "rand",
        }
    }

    pub fn load(&self) -> Result<LoadedProblem, DomainError> {
        let (ssp, bundled_heuristic) = match self {
            ProblemSelector::Tw(cfg) => (generate_tw(cfg)?, None),
            ProblemSelector::File(path) => (read_grounded(path)?, None),
            ProblemSelector::Fig2 => {
                let (ssp, h) = fig2_example();
                (ssp, Some(h))
            }
            ProblemSelector::Random(cfg) => (random_layered_ssp(cfg)?, None),
        };
        Ok(LoadedProblem {
            ssp,
            bundled_heuristic,
            domain: self.domain(),
            instance: self.to_string(),
        })
    }
}

impl fmt::Display for ProblemSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSelector::Tw(c) => {
                write!(f, "tw:{},{}", c.n, c.d)?;
                if !c.consumable_spares {
                    write!(f, ",nc")?;
                }
                Ok(())
            }
            ProblemSelector::File(p) => write!(f, "file:{}", p.display()),
            ProblemSelector::Fig2 => write!(f, "fig2"),
            ProblemSelector::Random(c) => write!(
                f,
                "rand:{},{},{},{},{}",
                c.layers, c.width, c.branching, c.max_outcomes, c.seed
            ),
        }
    }
}

fn numbers<T: FromStr>(args: &str, what: &str) -> Result<Vec<T>, DomainError> {
    args.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| DomainError::Config(format!("{what}: `{x}` is not a number")))
        })
        .collect()
}

impl FromStr for ProblemSelector {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "fig2" {
            return Ok(ProblemSelector::Fig2);
        }
        let (kind, args) = s.split_once(':').ok_or_else(|| {
            DomainError::Config(format!(
                "unknown problem `{s}` (expected tw:<n>,<d>[,nc], file:<path>, fig2 or rand:<l>,<w>,<b>,<o>,<seed>)"
            ))
        })?;
        match kind {
            "tw" => {
                let (args, nc) = match args.strip_suffix(",nc") {
                    Some(rest) => (rest, true),
                    None => (args, false),
                };
                let v: Vec<u32> = numbers(args, "tw")?;
                let [n, d] = v[..] else {
                    return Err(DomainError::Config(format!("tw expects <n>,<d>[,nc], got `{args}`")));
                };
                let mut cfg = TwConfig::new(n, d);
                if nc {
                    cfg = cfg.non_consumable();
                }
                cfg.validate()?;
                Ok(ProblemSelector::Tw(cfg))
            }
            "file" if !args.is_empty() => Ok(ProblemSelector::File(PathBuf::from(args))),
            "rand" => {
                let v: Vec<u64> = numbers(args, "rand")?;
                let [l, w, b, o, seed] = v[..] else {
                    return Err(DomainError::Config(format!(
                        "rand expects <layers>,<width>,<branching>,<outcomes>,<seed>, got `{args}`"
                    )));
                };
                if l == 0 || w == 0 || b == 0 || o == 0 {
                    return Err(DomainError::Config("rand parameters must be at least 1".into()));
                }
                Ok(ProblemSelector::Random(RandomConfig::new(
                    l as usize, w as usize, b as usize, o as usize, seed,
                )))
            }
            _ => Err(DomainError::Config(format!("unknown problem `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_round_trip() {
        for text in ["fig2", "tw:2,3", "tw:1,2,nc", "rand:3,4,2,2,9", "file:x/y.json"] {
            let sel: ProblemSelector = text.parse().unwrap();
            assert_eq!(sel.to_string(), text);
        }
    }

    #[test]
    fn bad_selectors_are_rejected() {
        for text in ["tw:2", "tw:2,9", "rand:1,2,3", "rand:0,1,1,1,1", "maze:1", "file:", "tw:a,b"] {
            assert!(text.parse::<ProblemSelector>().is_err(), "{text}");
        }
    }

    #[test]
    fn fig2_carries_its_heuristic() {
        let p = ProblemSelector::Fig2.load().unwrap();
        assert_eq!(p.bundled_heuristic.unwrap(), vec![3.0, 2.0, 1.0, 2.0, 0.0]);
        assert_eq!(p.domain, "fig2");
    }
}
