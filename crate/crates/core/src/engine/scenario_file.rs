//! Scenario files.
//!
//! ```text
//! init KNO3 3.8835e-3         # mol/L
//! volume 1.0                  # L
//! at 0.01 add KNO3 4e-3 in 0.01
//! at 0.02 dilute 0.1
//! dt 1e-8
//! max_steps 2500000
//! tolerance 1e-9
//! sample_every 10000
//! ```

use thiserror::Error;

use crate::dsl::tokenize;

use super::types::{Event, EventKind, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("scenario line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

/// Parse a scenario file. Settings not given keep their defaults
/// ([`Scenario::default`]); `max_steps` or `tolerance` given alone disables
/// nothing, both stay active.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut scenario = Scenario::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ScenarioError { line, message };
        let tokens: Vec<&str> = tokenize(raw).iter().map(|t| t.text).collect();
        let Some(&head) = tokens.first() else {
            continue;
        };
        let float = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("expected a number, found `{s}`")))
        };
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(format!("expected a positive integer, found `{s}`")))
        };
        let arity = |n: usize| {
            if tokens.len() == n {
                Ok(())
            } else {
                Err(err(format!("`{head}` takes {} argument(s)", n - 1)))
            }
        };
        match head {
            "init" => {
                arity(3)?;
                let v = float(tokens[2])?;
                if v < 0.0 {
                    return Err(err(format!("negative concentration {v}")));
                }
                match scenario.initial.iter_mut().find(|(n, _)| n == tokens[1]) {
                    Some(entry) => entry.1 = v,
                    None => scenario.initial.push((tokens[1].to_string(), v)),
                }
            }
            "volume" => {
                arity(2)?;
                let v = float(tokens[1])?;
                if v <= 0.0 {
                    return Err(err("volume must be positive".into()));
                }
                scenario.volume = v;
            }
            "dt" => {
                arity(2)?;
                let v = float(tokens[1])?;
                if v <= 0.0 {
                    return Err(err("dt must be positive".into()));
                }
                scenario.dt = v;
            }
            "max_steps" => {
                arity(2)?;
                let v = int(tokens[1])?;
                if v == 0 {
                    return Err(err("max_steps must be positive".into()));
                }
                scenario.max_steps = Some(v);
            }
            "tolerance" => {
                arity(2)?;
                let v = float(tokens[1])?;
                if v <= 0.0 {
                    return Err(err("tolerance must be positive".into()));
                }
                scenario.tolerance = Some(v);
            }
            "sample_every" => {
                arity(2)?;
                let v = int(tokens[1])?;
                if v == 0 {
                    return Err(err("sample_every must be positive".into()));
                }
                scenario.sample_every = v;
            }
            "at" => {
                if tokens.len() < 3 {
                    return Err(err("expected `at <seconds> add ...` or `at <seconds> dilute <L>`".into()));
                }
                let time = float(tokens[1])?;
                if time < 0.0 {
                    return Err(err("event time must be non-negative".into()));
                }
                let kind = match tokens[2] {
                    "add" => {
                        if tokens.len() != 7 || tokens[5] != "in" {
                            return Err(err("expected `at <s> add <species> <mol> in <L>`".into()));
                        }
                        let amount = float(tokens[4])?;
                        let solvent_volume = float(tokens[6])?;
                        if amount < 0.0 || solvent_volume <= 0.0 {
                            return Err(err("amount must be >= 0 and volume > 0".into()));
                        }
                        EventKind::Addition {
                            species: tokens[3].to_string(),
                            amount,
                            solvent_volume,
                        }
                    }
                    "dilute" => {
                        if tokens.len() != 4 {
                            return Err(err("expected `at <s> dilute <L>`".into()));
                        }
                        let added_water = float(tokens[3])?;
                        if added_water <= 0.0 {
                            return Err(err("dilution volume must be positive".into()));
                        }
                        EventKind::Dilution { added_water }
                    }
                    other => return Err(err(format!("unknown event `{other}`"))),
                };
                if scenario.events.last().is_some_and(|e| e.time > time) {
                    return Err(err("events must be listed in time order".into()));
                }
                scenario.events.push(Event { time, kind });
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file() {
        let s = parse_scenario(
            "# step 1\ninit KNO3 3.8835e-3\nvolume 1.0\nat 0.01 add KNO3 4e-3 in 0.01\nat 0.02 dilute 0.1\n\
             dt 1e-7\nmax_steps 100\ntolerance 1e-6\nsample_every 5\n",
        )
        .unwrap();
        assert_eq!(s.initial, vec![("KNO3".to_string(), 3.8835e-3)]);
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.dt, 1e-7);
        assert_eq!(s.max_steps, Some(100));
        assert_eq!(s.tolerance, Some(1e-6));
        assert_eq!(s.sample_every, 5);
    }

    #[test]
    fn defaults_without_settings() {
        assert_eq!(parse_scenario("").unwrap(), Scenario::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("dt 0\n", 1),
            ("init A\n", 1),
            ("\nat 1 add A 1 into 0.1\n", 2),
            ("at 2 dilute 1\nat 1 dilute 1\n", 2),
            ("frobnicate\n", 1),
            ("max_steps -3\n", 1),
        ] {
            assert_eq!(parse_scenario(text).unwrap_err().line, line, "{text}");
        }
    }
}
