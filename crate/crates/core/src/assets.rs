//! Bundled reference model, per-step scenarios and golden outputs.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::{parse_model, ModelDefinition, ModelError};
use crate::engine::{parse_scenario, Scenario, ScenarioError};

pub const REFERENCE_MODEL: &str = include_str!("../assets/yamazaki.model");
pub const GOLDENS_CSV: &str = include_str!("../assets/goldens.csv");
pub const THEORETICAL_CSV: &str = include_str!("../assets/theoretical.csv");

/// SHA-256 of [`REFERENCE_MODEL`].
pub const REFERENCE_MODEL_SHA256: &str = "9107fe292f0cc9d7e03d7d3b1c6b92b92d7fb15eef16b503a1f53244234591f4";

pub const SCENARIOS: [&str; 10] = [
    include_str!("../assets/scenarios/step01.scenario"),
    include_str!("../assets/scenarios/step02.scenario"),
    include_str!("../assets/scenarios/step03.scenario"),
    include_str!("../assets/scenarios/step04.scenario"),
    include_str!("../assets/scenarios/step05.scenario"),
    include_str!("../assets/scenarios/step06.scenario"),
    include_str!("../assets/scenarios/step07.scenario"),
    include_str!("../assets/scenarios/step08.scenario"),
    include_str!("../assets/scenarios/step09.scenario"),
    include_str!("../assets/scenarios/step10.scenario"),
];

/// Ions compared against the published table, in table order.
pub const GOLDEN_SPECIES: [&str; 4] = ["K+", "Ca2+", "NO3-", "NH4+"];

/// Salts fed into the tank.
pub const INPUT_SALTS: [&str; 3] = ["KNO3", "Ca(NO3)2", "NH4H2PO4"];

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("reference model checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("golden table line {line}: {message}")]
    Golden { line: usize, message: String },
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Parse the bundled model after verifying its checksum.
pub fn load_reference_model() -> Result<ModelDefinition, AssetError> {
    let found = sha256_hex(REFERENCE_MODEL);
    if found != REFERENCE_MODEL_SHA256 {
        return Err(AssetError::Checksum {
            expected: REFERENCE_MODEL_SHA256.to_string(),
            found,
        });
    }
    Ok(parse_model(REFERENCE_MODEL)?)
}

/// Scenario for table step `step` (1-based).
pub fn step_scenario(step: usize) -> Result<Scenario, AssetError> {
    assert!((1..=10).contains(&step), "table steps run from 1 to 10");
    Ok(parse_scenario(SCENARIOS[step - 1])?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCase {
    pub step: usize,
    pub scenario: Scenario,
    /// Salt concentrations, mmol/L.
    pub inputs: Vec<(String, f64)>,
    /// Expected ion concentrations (mmol/L) in [`GOLDEN_SPECIES`] order.
    pub expected: Vec<(String, f64)>,
    /// Printed theoretical values (mmol/L), same order.
    pub theoretical: Vec<(String, f64)>,
    /// Relative tolerance.
    pub tolerance: f64,
}

impl GoldenCase {
    pub fn expected(&self, species: &str) -> Option<f64> {
        self.expected.iter().find(|(s, _)| s == species).map(|(_, v)| *v)
    }
}

struct GoldenRow {
    step: usize,
    species: String,
    value: f64,
    tolerance: Option<f64>,
}

fn parse_rows(text: &str, with_tolerance: bool) -> Result<Vec<GoldenRow>, AssetError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| AssetError::Golden { line: line_no, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let want = if with_tolerance { 4 } else { 3 };
        if fields.len() != want {
            return Err(bad(format!("expected {want} fields, found {}", fields.len())));
        }
        let step = fields[0]
            .parse::<usize>()
            .ok()
            .filter(|s| (1..=10).contains(s))
            .ok_or_else(|| bad(format!("bad step `{}`", fields[0])))?;
        let value = fields[2]
            .parse::<f64>()
            .map_err(|_| bad(format!("bad value `{}`", fields[2])))?;
        let tolerance = if with_tolerance {
            Some(
                fields[3]
                    .parse::<f64>()
                    .ok()
                    .filter(|t| *t > 0.0)
                    .ok_or_else(|| bad(format!("bad tolerance `{}`", fields[3])))?,
            )
        } else {
            None
        };
        rows.push(GoldenRow {
            step,
            species: fields[1].to_string(),
            value,
            tolerance,
        });
    }
    Ok(rows)
}

/// The ten golden cases with their bundled goldens table.
pub fn golden_cases() -> Result<Vec<GoldenCase>, AssetError> {
    golden_cases_from(GOLDENS_CSV)
}

/// Golden cases with expected values read from `goldens_csv`
/// (`step,species,expected_mmol_per_L,tolerance`). Steps without a row are
/// left out.
pub fn golden_cases_from(goldens_csv: &str) -> Result<Vec<GoldenCase>, AssetError> {
    let expected = parse_rows(goldens_csv, true)?;
    let theoretical = parse_rows(THEORETICAL_CSV, false)?;
    let mut cases = Vec::with_capacity(10);
    for step in 1..=10 {
        if !expected.iter().any(|r| r.step == step) {
            continue;
        }
        let scenario = step_scenario(step)?;
        let inputs = INPUT_SALTS
            .iter()
            .map(|salt| {
                let v = scenario
                    .initial
                    .iter()
                    .find(|(s, _)| s == salt)
                    .map(|(_, v)| v * 1e3)
                    .unwrap_or(0.0);
                (salt.to_string(), v)
            })
            .collect();
        let pick = |rows: &[GoldenRow]| -> Vec<(String, f64)> {
            rows.iter()
                .filter(|r| r.step == step)
                .map(|r| (r.species.clone(), r.value))
                .collect()
        };
        let tolerance = expected
            .iter()
            .filter(|r| r.step == step)
            .filter_map(|r| r.tolerance)
            .fold(f64::INFINITY, f64::min);
        cases.push(GoldenCase {
            step,
            scenario,
            inputs,
            expected: pick(&expected),
            theoretical: pick(&theoretical),
            tolerance,
        });
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::compile_network;
    use crate::kinetics::check_rate_consistency;

    #[test]
    fn checksum_constant_matches_asset() {
        assert_eq!(sha256_hex(REFERENCE_MODEL), REFERENCE_MODEL_SHA256);
    }

    #[test]
    fn reference_model_shape() {
        let m = load_reference_model().unwrap();
        assert_eq!(m.species.len(), 17);
        assert_eq!(m.reactions.len(), 10);
        let r1 = m.reaction("r1").unwrap();
        assert_eq!((r1.kf(), r1.kb()), (1e-20, 1e-6));
        let r10 = m.reaction("r10").unwrap();
        assert_eq!((r10.kf(), r10.kb()), (0.591361, 100.0));
        for id in ["r2", "r3", "r4"] {
            let r = m.reaction(id).unwrap();
            assert_eq!(r.kb(), 0.0);
            assert!(!r.reversible);
        }
        assert_eq!(compile_network(&m).len(), 17);
    }

    #[test]
    fn documented_constant_mismatches() {
        let m = load_reference_model().unwrap();
        let mismatched: Vec<&str> = m
            .reactions
            .iter()
            .filter(|r| check_rate_consistency(r).is_mismatch())
            .map(|r| r.id.as_str())
            .collect();
        assert_eq!(mismatched, vec!["r5", "r6", "r7", "r8", "r9"]);
    }

    #[test]
    fn golden_table_contents() {
        let cases = golden_cases().unwrap();
        assert_eq!(cases.len(), 10);
        let s1 = &cases[0];
        for ((name, got), (want_name, want)) in s1.inputs.iter().zip(INPUT_SALTS.iter().zip([3.8835, 0.97087, 0.48544])) {
            assert_eq!(name, want_name);
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(s1.expected("K+"), Some(3.8835));
        assert_eq!(s1.expected("NO3-"), Some(5.82524));
        assert_eq!(cases[9].expected("Ca2+"), Some(7.4678));
        assert_eq!(cases[5].expected("NO3-"), Some(29.621));
        assert_eq!(cases[5].theoretical[2], ("NO3-".to_string(), 26.92));
        assert!(cases.iter().all(|c| c.tolerance == 0.002 && c.expected.len() == 4));
    }

    #[test]
    fn input_salts_reproduce_theoretical_ions() {
        // Full dissociation: K = KNO3, Ca = Ca(NO3)2, NH4 = NH4H2PO4,
        // NO3 = KNO3 + 2 Ca(NO3)2.
        for c in golden_cases().unwrap() {
            let (k, ca, nh4) = (c.inputs[0].1, c.inputs[1].1, c.inputs[2].1);
            let no3 = k + 2.0 * ca;
            let expected_no3 = c.expected("NO3-").unwrap();
            assert!((no3 - expected_no3).abs() / expected_no3 < 1e-4, "step {}", c.step);
            assert!((c.theoretical[0].1 - k).abs() < 1e-12);
            assert!((c.theoretical[3].1 - nh4).abs() < 1e-12);
        }
    }

    #[test]
    fn malformed_goldens_are_rejected() {
        let err = golden_cases_from("step,species,expected_mmol_per_L,tolerance\n1,K+,abc,0.002\n").unwrap_err();
        assert!(matches!(err, AssetError::Golden { line: 2, .. }));
    }
}
