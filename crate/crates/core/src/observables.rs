//! Derived quantities of a state and text/CSV rendering of results.
//!
//! Concentrations are mol/L internally; reports also show mmol/L.

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::dsl::{CompiledNetwork, Phase, Species};
use crate::engine::{SimulationResult, StateVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("state has {found} entries but the network has {expected} species")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("network has no H+ species")]
    NoHydrogenIon,
    #[error("pH undefined for [H+] = {0:e} mol/L")]
    NonPositiveHydrogen(f64),
    #[error("species `{0}` has no formula")]
    MissingFormula(String),
    #[error("species `{0}` has no molar mass")]
    MissingMolarMass(String),
}

fn check(network: &CompiledNetwork, state: &StateVector) -> Result<(), ObservableError> {
    if state.conc.len() != network.len() {
        return Err(ObservableError::DimensionMismatch {
            expected: network.len(),
            found: state.conc.len(),
        });
    }
    Ok(())
}

fn formula_is(s: &Species, charge: i32, elements: &[(&str, u32)]) -> bool {
    s.charge == charge
        && s.formula.elements().count() == elements.len()
        && elements.iter().all(|&(e, n)| s.formula.count(e) == n)
}

pub fn is_hydrogen_ion(s: &Species) -> bool {
    formula_is(s, 1, &[("H", 1)])
}

/// Water and its self-ionization products, which do not count as dissolved
/// solids.
pub fn is_water_derived(s: &Species) -> bool {
    is_hydrogen_ion(s) || formula_is(s, -1, &[("H", 1), ("O", 1)]) || formula_is(s, 0, &[("H", 2), ("O", 1)])
}

/// `-log10([H+])`, [H+] in mol/L.
pub fn ph(network: &CompiledNetwork, state: &StateVector) -> Result<f64, ObservableError> {
    check(network, state)?;
    let i = network
        .species()
        .iter()
        .position(is_hydrogen_ion)
        .ok_or(ObservableError::NoHydrogenIon)?;
    let h = state.conc[i];
    if !(h > 0.0) {
        return Err(ObservableError::NonPositiveHydrogen(h));
    }
    Ok(-h.log10())
}

/// Net charge `sum(charge_i * conc_i)`, mol charge per litre.
pub fn charge_balance(network: &CompiledNetwork, state: &StateVector) -> Result<f64, ObservableError> {
    check(network, state)?;
    Ok(network
        .species()
        .iter()
        .zip(&state.conc)
        .map(|(s, c)| s.charge as f64 * c)
        .sum())
}

/// Moles of each element per litre, summed over all phases.
pub fn element_totals(
    network: &CompiledNetwork,
    state: &StateVector,
) -> Result<BTreeMap<String, f64>, ObservableError> {
    check(network, state)?;
    let mut totals = BTreeMap::new();
    for (s, c) in network.species().iter().zip(&state.conc) {
        if s.formula.is_empty() {
            return Err(ObservableError::MissingFormula(s.name.clone()));
        }
        for (e, n) in s.formula.elements() {
            *totals.entry(e.to_string()).or_insert(0.0) += n as f64 * c;
        }
    }
    Ok(totals)
}

/// Total dissolved solids in mg/L: aqueous species except water-derived
/// ones, `conc * molar_mass * 1000`.
pub fn tds(network: &CompiledNetwork, state: &StateVector) -> Result<f64, ObservableError> {
    check(network, state)?;
    let mut total = 0.0;
    for (s, c) in network.species().iter().zip(&state.conc) {
        if s.phase != Phase::Aqueous || is_water_derived(s) {
            continue;
        }
        let m = s.molar_mass.ok_or_else(|| ObservableError::MissingMolarMass(s.name.clone()))?;
        total += c * m * 1000.0;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesLine {
    pub name: String,
    pub mol_per_l: f64,
}

impl SpeciesLine {
    pub fn mmol_per_l(&self) -> f64 {
        self.mol_per_l * 1e3
    }
}

/// Summary of a final state.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub time: f64,
    pub steps: u64,
    pub converged: bool,
    /// In declaration order.
    pub species: Vec<SpeciesLine>,
    /// `None` when [H+] is absent or zero.
    pub ph: Option<f64>,
    /// `None` when a molar mass is missing.
    pub tds_mg_per_l: Option<f64>,
    pub net_charge: f64,
    pub elements: BTreeMap<String, f64>,
    /// Solid-phase species with positive concentration.
    pub sediment: Vec<SpeciesLine>,
}

impl Report {
    pub fn from_result(network: &CompiledNetwork, result: &SimulationResult) -> Result<Self, ObservableError> {
        Self::build(network, &result.final_state, result.steps_executed, result.converged)
    }

    pub fn from_state(network: &CompiledNetwork, state: &StateVector) -> Result<Self, ObservableError> {
        Self::build(network, state, 0, false)
    }

    fn build(network: &CompiledNetwork, state: &StateVector, steps: u64, converged: bool) -> Result<Self, ObservableError> {
        check(network, state)?;
        let line = |i: usize| SpeciesLine {
            name: network.species()[i].name.clone(),
            mol_per_l: state.conc[i],
        };
        Ok(Self {
            time: state.time,
            steps,
            converged,
            species: (0..network.len()).map(line).collect(),
            ph: ph(network, state).ok(),
            tds_mg_per_l: tds(network, state).ok(),
            net_charge: charge_balance(network, state)?,
            elements: element_totals(network, state)?,
            sediment: network.solid_species().filter(|&i| state.conc[i] > 0.0).map(line).collect(),
        })
    }

    pub fn species(&self, name: &str) -> Option<&SpeciesLine> {
        self.species.iter().find(|s| s.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = Vec::new();
        write_report(&mut out, self).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("report is UTF-8")
    }
}

fn opt(v: Option<f64>, fmt: impl Fn(f64) -> String) -> String {
    v.map(fmt).unwrap_or_else(|| "n/a".into())
}

/// One `key: value` per line, fixed field order and number formats.
pub fn write_report<W: Write>(w: &mut W, report: &Report) -> io::Result<()> {
    writeln!(w, "time_s: {:.16e}", report.time)?;
    writeln!(w, "steps: {}", report.steps)?;
    writeln!(w, "converged: {}", report.converged)?;
    writeln!(w, "ph: {}", opt(report.ph, |v| format!("{v:.4}")))?;
    writeln!(w, "tds_mg_per_L: {}", opt(report.tds_mg_per_l, |v| format!("{v:.6}")))?;
    writeln!(w, "net_charge_mol_per_L: {:.6e}", report.net_charge)?;
    for s in &report.species {
        writeln!(w, "species.{}.mol_per_L: {:.16e}", s.name, s.mol_per_l)?;
        writeln!(w, "species.{}.mmol_per_L: {:.6}", s.name, s.mmol_per_l())?;
    }
    for (e, v) in &report.elements {
        writeln!(w, "element.{e}.mol_per_L: {v:.16e}")?;
    }
    if !report.sediment.is_empty() {
        writeln!(w, "sediment.count: {}", report.sediment.len())?;
        for s in &report.sediment {
            writeln!(w, "sediment.{}.mol_per_L: {:.16e}", s.name, s.mol_per_l)?;
        }
    }
    Ok(())
}

/// Trajectory CSV: header `time,<species...>`, mol/L with 17 significant
/// digits.
pub fn write_csv<W: Write>(w: &mut W, network: &CompiledNetwork, trajectory: &[StateVector]) -> io::Result<()> {
    let mut header = String::from("time");
    for name in network.species_names() {
        header.push(',');
        header.push_str(name);
    }
    writeln!(w, "{header}")?;
    let mut row = String::new();
    for state in trajectory {
        row.clear();
        row.push_str(&format!("{:.16e}", state.time));
        for c in &state.conc {
            row.push_str(&format!(",{c:.16e}"));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

pub fn csv_string(network: &CompiledNetwork, trajectory: &[StateVector]) -> String {
    let mut out = Vec::new();
    write_csv(&mut out, network, trajectory).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("CSV is UTF-8")
}
