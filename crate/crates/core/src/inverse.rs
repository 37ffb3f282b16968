//! Input amounts needed for a target ion profile.
//!
//! The primary path inverts the dissolution stoichiometry with non-negative
//! least squares. Reverse-time simulation is a diagnostic: running an
//! irreversible decay backward from a converged state amplifies the tiny
//! residual salt exponentially, so its answer depends on how that residue is
//! seeded.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dsl::CompiledNetwork;
use crate::engine::{ReverseIntegrator, SimulationError, StateVector, DEFAULT_DT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InverseError {
    #[error("unknown input species `{0}`")]
    UnknownInput(String),
    #[error("target references unknown ion `{0}`")]
    UnknownIon(String),
    #[error("target for `{ion}` is negative ({value:e} mol/L)")]
    NegativeTarget { ion: String, value: f64 },
    #[error("`{0}` listed twice in the target")]
    DuplicateTarget(String),
    #[error("input `{0}` has no irreversible dissolution reaction")]
    MissingDissolution(String),
    #[error("dissolution of `{0}` produces nothing")]
    AllZeroColumn(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error("input ions still falling after {steps} reverse steps (residual {residual:e} mol/L)")]
    HorizonExhausted { steps: u64, residual: f64 },
}

/// Amounts of each input (mol per litre of tank) and the per-ion mismatch
/// `achieved - target`.
#[derive(Debug, Clone, PartialEq)]
pub struct DosingPlan {
    pub amounts: Vec<(String, f64)>,
    pub residual: Vec<(String, f64)>,
    pub feasible: bool,
}

impl DosingPlan {
    pub fn amount(&self, input: &str) -> Option<f64> {
        self.amounts.iter().find(|(s, _)| s == input).map(|(_, v)| *v)
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max)
    }
}

/// Species consumed alone by an irreversible reaction, in declaration order.
pub fn dissolution_inputs(network: &CompiledNetwork) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in network.reactions() {
        if r.kb == 0.0 && r.reactants.len() == 1 && !r.products.is_empty() {
            let name = &network.species()[r.reactants[0].0].name;
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
    }
    out.sort_by_key(|n| network.index_of(n));
    out
}

/// Products per mole of `input` dissolved.
fn dissolution_column(network: &CompiledNetwork, input: &str) -> Result<Vec<(usize, f64)>, InverseError> {
    let idx = network
        .index_of(input)
        .ok_or_else(|| InverseError::UnknownInput(input.to_string()))?;
    let r = network
        .reactions()
        .iter()
        .find(|r| r.kb == 0.0 && r.reactants.len() == 1 && r.reactants[0].0 == idx)
        .ok_or_else(|| InverseError::MissingDissolution(input.to_string()))?;
    if r.products.is_empty() {
        return Err(InverseError::AllZeroColumn(input.to_string()));
    }
    let n = r.reactants[0].1 as f64;
    Ok(r.products.iter().map(|&(s, m)| (s, m as f64 / n)).collect())
}

/// Non-negative least squares `min |Ax - b|, x >= 0` by the Lawson-Hanson
/// active-set method. Ties for the entering column go to the lowest index.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    if n == 0 || a.nrows() == 0 {
        return x;
    }
    let mut passive = vec![false; n];
    let tol = 10.0 * f64::EPSILON * a.norm() * b.norm().max(f64::MIN_POSITIVE) * (n.max(a.nrows()) as f64);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let mut enter = None;
        let mut best = tol;
        for j in 0..n {
            if !passive[j] && w[j] > best {
                best = w[j];
                enter = Some(j);
            }
        }
        let Some(j) = enter else { break };
        passive[j] = true;

        loop {
            let z = solve_passive(a, b, &passive);
            let blocked: Vec<usize> = (0..n).filter(|&k| passive[k] && z[k] <= 0.0).collect();
            if blocked.is_empty() {
                x = z;
                break;
            }
            let alpha = blocked
                .iter()
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= tol.max(f64::EPSILON * x.amax()) {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Unconstrained least squares on the passive columns, zero elsewhere.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&k| passive[k]).collect();
    let sub = a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let eps = f64::EPSILON * svd.singular_values.max() * (a.nrows().max(cols.len()) as f64);
    let sol = svd.solve(b, eps).expect("SVD computed with U and V");
    let mut z = DVector::zeros(passive.len());
    for (k, &c) in cols.iter().enumerate() {
        z[c] = sol[k];
    }
    z
}

/// Amounts of `inputs` whose full dissociation best reproduces `target`
/// (ion, mol/L), subject to non-negative amounts.
///
/// Only the listed ions are fitted. `feasible` holds when every residual is
/// within `tolerance` times the largest target value.
pub fn invert_stoichiometric<S: AsRef<str>, T: AsRef<str>>(
    network: &CompiledNetwork,
    inputs: &[S],
    target: &[(T, f64)],
    tolerance: f64,
) -> Result<DosingPlan, InverseError> {
    if !(tolerance >= 0.0) {
        return Err(InverseError::InvalidOption(format!("tolerance must be non-negative, got {tolerance}")));
    }
    let mut rows: Vec<usize> = Vec::with_capacity(target.len());
    for (ion, value) in target {
        let ion = ion.as_ref();
        let idx = network
            .index_of(ion)
            .ok_or_else(|| InverseError::UnknownIon(ion.to_string()))?;
        if !(*value >= 0.0 && value.is_finite()) {
            return Err(InverseError::NegativeTarget { ion: ion.to_string(), value: *value });
        }
        if rows.contains(&idx) {
            return Err(InverseError::DuplicateTarget(ion.to_string()));
        }
        rows.push(idx);
    }
    let columns: Vec<Vec<(usize, f64)>> = inputs
        .iter()
        .map(|s| dissolution_column(network, s.as_ref()))
        .collect::<Result<_, _>>()?;

    let a = DMatrix::from_fn(rows.len(), columns.len(), |r, c| {
        columns[c]
            .iter()
            .filter(|(s, _)| *s == rows[r])
            .map(|(_, m)| m)
            .sum::<f64>()
    });
    let b = DVector::from_iterator(rows.len(), target.iter().map(|(_, v)| *v));
    let x = nnls(&a, &b);
    let achieved = &a * &x;

    let scale = b.iter().copied().fold(0.0, f64::max);
    let residual: Vec<(String, f64)> = target
        .iter()
        .enumerate()
        .map(|(r, (ion, v))| (ion.as_ref().to_string(), achieved[r] - v))
        .collect();
    let worst = residual.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    Ok(DosingPlan {
        amounts: inputs.iter().zip(x.iter()).map(|(s, v)| (s.as_ref().to_string(), *v)).collect(),
        residual,
        feasible: worst <= tolerance * scale,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseInverseOptions {
    pub dt: f64,
    /// Maximum reverse steps.
    pub horizon: u64,
    /// Input salts below this (mol/L) are raised to it before integrating.
    pub seed_floor: f64,
    /// Depletion threshold relative to the largest starting ion
    /// concentration.
    pub tolerance: f64,
}

impl Default for ReverseInverseOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            horizon: 25_000_000,
            seed_floor: 1e-15,
            tolerance: 1e-3,
        }
    }
}

/// Relative change of any reconstructed amount under `seed_floor / 10`
/// above which the result is flagged sensitive.
pub const SENSITIVITY_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseInversion {
    /// Salts at the step where input ions came closest to zero; residual
    /// holds the ion concentrations left there.
    pub plan: DosingPlan,
    pub steps: u64,
    /// Same reconstruction with the seed floor divided by ten.
    pub refined_amounts: Vec<(String, f64)>,
    pub sensitive: bool,
    /// Stoichiometric inversion of the starting ion profile, for comparison.
    pub stoichiometric: Option<DosingPlan>,
}

struct ReverseOutcome {
    amounts: Vec<f64>,
    ions: Vec<f64>,
    residual: f64,
    steps: u64,
}

fn reverse_until_depleted(
    network: &CompiledNetwork,
    start: &StateVector,
    salts: &[usize],
    ions: &[usize],
    dt: f64,
    horizon: u64,
    seed: f64,
) -> Result<ReverseOutcome, InverseError> {
    let max_ion = |c: &[f64]| ions.iter().map(|&i| c[i].abs()).fold(0.0, f64::max);
    let mut seeded = start.clone();
    for &s in salts {
        if seeded.conc[s] < seed {
            seeded.conc[s] = seed;
        }
    }
    let scale = max_ion(&start.conc);
    let slack = 1e-9 * scale;
    let mut integ = ReverseIntegrator::new(network, &seeded, dt, None);
    let mut best = max_ion(&integ.conc);
    let mut best_conc = integ.conc.clone();
    let mut best_step = 0;
    loop {
        if integ.steps >= horizon {
            return Err(InverseError::HorizonExhausted { steps: integ.steps, residual: best });
        }
        integ.step()?;
        let r = max_ion(&integ.conc);
        if r < best {
            best = r;
            best_conc.copy_from_slice(&integ.conc);
            best_step = integ.steps;
        } else if r > best + slack {
            break;
        }
    }
    Ok(ReverseOutcome {
        amounts: salts.iter().map(|&s| best_conc[s]).collect(),
        ions: ions.iter().map(|&i| best_conc[i]).collect(),
        residual: best,
        steps: best_step,
    })
}

/// Reconstruct input salts by integrating backward from `final_state` until
/// the ions their dissolution produces stop approaching zero.
///
/// Succeeds (`plan.feasible`) when that closest approach is within
/// `tolerance` of the largest starting ion concentration. The run is
/// repeated with a ten times smaller seed floor and flagged `sensitive` when
/// any amount moves by more than [`SENSITIVITY_THRESHOLD`].
pub fn invert_by_reverse_simulation(
    network: &CompiledNetwork,
    final_state: &StateVector,
    options: &ReverseInverseOptions,
) -> Result<ReverseInversion, InverseError> {
    if final_state.conc.len() != network.len() {
        return Err(SimulationError::DimensionMismatch {
            expected: network.len(),
            found: final_state.conc.len(),
        }
        .into());
    }
    if let Some(i) = final_state.conc.iter().position(|c| !c.is_finite()) {
        return Err(SimulationError::NonFinite { step: 0, species: network.species()[i].name.clone() }.into());
    }
    if !(options.dt > 0.0 && options.seed_floor > 0.0 && options.tolerance >= 0.0) {
        return Err(InverseError::InvalidOption(
            "dt and seed floor must be positive, tolerance non-negative".into(),
        ));
    }
    let inputs = dissolution_inputs(network);
    let salts: Vec<usize> = inputs.iter().map(|s| network.index_of(s).expect("input exists")).collect();
    let mut ions: Vec<usize> = Vec::new();
    for s in &inputs {
        for (i, _) in dissolution_column(network, s)? {
            if !ions.contains(&i) {
                ions.push(i);
            }
        }
    }
    ions.sort_unstable();
    let ion_names: Vec<String> = ions.iter().map(|&i| network.species()[i].name.clone()).collect();
    let scale = ions.iter().map(|&i| final_state.conc[i].abs()).fold(0.0, f64::max);

    let target: Vec<(String, f64)> = ion_names
        .iter()
        .zip(&ions)
        .map(|(n, &i)| (n.clone(), final_state.conc[i].max(0.0)))
        .collect();
    let stoichiometric = invert_stoichiometric(network, &inputs, &target, options.tolerance).ok();

    let named = |v: &[f64]| -> Vec<(String, f64)> { inputs.iter().cloned().zip(v.iter().copied()).collect() };

    if scale == 0.0 {
        // nothing dissolved, nothing to undo
        let amounts: Vec<f64> = salts.iter().map(|&s| final_state.conc[s]).collect();
        return Ok(ReverseInversion {
            plan: DosingPlan {
                amounts: named(&amounts),
                residual: ion_names.iter().map(|n| (n.clone(), 0.0)).collect(),
                feasible: true,
            },
            steps: 0,
            refined_amounts: named(&amounts),
            sensitive: false,
            stoichiometric,
        });
    }

    let run = |seed| reverse_until_depleted(network, final_state, &salts, &ions, options.dt, options.horizon, seed);
    let coarse = run(options.seed_floor)?;
    let fine = run(options.seed_floor / 10.0)?;
    let sensitive = coarse.amounts.iter().zip(&fine.amounts).any(|(a, b)| {
        let m = a.abs().max(b.abs());
        m > 0.0 && (a - b).abs() / m > SENSITIVITY_THRESHOLD
    });

    Ok(ReverseInversion {
        plan: DosingPlan {
            amounts: named(&coarse.amounts),
            residual: ion_names.iter().cloned().zip(coarse.ions.iter().copied()).collect(),
            feasible: coarse.residual <= options.tolerance * scale,
        },
        steps: coarse.steps,
        refined_amounts: named(&fine.amounts),
        sensitive,
        stoichiometric,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("target line {line}: {message}")]
pub struct TargetError {
    pub line: usize,
    pub message: String,
}

/// Parse `target <ion> <mmol/L>` lines; returns mol/L.
pub fn parse_target(text: &str) -> Result<Vec<(String, f64)>, TargetError> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let err = |message: String| TargetError { line, message };
        if words[0] != "target" {
            return Err(err(format!("unknown directive `{}`", words[0])));
        }
        if words.len() != 3 {
            return Err(err("expected `target <ion> <mmol/L>`".into()));
        }
        let value: f64 = words[2]
            .parse()
            .map_err(|_| err(format!("bad concentration `{}`", words[2])))?;
        if !(value >= 0.0 && value.is_finite()) {
            return Err(err(format!("concentration must be non-negative, got {value}")));
        }
        if out.iter().any(|(s, _)| s == words[1]) {
            return Err(err(format!("`{}` listed twice", words[1])));
        }
        out.push((words[1].to_string(), value * 1e-3));
    }
    Ok(out)
}

/// Plan as `key: value` lines in the report style.
pub fn render_plan(plan: &DosingPlan) -> String {
    let mut s = String::new();
    writeln!(s, "feasible: {}", plan.feasible).unwrap();
    for (name, v) in &plan.amounts {
        writeln!(s, "plan.{name}.mol_per_L: {v:.16e}").unwrap();
        writeln!(s, "plan.{name}.mmol_per_L: {:.6}", v * 1e3).unwrap();
    }
    for (ion, r) in &plan.residual {
        writeln!(s, "residual.{ion}.mol_per_L: {r:.6e}").unwrap();
    }
    writeln!(s, "max_residual_mol_per_L: {:.6e}", plan.max_residual()).unwrap();
    s
}
