//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error or unreadable file |
//! | 2 | model, scenario or target failed to parse or validate |
//! | 3 | numerical failure, infeasible or sensitive inverse |
//! | 4 | golden mismatch |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::assets::{self, GoldenCase, GOLDEN_SPECIES};
use crate::dsl::{compile_network, parse_model, CompiledNetwork, ModelDefinition};
use crate::engine::{self, parse_scenario, run_batch, Scenario, SimulationError, SimulationResult, StateVector};
use crate::inverse::{
    dissolution_inputs, invert_by_reverse_simulation, invert_stoichiometric, parse_target, render_plan,
    ReverseInverseOptions,
};
use crate::kinetics::{check_rate_consistency, RateConsistency};
use crate::observables::{csv_string, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_GOLDEN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nutrinet", version, about = "Mass-action nutrient solution simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Overrides {
    /// Step size in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Step budget.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Relative convergence threshold.
    #[arg(long, conflicts_with = "fixed_steps")]
    tolerance: Option<f64>,
    /// Keep every n-th step in the trajectory.
    #[arg(long)]
    sample_every: Option<u64>,
    /// Run exactly this many steps with no convergence test.
    #[arg(long, conflicts_with = "max_steps")]
    fixed_steps: Option<u64>,
}

impl Overrides {
    fn apply(&self, scenario: &mut Scenario) {
        if let Some(dt) = self.dt {
            scenario.dt = dt;
        }
        if let Some(n) = self.max_steps {
            scenario.max_steps = Some(n);
        }
        if let Some(t) = self.tolerance {
            scenario.tolerance = Some(t);
        }
        if let Some(n) = self.sample_every {
            scenario.sample_every = n;
        }
        if let Some(n) = self.fixed_steps {
            scenario.max_steps = Some(n);
            scenario.tolerance = None;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Stoichiometric,
    ReverseSim,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one scenario; print the final report.
    Simulate {
        /// Model file; the bundled reference model when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        scenario: PathBuf,
        /// Trajectory CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Salt amounts that produce a target ion profile.
    Inverse {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Lines `target <ion> <mmol/L>`.
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Stoichiometric)]
        mode: Mode,
        /// Feasibility threshold relative to the largest target.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Reverse-sim step size in seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Reverse-sim step horizon.
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Check a model and report implied equilibrium constants.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run several scenarios, optionally in parallel.
    Batch {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        scenario: Vec<PathBuf>,
        /// Directory receiving one `<scenario stem>.csv` each.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Reproduce the ten-step table with the bundled model.
    Golden {
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Alternative expected-value table.
        #[arg(long)]
        goldens: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

type Outcome = Result<i32, Failure>;

/// Parse `args` (program name first) and run the command. Normal output goes to
/// `out`, warnings and errors to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate { model, scenario, out: csv, overrides } => {
            cmd_simulate(model.as_deref(), &scenario, csv.as_deref(), &overrides, out, err)
        }
        Command::Inverse { model, target, mode, tolerance, dt, max_steps } => {
            cmd_inverse(model.as_deref(), &target, mode, tolerance, dt, max_steps, out)
        }
        Command::Validate { model } => cmd_validate(&model, out),
        Command::Batch { model, scenario, out: dir, jobs, overrides } => {
            cmd_batch(model.as_deref(), &scenario, dir.as_deref(), jobs, &overrides, out, err)
        }
        Command::Golden { jobs, goldens, overrides } => cmd_golden(jobs, goldens.as_deref(), &overrides, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))
}

fn load_model(path: Option<&Path>) -> Result<ModelDefinition, Failure> {
    match path {
        None => assets::load_reference_model().map_err(|e| Failure::new(EXIT_INVALID, e.to_string())),
        Some(p) => {
            let text = read(p)?;
            parse_model(&text).map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", p.display())))
        }
    }
}

fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, Failure> {
    let text = read(path)?;
    let mut s = parse_scenario(&text).map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))?;
    overrides.apply(&mut s);
    Ok(s)
}

fn sim_failure(e: SimulationError) -> Failure {
    let code = match e {
        SimulationError::UnknownSpecies(_) | SimulationError::InvalidScenario(_) | SimulationError::DimensionMismatch { .. } => {
            EXIT_INVALID
        }
        _ => EXIT_NUMERICAL,
    };
    Failure::new(code, e.to_string())
}

fn io(e: std::io::Error) -> Failure {
    Failure::new(EXIT_USAGE, format!("output failed: {e}"))
}

fn summary(result: &SimulationResult) -> String {
    if result.converged {
        format!("converged after {} steps (t={:e} s)", result.steps_executed, result.final_state.time)
    } else {
        format!("stopped after {} steps (t={:e} s), not converged", result.steps_executed, result.final_state.time)
    }
}

fn cmd_simulate(
    model: Option<&Path>,
    scenario: &Path,
    csv: Option<&Path>,
    overrides: &Overrides,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let model = load_model(model)?;
    let scenario = load_scenario(scenario, overrides)?;
    let network = compile_network(&model);
    let result = engine::simulate(&network, &scenario).map_err(sim_failure)?;
    for d in &result.diagnostics {
        writeln!(err, "{d}").map_err(io)?;
    }
    writeln!(err, "{}", summary(&result)).map_err(io)?;
    let report = Report::from_result(&network, &result).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    if let Some(path) = csv {
        write_file(path, &csv_string(&network, &result.trajectory))?;
    }
    out.write_all(report.render().as_bytes()).map_err(io)?;
    Ok(EXIT_OK)
}

/// Final-state guess for reverse runs: target ions plus neutral water.
fn target_state(network: &CompiledNetwork, target: &[(String, f64)]) -> Result<StateVector, Failure> {
    let mut state = StateVector::zeros(network.len());
    for (name, v) in [("H2O", 1.0), ("H+", 1e-7), ("OH-", 1e-7)] {
        if let Some(i) = network.index_of(name) {
            state.conc[i] = v;
        }
    }
    for (ion, v) in target {
        let i = network
            .index_of(ion)
            .ok_or_else(|| Failure::new(EXIT_INVALID, format!("target references unknown ion `{ion}`")))?;
        state.conc[i] = *v;
    }
    Ok(state)
}

fn cmd_inverse(
    model: Option<&Path>,
    target: &Path,
    mode: Mode,
    tolerance: Option<f64>,
    dt: Option<f64>,
    horizon: Option<u64>,
    out: &mut dyn Write,
) -> Outcome {
    let model = load_model(model)?;
    let text = read(target)?;
    let target = parse_target(&text).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let network = compile_network(&model);
    let inputs = dissolution_inputs(&network);
    let invalid = |e: crate::inverse::InverseError| {
        let code = match e {
            crate::inverse::InverseError::Simulation(_) | crate::inverse::InverseError::HorizonExhausted { .. } => {
                EXIT_NUMERICAL
            }
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    };
    match mode {
        Mode::Stoichiometric => {
            let plan = invert_stoichiometric(&network, &inputs, &target, tolerance.unwrap_or(1e-6)).map_err(invalid)?;
            writeln!(out, "mode: stoichiometric").map_err(io)?;
            out.write_all(render_plan(&plan).as_bytes()).map_err(io)?;
            Ok(if plan.feasible { EXIT_OK } else { EXIT_NUMERICAL })
        }
        Mode::ReverseSim => {
            let mut options = ReverseInverseOptions::default();
            if let Some(t) = tolerance {
                options.tolerance = t;
            }
            if let Some(dt) = dt {
                options.dt = dt;
            }
            if let Some(h) = horizon {
                options.horizon = h;
            }
            let state = target_state(&network, &target)?;
            let r = invert_by_reverse_simulation(&network, &state, &options).map_err(invalid)?;
            writeln!(out, "mode: reverse-sim").map_err(io)?;
            writeln!(out, "reverse_steps: {}", r.steps).map_err(io)?;
            writeln!(out, "sensitive: {}", r.sensitive).map_err(io)?;
            out.write_all(render_plan(&r.plan).as_bytes()).map_err(io)?;
            for (name, v) in &r.refined_amounts {
                writeln!(out, "refined.{name}.mol_per_L: {v:.16e}").map_err(io)?;
            }
            if let Some(s) = &r.stoichiometric {
                for (name, v) in &s.amounts {
                    writeln!(out, "stoichiometric.{name}.mol_per_L: {v:.16e}").map_err(io)?;
                }
            }
            Ok(if r.plan.feasible && !r.sensitive { EXIT_OK } else { EXIT_NUMERICAL })
        }
    }
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Outcome {
    let model = load_model(Some(path))?;
    if model.is_empty() {
        writeln!(out, "model is empty: no species or reactions").map_err(io)?;
        return Ok(EXIT_OK);
    }
    let network = compile_network(&model);
    writeln!(
        out,
        "model: {} species, {} reactions, {} rate terms",
        model.species.len(),
        model.reactions.len(),
        network.term_count()
    )
    .map_err(io)?;
    let mut warnings = 0;
    for r in &model.reactions {
        match check_rate_consistency(r) {
            RateConsistency::Irreversible => writeln!(out, "reaction {}: irreversible kf={:e}", r.id, r.kf()),
            RateConsistency::Reversible { implied_k, declared_k, relative_error, mismatch } => {
                let mut line = format!("reaction {}: implied K={implied_k:e}", r.id);
                if let (Some(d), Some(e)) = (declared_k, relative_error) {
                    write!(line, " declared K={d:e} rel_error={e:.3e}").unwrap();
                }
                if mismatch {
                    warnings += 1;
                    line.push_str(" warning: implied and declared K disagree");
                }
                writeln!(out, "{line}")
            }
        }
        .map_err(io)?;
    }
    writeln!(out, "valid: {} K mismatch warning(s)", warnings).map_err(io)?;
    Ok(EXIT_OK)
}

fn cmd_batch(
    model: Option<&Path>,
    scenarios: &[PathBuf],
    dir: Option<&Path>,
    jobs: usize,
    overrides: &Overrides,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let model = load_model(model)?;
    let parsed: Vec<Scenario> = scenarios.iter().map(|p| load_scenario(p, overrides)).collect::<Result<_, _>>()?;
    let network = compile_network(&model);
    let results = run_batch(&network, &parsed, jobs.max(1));
    let mut failed = 0;
    for (path, result) in scenarios.iter().zip(&results) {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match result {
            Ok(r) => {
                writeln!(out, "{name}: {}", summary(r)).map_err(io)?;
                if let Some(dir) = dir {
                    write_file(&dir.join(format!("{name}.csv")), &csv_string(&network, &r.trajectory))?;
                }
            }
            Err(e) => {
                failed += 1;
                writeln!(out, "{name}: failed: {e}").map_err(io)?;
            }
        }
    }
    if failed > 0 {
        writeln!(err, "{failed} of {} scenario(s) failed", scenarios.len()).map_err(io)?;
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

/// One compared cell of the golden table.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCell {
    pub step: usize,
    pub species: String,
    pub theoretical: Option<f64>,
    pub predicted: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub pass: bool,
}

/// Compare converged runs with their cases; `results` in case order.
pub fn golden_cells(
    network: &CompiledNetwork,
    cases: &[GoldenCase],
    results: &[SimulationResult],
) -> Vec<GoldenCell> {
    let mut cells = Vec::new();
    for (case, result) in cases.iter().zip(results) {
        for species in GOLDEN_SPECIES {
            let Some(expected) = case.expected(species) else { continue };
            let i = network.index_of(species).expect("golden species in reference model");
            let predicted = result.final_state.conc[i] * 1e3;
            let relative_error = (predicted - expected).abs() / expected.abs();
            cells.push(GoldenCell {
                step: case.step,
                species: species.to_string(),
                theoretical: case.theoretical.iter().find(|(s, _)| s == species).map(|(_, v)| *v),
                predicted,
                expected,
                relative_error,
                pass: relative_error <= case.tolerance,
            });
        }
    }
    cells
}

/// Fixed-width comparison table, one row per cell.
pub fn render_golden_table(cells: &[GoldenCell]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>4}  {:<6} {:>12} {:>12} {:>12} {:>10}  status",
        "step", "ion", "theoretical", "predicted", "expected", "rel_err"
    )
    .unwrap();
    for c in cells {
        let theo = c.theoretical.map(|v| format!("{v}")).unwrap_or_else(|| "-".into());
        writeln!(
            s,
            "{:>4}  {:<6} {:>12} {:>12.6} {:>12} {:>10.3e}  {}",
            c.step,
            c.species,
            theo,
            c.predicted,
            format!("{}", c.expected),
            c.relative_error,
            if c.pass { "ok" } else { "FAIL" }
        )
        .unwrap();
    }
    s
}

fn cmd_golden(
    jobs: usize,
    goldens: Option<&Path>,
    overrides: &Overrides,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let cases = match goldens {
        None => assets::golden_cases(),
        Some(p) => assets::golden_cases_from(&read(p)?),
    }
    .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let model = load_model(None)?;
    let network = compile_network(&model);
    let scenarios: Vec<Scenario> = cases
        .iter()
        .map(|c| {
            let mut s = c.scenario.clone();
            overrides.apply(&mut s);
            s
        })
        .collect();
    let started = Instant::now();
    let results = run_batch(&network, &scenarios, jobs.max(1))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(sim_failure)?;
    let elapsed = started.elapsed();
    let cells = golden_cells(&network, &cases, &results);
    out.write_all(render_golden_table(&cells).as_bytes()).map_err(io)?;
    let failing: Vec<&GoldenCell> = cells.iter().filter(|c| !c.pass).collect();
    let steps_ok = cases.iter().filter(|c| failing.iter().all(|f| f.step != c.step)).count();
    writeln!(out, "golden: {steps_ok}/{} steps within tolerance", cases.len()).map_err(io)?;
    writeln!(err, "wall time: {:.2} s with {} job(s)", elapsed.as_secs_f64(), jobs.max(1)).map_err(io)?;
    if failing.is_empty() {
        return Ok(EXIT_OK);
    }
    for c in &failing {
        writeln!(
            err,
            "mismatch: step {} {} predicted {:.6} expected {} (rel_err {:.3e})",
            c.step, c.species, c.predicted, c.expected, c.relative_error
        )
        .map_err(io)?;
    }
    Ok(EXIT_GOLDEN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("nutrinet").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_and_usage_codes() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, EXIT_OK);
        for cmd in ["simulate", "inverse", "validate", "batch", "golden"] {
            assert!(out.contains(cmd), "{out}");
        }
        let (code, out, _) = run_str(&["simulate", "--help"]);
        assert_eq!(code, EXIT_OK);
        for flag in ["--model", "--scenario", "--out", "--dt", "--max-steps", "--tolerance", "--sample-every", "--fixed-steps"] {
            assert!(out.contains(flag), "{flag} missing from\n{out}");
        }
        assert_eq!(run_str(&["simulate", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
    }

    #[test]
    fn missing_files_exit_one() {
        let (code, out, err) = run_str(&["simulate", "--scenario", "/nonexistent/x.scenario"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("cannot read"));
        assert_eq!(run_str(&["validate", "--model", "/nonexistent/m.model"]).0, EXIT_USAGE);
    }

    #[test]
    fn golden_table_layout() {
        let cells = vec![GoldenCell {
            step: 1,
            species: "K+".into(),
            theoretical: Some(3.8835),
            predicted: 3.8835,
            expected: 3.8835,
            relative_error: 0.0,
            pass: true,
        }];
        let t = render_golden_table(&cells);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].ends_with("ok"));
        assert!(lines[1].contains("3.883500"));
    }
}
