use std::fmt;

use thiserror::Error;

/// Species concentrations (mol/L) at one instant, indexed like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub time: f64,
    pub conc: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            time: 0.0,
            conc: vec![0.0; n],
        }
    }

    pub fn new(time: f64, conc: Vec<f64>) -> Self {
        Self { time, conc }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// `amount` mol of `species` carried in `solvent_volume` L of solvent.
    Addition {
        species: String,
        amount: f64,
        solvent_volume: f64,
    },
    Dilution { added_water: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

/// Default step size, seconds.
pub const DEFAULT_DT: f64 = 1e-8;
pub const DEFAULT_MAX_STEPS: u64 = 2_500_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SAMPLE_EVERY: u64 = 10_000;

/// Initial conditions, events and integration settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// mol/L; species not listed start at zero.
    pub initial: Vec<(String, f64)>,
    /// Tank volume in litres at t = 0; only events depend on it.
    pub volume: f64,
    /// Sorted by time.
    pub events: Vec<Event>,
    pub dt: f64,
    pub max_steps: Option<u64>,
    /// Relative convergence threshold; `None` runs exactly `max_steps`.
    pub tolerance: Option<f64>,
    pub sample_every: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            initial: Vec::new(),
            volume: 1.0,
            events: Vec::new(),
            dt: DEFAULT_DT,
            max_steps: Some(DEFAULT_MAX_STEPS),
            tolerance: Some(DEFAULT_TOLERANCE),
            sample_every: DEFAULT_SAMPLE_EVERY,
        }
    }
}

impl Scenario {
    pub fn with_initial<S: Into<String>>(mut self, species: S, conc: f64) -> Self {
        self.initial.push((species.into(), conc));
        self
    }

    pub fn fixed_steps(mut self, steps: u64) -> Self {
        self.max_steps = Some(steps);
        self.tolerance = None;
        self
    }
}

/// Non-fatal observations collected during a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// `dt` times the fastest self-consumption rate exceeds the warning
    /// threshold; low-concentration species may settle at wrong values.
    StepSize {
        dt: f64,
        species: String,
        stiffness: f64,
        suggested_dt: f64,
    },
    /// Concentration would have gone negative and was set to zero.
    Clamped {
        species: String,
        first_step: u64,
        count: u64,
    },
    /// Event scheduled after the run ended; never applied.
    EventSkipped { time: f64 },
    /// Step budget exhausted before the convergence criterion fired.
    NotConverged { steps: u64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::StepSize { dt, species, stiffness, suggested_dt } => write!(
                f,
                "warning: step size dt={dt:e} s is large for {species} (rate {stiffness:e} /s, dt*rate = {:.3e}); \
                 low-concentration species may converge to wrong values, use dt <= {suggested_dt:e} s",
                dt * stiffness
            ),
            Diagnostic::Clamped { species, first_step, count } => write!(
                f,
                "warning: {species} clamped at zero {count} time(s), first at step {first_step}"
            ),
            Diagnostic::EventSkipped { time } => {
                write!(f, "warning: event at t={time:e} s lies beyond the last step and was not applied")
            }
            Diagnostic::NotConverged { steps } => {
                write!(f, "warning: not converged after {steps} steps")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub final_state: StateVector,
    pub converged: bool,
    pub steps_executed: u64,
    pub trajectory: Vec<StateVector>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("state has {found} entries but the network has {expected} species")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("integration failed at step {step}: {species} became non-finite; reduce dt")]
    NonFinite { step: u64, species: String },
    #[error(
        "diverged at step {step} (t={time:e} s): {species} reached {value:e} mol/L; \
         reduce dt, e.g. to {suggested_dt:e} s"
    )]
    Divergence {
        step: u64,
        time: f64,
        species: String,
        value: f64,
        suggested_dt: f64,
    },
    #[error(
        "reverse integration diverged after {step} steps (t={time:e} s): {species} reached {value:e} mol/L"
    )]
    ReverseDivergence {
        step: u64,
        time: f64,
        species: String,
        value: f64,
    },
}
