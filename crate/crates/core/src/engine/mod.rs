//! Superposed-gradient evaluation and synchronous explicit Euler
//! integration, forward or time-reversed.

mod batch;
mod gradient;
mod scenario_file;
mod simulate;
mod types;

pub use batch::run_batch;
pub use gradient::{eval_gradient, step, StepOutcome, DIVERGENCE_LIMIT};
pub use scenario_file::{parse_scenario, ScenarioError};
pub(crate) use simulate::ReverseIntegrator;
pub use simulate::{
    apply_event, initial_state, simulate, simulate_reverse, ReverseOptions, ReverseResult, CONVERGENCE_FLOOR,
    CONVERGENCE_WINDOW, STEP_SIZE_WARNING,
};
pub use types::{
    Diagnostic, Event, EventKind, Scenario, SimulationError, SimulationResult, StateVector, DEFAULT_DT,
    DEFAULT_MAX_STEPS, DEFAULT_SAMPLE_EVERY, DEFAULT_TOLERANCE,
};
