use crate::dsl::CompiledNetwork;

use super::gradient::{advance, check_dimension, gradient_into, stiffness, Workspace, DIVERGENCE_LIMIT};
use super::types::{Diagnostic, Event, EventKind, Scenario, SimulationError, SimulationResult, StateVector};

/// Consecutive steps the convergence test must hold for.
pub const CONVERGENCE_WINDOW: u32 = 1000;
/// Concentration floor (mol/L) in the relative-change denominator.
pub const CONVERGENCE_FLOOR: f64 = 1e-12;
/// `dt * rate` above which the step-size warning is emitted.
pub const STEP_SIZE_WARNING: f64 = 1e-2;

/// Apply an addition or dilution to a tank of `volume` litres.
///
/// An addition of `n` mol carried in `v` L scales every concentration by
/// `V / (V + v)` and adds `n / (V + v)` to the target species.
pub fn apply_event(
    network: &CompiledNetwork,
    state: &StateVector,
    volume: f64,
    event: &Event,
) -> Result<(StateVector, f64), SimulationError> {
    check_dimension(network, state.conc.len())?;
    let resolved = resolve_event(network, event)?;
    let mut conc = state.conc.clone();
    let volume = apply_resolved(&mut conc, volume, &resolved)?;
    Ok((StateVector::new(state.time, conc), volume))
}

#[derive(Debug, Clone, Copy)]
enum ResolvedKind {
    Addition { species: usize, amount: f64, solvent: f64 },
    Dilution { water: f64 },
}

#[derive(Debug, Clone, Copy)]
struct ResolvedEvent {
    time: f64,
    kind: ResolvedKind,
}

fn resolve_event(network: &CompiledNetwork, event: &Event) -> Result<ResolvedEvent, SimulationError> {
    let kind = match &event.kind {
        EventKind::Addition { species, amount, solvent_volume } => {
            let idx = network
                .index_of(species)
                .ok_or_else(|| SimulationError::UnknownSpecies(species.clone()))?;
            if !(*amount >= 0.0 && amount.is_finite()) {
                return Err(SimulationError::InvalidScenario(format!(
                    "addition of {species} has invalid amount {amount}"
                )));
            }
            ResolvedKind::Addition {
                species: idx,
                amount: *amount,
                solvent: *solvent_volume,
            }
        }
        EventKind::Dilution { added_water } => ResolvedKind::Dilution { water: *added_water },
    };
    Ok(ResolvedEvent { time: event.time, kind })
}

fn apply_resolved(conc: &mut [f64], volume: f64, event: &ResolvedEvent) -> Result<f64, SimulationError> {
    let added = match event.kind {
        ResolvedKind::Addition { solvent, .. } => solvent,
        ResolvedKind::Dilution { water } => water,
    };
    if !(volume > 0.0 && added > 0.0 && volume.is_finite() && added.is_finite()) {
        return Err(SimulationError::InvalidScenario(format!(
            "event volumes must be positive (tank {volume} L, added {added} L)"
        )));
    }
    let total = volume + added;
    let scale = volume / total;
    for c in conc.iter_mut() {
        *c *= scale;
    }
    if let ResolvedKind::Addition { species, amount, .. } = event.kind {
        conc[species] += amount / total;
    }
    Ok(total)
}

/// Initial concentrations of a scenario as a dense state at t = 0.
pub fn initial_state(network: &CompiledNetwork, scenario: &Scenario) -> Result<StateVector, SimulationError> {
    let mut conc = vec![0.0; network.len()];
    for (name, value) in &scenario.initial {
        let i = network
            .index_of(name)
            .ok_or_else(|| SimulationError::UnknownSpecies(name.clone()))?;
        if !(value.is_finite() && *value >= 0.0) {
            return Err(SimulationError::InvalidScenario(format!(
                "initial concentration of {name} must be finite and non-negative, got {value}"
            )));
        }
        conc[i] = *value;
    }
    Ok(StateVector::new(0.0, conc))
}

fn validate(scenario: &Scenario) -> Result<(), SimulationError> {
    let bad = |m: String| Err(SimulationError::InvalidScenario(m));
    if !(scenario.dt > 0.0 && scenario.dt.is_finite()) {
        return bad(format!("dt must be positive, got {}", scenario.dt));
    }
    if scenario.max_steps.is_none() && scenario.tolerance.is_none() {
        return bad("need max_steps, tolerance or both".into());
    }
    if scenario.max_steps == Some(0) {
        return bad("max_steps must be positive".into());
    }
    if let Some(t) = scenario.tolerance {
        if !(t > 0.0) {
            return bad(format!("tolerance must be positive, got {t}"));
        }
    }
    if scenario.sample_every == 0 {
        return bad("sample_every must be positive".into());
    }
    if !(scenario.volume > 0.0) {
        return bad(format!("volume must be positive, got {}", scenario.volume));
    }
    if scenario.events.windows(2).any(|w| w[0].time > w[1].time) {
        return bad("events must be sorted by time".into());
    }
    if scenario.events.iter().any(|e| !(e.time >= 0.0)) {
        return bad("event times must be non-negative".into());
    }
    Ok(())
}

#[derive(Default)]
struct ClampLog {
    entries: Vec<(usize, u64, u64)>,
}

impl ClampLog {
    fn record(&mut self, species: usize, step: u64) {
        match self.entries.iter_mut().find(|(s, _, _)| *s == species) {
            Some(e) => e.2 += 1,
            None => self.entries.push((species, step, 1)),
        }
    }
}

fn step_size_check(network: &CompiledNetwork, conc: &[f64], dt: f64) -> Option<Diagnostic> {
    let (i, rate) = stiffness(network, conc)?;
    (rate * dt > STEP_SIZE_WARNING).then(|| Diagnostic::StepSize {
        dt,
        species: network.species()[i].name.clone(),
        stiffness: rate,
        suggested_dt: STEP_SIZE_WARNING / rate,
    })
}

/// Integrate a scenario forward with synchronous explicit Euler.
///
/// Events fire at the step boundary nearest their time, before that step's
/// gradient. The run stops when the convergence test holds for
/// [`CONVERGENCE_WINDOW`] consecutive steps after the last event, or when
/// `max_steps` is reached. The test is
/// `max_i |g_i| * dt / max(c_i, 1e-12) < tolerance`.
pub fn simulate(network: &CompiledNetwork, scenario: &Scenario) -> Result<SimulationResult, SimulationError> {
    validate(scenario)?;
    let state = initial_state(network, scenario)?;
    let events = scenario
        .events
        .iter()
        .map(|e| resolve_event(network, e))
        .collect::<Result<Vec<_>, _>>()?;

    let dt = scenario.dt;
    let n = network.len();
    let mut conc = state.conc;
    let mut volume = scenario.volume;
    let mut ws = Workspace::new(network);
    let mut diagnostics = Vec::new();
    let mut clamps = ClampLog::default();
    let mut warned = false;

    let mut check_step_size = |conc: &[f64], diagnostics: &mut Vec<Diagnostic>| {
        if !warned {
            if let Some(d) = step_size_check(network, conc, dt) {
                diagnostics.push(d);
                warned = true;
            }
        }
    };

    let mut next_event = 0;
    let event_step = |e: &ResolvedEvent| (e.time / dt).round() as u64;

    let mut step: u64 = 0;
    let mut trajectory = vec![StateVector::new(0.0, conc.clone())];
    let mut last_sampled = 0;
    let mut until_sample = scenario.sample_every;
    let mut consecutive = 0u32;
    let mut converged = false;
    let mut checked_initial = false;

    loop {
        let mut fired = false;
        while next_event < events.len() && event_step(&events[next_event]) <= step {
            volume = apply_resolved(&mut conc, volume, &events[next_event])?;
            next_event += 1;
            fired = true;
        }
        if fired {
            consecutive = 0;
            check_step_size(&conc, &mut diagnostics);
            if step == last_sampled {
                // replace the pre-event sample
                trajectory.pop();
                trajectory.push(StateVector::new(step as f64 * dt, conc.clone()));
            }
        }
        if !checked_initial {
            check_step_size(&conc, &mut diagnostics);
            checked_initial = true;
        }

        if scenario.max_steps.is_some_and(|m| step >= m) {
            break;
        }

        gradient_into(network, &conc, &mut ws);

        if let Some(tol) = scenario.tolerance {
            if next_event == events.len() {
                // |g| dt / max(c, floor) < tol, without the division
                let settled = (0..n).all(|i| ws.gradient[i].abs() * dt < tol * conc[i].max(CONVERGENCE_FLOOR));
                if settled {
                    consecutive += 1;
                } else {
                    consecutive = 0;
                }
            }
        }

        let current = step;
        advance(&mut conc, &ws.gradient, dt, true, |i| clamps.record(i, current));
        step += 1;

        // one comparison catches NaN, infinity and divergence
        if let Some(i) = conc.iter().position(|&c| !(c <= DIVERGENCE_LIMIT)) {
            let c = conc[i];
            if !c.is_finite() {
                return Err(SimulationError::NonFinite {
                    step,
                    species: network.species()[i].name.clone(),
                });
            }
            return Err(SimulationError::Divergence {
                step,
                time: step as f64 * dt,
                species: network.species()[i].name.clone(),
                value: c,
                suggested_dt: dt / 10.0,
            });
        }

        until_sample -= 1;
        if until_sample == 0 {
            trajectory.push(StateVector::new(step as f64 * dt, conc.clone()));
            last_sampled = step;
            until_sample = scenario.sample_every;
        }

        if consecutive >= CONVERGENCE_WINDOW {
            converged = true;
            break;
        }
    }

    if last_sampled != step {
        trajectory.push(StateVector::new(step as f64 * dt, conc.clone()));
    }
    for (species, first_step, count) in clamps.entries {
        diagnostics.push(Diagnostic::Clamped {
            species: network.species()[species].name.clone(),
            first_step,
            count,
        });
    }
    for e in &events[next_event..] {
        diagnostics.push(Diagnostic::EventSkipped { time: e.time });
    }
    if !converged && scenario.tolerance.is_some() {
        diagnostics.push(Diagnostic::NotConverged { steps: step });
    }

    Ok(SimulationResult {
        final_state: StateVector::new(step as f64 * dt, conc),
        converged,
        steps_executed: step,
        trajectory,
        diagnostics,
    })
}

/// Settings for time-reversed integration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseOptions {
    /// Positive step size; time decreases by `dt` each step.
    pub dt: f64,
    pub steps: u64,
    pub sample_every: u64,
    /// Entries below this value are raised to it before integrating.
    pub seed_floor: Option<f64>,
}

impl ReverseOptions {
    pub fn new(dt: f64, steps: u64) -> Self {
        Self {
            dt,
            steps,
            sample_every: 1,
            seed_floor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseResult {
    pub final_state: StateVector,
    pub steps_executed: u64,
    /// Sampled states in order of decreasing time, starting with the
    /// (seeded) start state.
    pub trajectory: Vec<StateVector>,
}

/// Running reverse-time integrator; `X' = X - g(X) * dt`, unclamped.
pub(crate) struct ReverseIntegrator<'a> {
    network: &'a CompiledNetwork,
    pub conc: Vec<f64>,
    pub time: f64,
    pub steps: u64,
    dt: f64,
    ws: Workspace,
}

impl<'a> ReverseIntegrator<'a> {
    pub fn new(network: &'a CompiledNetwork, start: &StateVector, dt: f64, seed_floor: Option<f64>) -> Self {
        let mut conc = start.conc.clone();
        if let Some(eps) = seed_floor {
            for c in conc.iter_mut() {
                if *c < eps {
                    *c = eps;
                }
            }
        }
        Self {
            network,
            conc,
            time: start.time,
            steps: 0,
            dt,
            ws: Workspace::new(network),
        }
    }

    pub fn step(&mut self) -> Result<(), SimulationError> {
        gradient_into(self.network, &self.conc, &mut self.ws);
        advance(&mut self.conc, &self.ws.gradient, -self.dt, false, |_| {});
        self.steps += 1;
        self.time -= self.dt;
        for (i, &c) in self.conc.iter().enumerate() {
            if !c.is_finite() || c.abs() > DIVERGENCE_LIMIT {
                return Err(SimulationError::ReverseDivergence {
                    step: self.steps,
                    time: self.time,
                    species: self.network.species()[i].name.clone(),
                    value: c,
                });
            }
        }
        Ok(())
    }

    pub fn state(&self) -> StateVector {
        StateVector::new(self.time, self.conc.clone())
    }
}

/// Integrate backward in time from `start` for `options.steps` steps.
pub fn simulate_reverse(
    network: &CompiledNetwork,
    start: &StateVector,
    options: &ReverseOptions,
) -> Result<ReverseResult, SimulationError> {
    check_dimension(network, start.conc.len())?;
    if !(options.dt > 0.0 && options.dt.is_finite()) {
        return Err(SimulationError::InvalidScenario(format!(
            "reverse dt must be positive, got {}",
            options.dt
        )));
    }
    if options.sample_every == 0 {
        return Err(SimulationError::InvalidScenario("sample_every must be positive".into()));
    }
    if let Some(i) = start.conc.iter().position(|c| !c.is_finite()) {
        return Err(SimulationError::NonFinite {
            step: 0,
            species: network.species()[i].name.clone(),
        });
    }
    let mut integrator = ReverseIntegrator::new(network, start, options.dt, options.seed_floor);
    let mut trajectory = vec![integrator.state()];
    while integrator.steps < options.steps {
        integrator.step()?;
        if integrator.steps.is_multiple_of(options.sample_every) {
            trajectory.push(integrator.state());
        }
    }
    if !options.steps.is_multiple_of(options.sample_every) {
        trajectory.push(integrator.state());
    }
    Ok(ReverseResult {
        final_state: integrator.state(),
        steps_executed: integrator.steps,
        trajectory,
    })
}
