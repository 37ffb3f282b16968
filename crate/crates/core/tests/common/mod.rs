//! Generators and independent oracles shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nutrinet::assets::load_reference_model;
use nutrinet::dsl::{
    compile_network, parse_model, CompiledNetwork, Formula, ModelDefinition, Participant, Phase, RateSpec, Reaction,
    Species,
};
use nutrinet::engine::{initial_state, simulate, simulate_reverse, ReverseOptions, Scenario, StateVector};
use nutrinet::observables::{charge_balance, element_totals};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn reference() -> CompiledNetwork {
    compile_network(&load_reference_model().unwrap())
}

/// Step-1 salts with neutral water, as in the bundled scenario.
pub fn step_one_inputs() -> Scenario {
    Scenario::default()
        .with_initial("H2O", 1.0)
        .with_initial("H+", 1e-7)
        .with_initial("OH-", 1e-7)
        .with_initial("KNO3", 3.8835e-3)
        .with_initial("Ca(NO3)2", 0.97087e-3)
        .with_initial("NH4H2PO4", 0.48544e-3)
}

// ---------------------------------------------------------------- superposition

/// Random network built directly (no balance requirement). Species appear in
/// several reactions so their ODEs superpose many terms.
pub fn random_model(rng: &mut ChaCha8Rng) -> ModelDefinition {
    let n = rng.gen_range(2..=6);
    let species: Vec<Species> = (0..n)
        .map(|i| Species {
            name: format!("S{i}"),
            charge: rng.gen_range(-2..=2),
            phase: Phase::Aqueous,
            formula: Formula(BTreeMap::from([("X".to_string(), 1)])),
            molar_mass: None,
        })
        .collect();
    let m = rng.gen_range(1..=6);
    let mut reactions = Vec::new();
    for r in 0..m {
        let pick = |count: usize, rng: &mut ChaCha8Rng| {
            let mut names: Vec<usize> = (0..n).collect();
            for i in (1..names.len()).rev() {
                names.swap(i, rng.gen_range(0..=i));
            }
            names
                .into_iter()
                .take(count)
                .map(|i| Participant {
                    species: format!("S{i}"),
                    stoichiometry: rng.gen_range(1..=3),
                })
                .collect::<Vec<_>>()
        };
        let reactants = pick(rng.gen_range(1..=3.min(n)), rng);
        let products = pick(rng.gen_range(0..=3.min(n)), rng);
        let kf = 10f64.powf(rng.gen_range(-3.0..3.0));
        let kb = if rng.gen_bool(0.6) { 10f64.powf(rng.gen_range(-3.0..3.0)) } else { 0.0 };
        reactions.push(Reaction {
            id: format!("r{r}"),
            reactants,
            products,
            reversible: kb > 0.0,
            rate: RateSpec::Explicit { kf, kb },
            reference_k: None,
            paper_compat: rng.gen_bool(0.2),
        });
    }
    ModelDefinition { species, reactions }
}

/// Per-reaction evaluation: net flux of each reaction applied to its
/// participants. Returns the gradient and, per species, the sum of absolute
/// contributions (the scale for relative comparison).
pub fn naive_gradient(model: &ModelDefinition, conc: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let idx = |name: &str| model.species.iter().position(|s| s.name == name).unwrap();
    let mut g = vec![0.0; model.species.len()];
    let mut scale = vec![0.0; model.species.len()];
    for r in &model.reactions {
        let monomial = |side: &[Participant]| {
            side.iter()
                .map(|p| conc[idx(&p.species)].powi(p.stoichiometry as i32))
                .product::<f64>()
        };
        let fwd = r.kf() * monomial(&r.reactants);
        let bwd = if r.kb() > 0.0 { r.kb() * monomial(&r.products) } else { 0.0 };
        let back_mult = |nu: u32| if r.paper_compat { 1.0 } else { nu as f64 };
        for p in &r.reactants {
            let i = idx(&p.species);
            let a = p.stoichiometry as f64 * fwd;
            let b = back_mult(p.stoichiometry) * bwd;
            g[i] += -a + b;
            scale[i] += a + b;
        }
        for p in &r.products {
            let i = idx(&p.species);
            let a = p.stoichiometry as f64 * fwd;
            let b = back_mult(p.stoichiometry) * bwd;
            g[i] += a - b;
            scale[i] += a + b;
        }
    }
    (g, scale)
}

// ---------------------------------------------------------------- equilibrium law

pub struct EquilibriumCase {
    pub label: &'static str,
    pub model: String,
    pub kf: f64,
    pub kb: f64,
    pub initial: Vec<(&'static str, f64)>,
    /// Closed-form (or bisection) equilibrium concentrations.
    pub oracle: Vec<(&'static str, f64)>,
    /// (species, exponent) with products positive, reactants negative.
    pub quotient: Vec<(&'static str, i32)>,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(lo) < 0.0) == (f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn equilibrium_case(rng: &mut ChaCha8Rng, family: usize) -> EquilibriumCase {
    let k = 10f64.powf(rng.gen_range(-1.0..1.0));
    let c = 10f64.powf(rng.gen_range(-0.5..0.5));
    let (kf, kb) = (k * c, c);
    let a0 = rng.gen_range(0.1..2.0);
    let header = "species A charge=0 formula=X1Y1\nspecies B charge=0 formula=X1\nspecies C charge=0 formula=Y1\nspecies D charge=0 formula=Y1\n";
    match family % 5 {
        0 => {
            // A <-> C isomerisation (both Y1)
            let model = format!("species A charge=0 formula=Y1\nspecies C charge=0 formula=Y1\nreaction r: A <-> C kf={kf:?} kb={kb:?}\n");
            let x = k * a0 / (1.0 + k);
            EquilibriumCase {
                label: "A<->B",
                model,
                kf,
                kb,
                initial: vec![("A", a0)],
                oracle: vec![("A", a0 - x), ("C", x)],
                quotient: vec![("C", 1), ("A", -1)],
            }
        }
        1 => {
            let model = format!("{header}reaction r: A <-> B + C kf={kf:?} kb={kb:?}\n");
            let x = (-k + (k * k + 4.0 * k * a0).sqrt()) / 2.0;
            EquilibriumCase {
                label: "A<->B+C",
                model,
                kf,
                kb,
                initial: vec![("A", a0)],
                oracle: vec![("A", a0 - x), ("B", x), ("C", x)],
                quotient: vec![("B", 1), ("C", 1), ("A", -1)],
            }
        }
        2 => {
            // 2 B <-> E with E = X2
            let model = format!("species B charge=0 formula=X1\nspecies E charge=0 formula=X2\nreaction r: 2 B <-> E kf={kf:?} kb={kb:?}\n");
            let (p, q) = (4.0 * k * a0 + 1.0, 4.0 * k * a0 * a0 * k);
            let y = (p - (p * p - 4.0 * q).sqrt()) / (8.0 * k);
            EquilibriumCase {
                label: "2A<->B",
                model,
                kf,
                kb,
                initial: vec![("B", a0)],
                oracle: vec![("B", a0 - 2.0 * y), ("E", y)],
                quotient: vec![("E", 1), ("B", -2)],
            }
        }
        3 => {
            // four species, P + Q <-> R + S
            let b0 = rng.gen_range(0.1..2.0);
            let model = format!(
                "species P charge=0 formula=X1\nspecies Q charge=0 formula=Y1\nspecies R charge=0 formula=X1\nspecies S charge=0 formula=Y1\nreaction r: P + Q <-> R + S kf={kf:?} kb={kb:?}\n"
            );
            // x^2 = K (a0 - x)(b0 - x)
            let x = bisect(|x| x * x - k * (a0 - x) * (b0 - x), 0.0, a0.min(b0));
            EquilibriumCase {
                label: "A+B<->C+D",
                model,
                kf,
                kb,
                initial: vec![("P", a0), ("Q", b0)],
                oracle: vec![("P", a0 - x), ("Q", b0 - x), ("R", x), ("S", x)],
                quotient: vec![("R", 1), ("S", 1), ("P", -1), ("Q", -1)],
            }
        }
        _ => {
            // T <-> 3 B, cubic (3x)^3 = K (a0 - x)
            let model = format!("species T charge=0 formula=X3\nspecies B charge=0 formula=X1\nreaction r: T <-> 3 B kf={kf:?} kb={kb:?}\n");
            let x = bisect(|x| 27.0 * x * x * x - k * (a0 - x), 0.0, a0);
            EquilibriumCase {
                label: "A<->3B",
                model,
                kf,
                kb,
                initial: vec![("T", a0)],
                oracle: vec![("T", a0 - x), ("B", 3.0 * x)],
                quotient: vec![("B", 3), ("T", -1)],
            }
        }
    }
}

pub struct EquilibriumOutcome {
    pub quotient_error: f64,
    pub oracle_error: f64,
    pub converged: bool,
}

pub fn run_equilibrium(case: &EquilibriumCase) -> EquilibriumOutcome {
    let net = compile_network(&parse_model(&case.model).unwrap());
    let mut scenario = Scenario::default();
    for &(s, v) in &case.initial {
        scenario = scenario.with_initial(s, v);
    }
    // fastest relaxation is bounded by (kf + kb) * 27 * (1 + a0)^2
    let top = case.initial.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    scenario.dt = 0.01 / ((case.kf + case.kb) * 27.0 * (1.0 + top).powi(2));
    scenario.tolerance = Some(1e-13);
    scenario.max_steps = Some(20_000_000);
    scenario.sample_every = u64::MAX;
    let result = simulate(&net, &scenario).unwrap();
    let c = |name: &str| result.final_state.conc[net.index_of(name).unwrap()];
    let q: f64 = case.quotient.iter().map(|&(s, e)| c(s).powi(e)).product();
    let k = case.kf / case.kb;
    let oracle_error = case
        .oracle
        .iter()
        .map(|&(s, v)| (c(s) - v).abs() / v.abs())
        .fold(0.0, f64::max);
    EquilibriumOutcome {
        quotient_error: (q - k).abs() / k,
        oracle_error,
        converged: result.converged,
    }
}

// ---------------------------------------------------------------- conservation

/// Largest relative drift of any element total and of net charge over
/// `trajectory`, measured against the first state. A neutral start has zero
/// net charge, so charge drift is scaled by the largest `sum |charge_i| c_i`
/// along the trajectory.
pub fn conservation_drift(network: &CompiledNetwork, trajectory: &[StateVector]) -> (f64, f64) {
    let first = &trajectory[0];
    let e0 = element_totals(network, first).unwrap();
    let q0 = charge_balance(network, first).unwrap();
    let q_scale: f64 = trajectory
        .iter()
        .map(|state| {
            network
                .species()
                .iter()
                .zip(&state.conc)
                .map(|(s, c)| (s.charge as f64 * c).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let mut element_drift = 0.0f64;
    let mut charge_drift = 0.0f64;
    for state in trajectory {
        let e = element_totals(network, state).unwrap();
        for (el, v0) in &e0 {
            if *v0 > 0.0 {
                element_drift = element_drift.max((e[el] - v0).abs() / v0);
            } else {
                assert_eq!(e[el], 0.0, "element {el} appeared from nothing");
            }
        }
        let q = charge_balance(network, state).unwrap();
        if q_scale > 0.0 {
            charge_drift = charge_drift.max((q - q0).abs() / q_scale);
        }
    }
    (element_drift, charge_drift)
}

pub fn random_reference_state(rng: &mut ChaCha8Rng, network: &CompiledNetwork) -> Scenario {
    let mut s = Scenario::default()
        .with_initial("H2O", 1.0)
        .with_initial("H+", 1e-7)
        .with_initial("OH-", 1e-7);
    for name in network.species_names() {
        if ["H2O", "H+", "OH-"].contains(&name) {
            continue;
        }
        if rng.gen_bool(0.6) {
            s = s.with_initial(name, rng.gen_range(0.0..5e-3));
        }
    }
    s
}

// ---------------------------------------------------------------- reverse roundtrip

/// Forward `steps` from the step-1 inputs, then reverse the same number of
/// steps. Returns the worst per-species error relative to
/// `max(|x0|, |x_forward|)` and the species it occurs in.
pub fn reverse_roundtrip(network: &CompiledNetwork, steps: u64, dt: f64) -> (f64, String) {
    let mut sc = step_one_inputs().fixed_steps(steps);
    sc.dt = dt;
    let x0 = initial_state(network, &sc).unwrap();
    let fwd = simulate(network, &sc).unwrap();
    let back = simulate_reverse(network, &fwd.final_state, &ReverseOptions::new(dt, steps)).unwrap();
    let mut worst = (0.0, String::new());
    for (i, s) in network.species().iter().enumerate() {
        let scale = x0.conc[i].abs().max(fwd.final_state.conc[i].abs());
        if scale == 0.0 {
            continue;
        }
        let e = (back.final_state.conc[i] - x0.conc[i]).abs() / scale;
        if e > worst.0 {
            worst = (e, s.name.clone());
        }
    }
    worst
}
