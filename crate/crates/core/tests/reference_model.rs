mod common;

use nutrinet::assets::{golden_cases, step_scenario};
use nutrinet::dsl::{compile_network, parse_model};
use nutrinet::engine::{parse_scenario, simulate, Diagnostic, Scenario, SimulationError};
use nutrinet::inverse::{invert_by_reverse_simulation, invert_stoichiometric, ReverseInverseOptions};
use nutrinet::observables::{ph, Report};

/// kf [H2O] = kb [H+][OH-] with [H+] = [OH-] gives sqrt(Kw [H2O]).
#[test]
fn water_reaches_neutral_equilibrium() {
    let net = common::reference();
    let mut sc = Scenario::default().with_initial("H2O", 1.0);
    // the autoionization timescale is ~1e13 s; a step of 1e10 s still
    // contracts by only 2e-3 per step
    sc.dt = 1e10;
    sc.max_steps = Some(1_000_000);
    let r = simulate(&net, &sc).unwrap();
    assert!(r.converged);
    // the warning looks at the fastest reaction, not at what is present
    assert!(r.diagnostics.iter().all(|d| matches!(d, Diagnostic::StepSize { .. })));
    let want = (1e-20f64 / 1e-6 * 1.0).sqrt();
    for ion in ["H+", "OH-"] {
        let got = r.final_state.conc[net.index_of(ion).unwrap()];
        assert!((got - want).abs() / want < 0.01, "{ion} = {got:e}");
    }
    assert!((ph(&net, &r.final_state).unwrap() - 7.0).abs() < 0.01);
}

#[test]
fn fixed_step_protocol_leaves_calcium_nitrate_undissolved() {
    let net = common::reference();
    let sc = step_scenario(1).unwrap().fixed_steps(2_500_000);
    let r = simulate(&net, &sc).unwrap();
    assert!(!r.converged);
    assert_eq!(r.steps_executed, 2_500_000);
    let ca = r.final_state.conc[net.index_of("Ca2+").unwrap()] * 1e3;
    let k = r.final_state.conc[net.index_of("K+").unwrap()] * 1e3;
    // k4 = 161/s over 0.025 s: exp(-4.03) of the salt remains
    let expected_fraction = 1.0 - (-161.1897361f64 * 0.025).exp();
    assert!((ca / 0.97087 - expected_fraction).abs() < 2e-3, "Ca2+ {ca}");
    assert!((k - 3.8835).abs() / 3.8835 < 1e-6);
}

#[test]
fn step_one_report_and_inverse() {
    let net = common::reference();
    let case = &golden_cases().unwrap()[0];
    let r = simulate(&net, &case.scenario).unwrap();
    assert!(r.converged);
    let report = Report::from_result(&net, &r).unwrap();
    assert!(report.render().contains("species.K+.mmol_per_L: 3.883500\n"));
    assert!(report.net_charge.abs() < 1e-9);

    // the simulated profile inverts back to the salts up to what the
    // calcium phosphate equilibria hold back
    let ions = ["K+", "Ca2+", "NO3-", "NH4+", "H2PO4-"];
    let target: Vec<(&str, f64)> = ions
        .iter()
        .map(|&s| (s, r.final_state.conc[net.index_of(s).unwrap()]))
        .collect();
    let plan = invert_stoichiometric(&net, &["KNO3", "Ca(NO3)2", "NH4H2PO4"], &target, 1e-5).unwrap();
    for (salt, (_, want)) in ["KNO3", "Ca(NO3)2", "NH4H2PO4"].iter().zip(&case.inputs) {
        let got = plan.amount(salt).unwrap() * 1e3;
        assert!((got - want).abs() / want < 1e-4, "{salt}: {got} vs {want}");
    }

    // reverse simulation from the settled state depends on the seed floor
    let rev = invert_by_reverse_simulation(&net, &r.final_state, &ReverseInverseOptions::default()).unwrap();
    assert!(rev.sensitive);
    let stoich = rev.stoichiometric.expect("stoichiometric plan attached");
    assert!((stoich.amount("KNO3").unwrap() - 3.8835e-3).abs() / 3.8835e-3 < 1e-6);
}

#[test]
fn reverse_roundtrip_recovers_initial_state() {
    let net = common::reference();
    let (err, species) = common::reverse_roundtrip(&net, 100_000, 1e-8);
    assert!(err <= 1e-4, "{species}: {err:e}");
}

#[test]
fn large_step_warns_and_does_not_panic() {
    let net = common::reference();
    let mut sc = step_scenario(1).unwrap();
    sc.dt = 1e-4;
    sc.max_steps = Some(200_000);
    let outcome = simulate(&net, &sc);
    if let Ok(r) = &outcome {
        let warn = r.diagnostics.iter().find(|d| matches!(d, Diagnostic::StepSize { .. })).expect("step-size warning");
        assert!(warn.to_string().contains("may converge to wrong values"));
    }
}

#[test]
fn divergence_guard_names_the_species() {
    let m = parse_model("species A charge=0 formula=X\nspecies B charge=0 formula=X\nreaction r: A <-> B kf=1000 kb=1000\n").unwrap();
    let net = compile_network(&m);
    let mut sc = Scenario::default().with_initial("A", 1.0);
    sc.dt = 1.0;
    match simulate(&net, &sc) {
        Err(e @ SimulationError::Divergence { .. }) => {
            let msg = e.to_string();
            // both species oscillate with growing amplitude; B crosses first
            assert!(msg.contains(": B reached"), "{msg}");
            assert!(msg.contains("reduce dt"));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn concentrate_additions_through_scenario_file() {
    let net = common::reference();
    let sc = parse_scenario(
        "volume 1.0\ninit H2O 1\n\
         at 0 add KNO3 4e-3 in 0.01\nat 0 add Ca(NO3)2 1e-3 in 0.01\nat 0 add NH4H2PO4 0.5e-3 in 0.01\n\
         max_steps 1\ntolerance 1e-7\n",
    )
    .unwrap();
    let r = simulate(&net, &sc).unwrap();
    let first = &r.trajectory[0];
    let mmol = |s: &str| first.conc[net.index_of(s).unwrap()] * 1e3;
    assert!((mmol("KNO3") - 3.8835).abs() < 1e-4);
    assert!((mmol("Ca(NO3)2") - 0.97087).abs() < 1e-5);
    assert!((mmol("NH4H2PO4") - 0.48544).abs() < 1e-5);
}
