mod common;

use nutrinet::assets::{step_scenario, REFERENCE_MODEL};
use nutrinet::dsl::{compile_network, parse_model};
use nutrinet::engine::{run_batch, simulate, Scenario};
use nutrinet::observables::csv_string;

fn short(step: usize) -> Scenario {
    let mut s = step_scenario(step).unwrap().fixed_steps(200_000);
    s.sample_every = 5_000;
    s
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let net = common::reference();
    let a = simulate(&net, &short(3)).unwrap();
    let b = simulate(&net, &short(3)).unwrap();
    assert_eq!(csv_string(&net, &a.trajectory), csv_string(&net, &b.trajectory));
    for (x, y) in a.final_state.conc.iter().zip(&b.final_state.conc) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    assert_eq!(a, b);
}

#[test]
fn batch_matches_sequential_for_any_job_count() {
    let net = common::reference();
    let scenarios: Vec<Scenario> = (1..=5).map(short).collect();
    let sequential: Vec<String> = scenarios
        .iter()
        .map(|s| csv_string(&net, &simulate(&net, s).unwrap().trajectory))
        .collect();
    for jobs in [1, 2, 8] {
        let batch: Vec<String> = run_batch(&net, &scenarios, jobs)
            .into_iter()
            .map(|r| csv_string(&net, &r.unwrap().trajectory))
            .collect();
        assert_eq!(batch, sequential, "jobs = {jobs}");
    }
}

#[test]
fn species_order_only_relabels_results() {
    let (species, rest): (Vec<&str>, Vec<&str>) =
        REFERENCE_MODEL.lines().partition(|l| l.trim_start().starts_with("species "));
    let mut shuffled: Vec<&str> = species.clone();
    shuffled.reverse();
    shuffled.swap(2, 9);
    let text = shuffled.into_iter().chain(rest).collect::<Vec<_>>().join("\n");
    let permuted = compile_network(&parse_model(&text).unwrap());
    let net = common::reference();
    assert_ne!(
        permuted.species_names().collect::<Vec<_>>(),
        net.species_names().collect::<Vec<_>>()
    );

    let sc = short(7);
    let a = simulate(&net, &sc).unwrap();
    let b = simulate(&permuted, &sc).unwrap();
    assert_eq!(a.steps_executed, b.steps_executed);
    for (i, name) in net.species_names().enumerate() {
        let j = permuted.index_of(name).unwrap();
        assert_eq!(a.final_state.conc[i].to_bits(), b.final_state.conc[j].to_bits(), "{name}");
        for (sa, sb) in a.trajectory.iter().zip(&b.trajectory) {
            assert_eq!(sa.conc[i].to_bits(), sb.conc[j].to_bits(), "{name} at t={}", sa.time);
        }
    }
}
