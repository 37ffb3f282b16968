//! All ten golden cases in parallel, rendered as the comparison table.
use nutrinet::assets::{golden_cases, load_reference_model};
use nutrinet::cli::{golden_cells, render_golden_table};
use nutrinet::dsl::compile_network;
use nutrinet::engine::{run_batch, SimulationResult};

fn main() {
    let jobs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let net = compile_network(&load_reference_model().unwrap());
    let cases = golden_cases().unwrap();
    let scenarios: Vec<_> = cases.iter().map(|c| c.scenario.clone()).collect();
    let results: Vec<SimulationResult> = run_batch(&net, &scenarios, jobs)
        .into_iter()
        .collect::<Result<_, _>>()
        .expect("all cases run");
    let cells = golden_cells(&net, &cases, &results);
    print!("{}", render_golden_table(&cells));
    let failing = cells.iter().filter(|c| !c.pass).count();
    println!("{} of {} cells within tolerance", cells.len() - failing, cells.len());
}
