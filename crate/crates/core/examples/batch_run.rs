//! Several scenarios across worker threads; results keep input order.
use nutrinet::assets::{load_reference_model, step_scenario};
use nutrinet::dsl::compile_network;
use nutrinet::engine::run_batch;
use nutrinet::observables::csv_string;

fn main() {
    let net = compile_network(&load_reference_model().unwrap());
    let scenarios: Vec<_> = (1..=4)
        .map(|step| {
            let mut s = step_scenario(step).unwrap().fixed_steps(100_000);
            s.sample_every = 20_000;
            s
        })
        .collect();
    let one = run_batch(&net, &scenarios, 1);
    let many = run_batch(&net, &scenarios, 4);
    for (i, (a, b)) in one.iter().zip(&many).enumerate() {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        let same = csv_string(&net, &a.trajectory) == csv_string(&net, &b.trajectory);
        let k = net.index_of("K+").unwrap();
        println!("step {}: K+ {:.6} mmol/L, identical across job counts: {same}", i + 1, a.final_state.conc[k] * 1e3);
    }
    let csv = csv_string(&net, &one[0].as_ref().unwrap().trajectory);
    println!("step 1 csv: {} rows, header {}", csv.lines().count() - 1, csv.lines().next().unwrap());
}
