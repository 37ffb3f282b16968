//! Dissolve the first golden-case salts and print the converged ions.
use std::time::Instant;

use nutrinet::assets::{load_reference_model, step_scenario};
use nutrinet::dsl::compile_network;
use nutrinet::engine::simulate;

fn main() {
    let net = compile_network(&load_reference_model().unwrap());
    let scenario = step_scenario(1).unwrap();
    let t = Instant::now();
    let r = simulate(&net, &scenario).expect("step 1 runs");
    println!(
        "converged={} after {} steps ({:.2} s)",
        r.converged,
        r.steps_executed,
        t.elapsed().as_secs_f64()
    );
    for ion in ["K+", "Ca2+", "NO3-", "NH4+", "H2PO4-", "HPO4^2-", "H+"] {
        let c = r.final_state.conc[net.index_of(ion).unwrap()];
        println!("{ion:<8} {:>12.6} mmol/L", c * 1e3);
    }
    for d in &r.diagnostics {
        println!("{d}");
    }
}
