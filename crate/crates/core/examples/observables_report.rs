//! pH, TDS, charge and element totals for a step-1 state.
use nutrinet::assets::{load_reference_model, step_scenario};
use nutrinet::dsl::compile_network;
use nutrinet::engine::simulate;
use nutrinet::observables::{charge_balance, element_totals, ph, tds, Report};

fn main() {
    let net = compile_network(&load_reference_model().unwrap());
    let r = simulate(&net, &step_scenario(1).unwrap().fixed_steps(500_000)).unwrap();
    let s = &r.final_state;
    println!("pH {:.3}", ph(&net, s).unwrap());
    println!("TDS {:.2} mg/L", tds(&net, s).unwrap());
    println!("net charge {:.3e} mol/L", charge_balance(&net, s).unwrap());
    for (el, total) in element_totals(&net, s).unwrap() {
        println!("{el:<2} {:.6} mmol/L", total * 1e3);
    }
    println!("--");
    print!("{}", Report::from_result(&net, &r).unwrap().render());
}
