//! Run time backwards: a short roundtrip, then inversion from a settled state.
use nutrinet::assets::{load_reference_model, step_scenario};
use nutrinet::dsl::compile_network;
use nutrinet::engine::{initial_state, simulate, simulate_reverse, ReverseOptions};
use nutrinet::inverse::{invert_by_reverse_simulation, ReverseInverseOptions};

fn main() {
    let net = compile_network(&load_reference_model().unwrap());
    let steps = 100_000;
    let sc = step_scenario(1).unwrap().fixed_steps(steps);
    let x0 = initial_state(&net, &sc).unwrap();
    let fwd = simulate(&net, &sc).unwrap();
    let back = simulate_reverse(&net, &fwd.final_state, &ReverseOptions::new(sc.dt, steps)).unwrap();
    for salt in ["KNO3", "Ca(NO3)2", "NH4H2PO4"] {
        let i = net.index_of(salt).unwrap();
        println!(
            "{salt:<9} start {:.6e}  forward {:.6e}  back {:.6e}",
            x0.conc[i], fwd.final_state.conc[i], back.final_state.conc[i]
        );
    }

    // fully dissolved salts leave no trace to run back from, so the answer
    // hinges on the seed value
    let settled = simulate(&net, &step_scenario(1).unwrap()).unwrap();
    let r = invert_by_reverse_simulation(&net, &settled.final_state, &ReverseInverseOptions::default()).unwrap();
    println!("reverse steps {}, sensitive {}", r.steps, r.sensitive);
    for ((name, a), (_, b)) in r.plan.amounts.iter().zip(&r.refined_amounts) {
        println!("{name:<9} {:.6} mmol/L, seed/10: {:.6} mmol/L", a * 1e3, b * 1e3);
    }
    if let Some(s) = &r.stoichiometric {
        println!("stoichiometric: {:?}", s.amounts);
    }
}
