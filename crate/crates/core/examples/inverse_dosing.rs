//! Salt amounts for a target ion profile, and what an impossible target looks like.
use nutrinet::assets::load_reference_model;
use nutrinet::dsl::compile_network;
use nutrinet::inverse::{dissolution_inputs, invert_stoichiometric, parse_target, render_plan};

fn main() {
    let net = compile_network(&load_reference_model().unwrap());
    let inputs = dissolution_inputs(&net);
    println!("inputs: {}", inputs.join(", "));

    let target = parse_target(
        "target K+ 3.8835\ntarget Ca2+ 0.97087\ntarget NO3- 5.82524\ntarget NH4+ 0.48544\ntarget H2PO4- 0.48544\n",
    )
    .unwrap();
    let plan = invert_stoichiometric(&net, &inputs, &target, 1e-6).unwrap();
    print!("{}", render_plan(&plan));

    // more calcium than nitrate can accompany
    println!("--");
    let plan = invert_stoichiometric(&net, &inputs, &[("Ca2+", 2e-3), ("NO3-", 1e-3)], 1e-6).unwrap();
    print!("{}", render_plan(&plan));
}
