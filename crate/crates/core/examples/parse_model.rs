//! Parse a small model, print what was read, and show a validation error.
use nutrinet::dsl::{compile_network, parse_model};

const MODEL: &str = "\
# gypsum
species Ca2+ charge=+2 formula=Ca1 molar_mass=40.078
species SO4^2- charge=-2 formula=S1O4 molar_mass=96.06
species CaSO4 charge=0 formula=Ca1S1O4 phase=solid molar_mass=136.14
reaction dissolve: CaSO4 <-> Ca2+ + SO4^2- K=4.93e-5 c=10
";

fn main() {
    let model = parse_model(MODEL).expect("valid model");
    for s in &model.species {
        println!("{:<8} charge {:+} phase {:?}", s.name, s.charge, s.phase);
    }
    for r in &model.reactions {
        println!("{}: kf={:e} kb={:e}", r.id, r.kf(), r.kb());
    }
    let net = compile_network(&model);
    println!("{} species, {} rate terms", net.len(), net.term_count());

    // charge does not balance
    let bad = "species A+ charge=1 formula=A\nspecies A charge=0 formula=A\nreaction leak: A+ -> A kf=1 kb=0\n";
    match parse_model(bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }

    // canonical text reparses to the same definition
    let again = parse_model(&model.to_model_text()).unwrap();
    assert_eq!(again, model);
}
