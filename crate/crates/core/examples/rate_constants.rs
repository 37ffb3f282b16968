//! Equilibrium constants, rate pairs and the consistency check.
use nutrinet::assets::load_reference_model;
use nutrinet::kinetics::{
    check_rate_consistency, ksp_from_solubility, rate_pair_from_k, ConstantKind, EquilibriumConstant, IonRole,
};

fn main() {
    // KNO3: one cation, one anion
    let ksp = ksp_from_solubility(&[(IonRole::Cation, 1), (IonRole::Anion, 1)], 3.77685133).unwrap();
    println!("Ksp(KNO3) = {:.8}", ksp.value());

    let kw = EquilibriumConstant::new(1e-14, ConstantKind::Kw).unwrap();
    for c in [1e-6, 1.0, 1000.0] {
        let (kf, kb) = rate_pair_from_k(kw, c).unwrap();
        println!("c={c:e}: kf={kf:e} kb={kb:e} ratio={:e}", kf / kb);
    }

    for r in &load_reference_model().unwrap().reactions {
        let check = check_rate_consistency(r);
        let mark = if check.is_mismatch() { "  <- declared K differs" } else { "" };
        match check.implied_k() {
            Some(k) => println!("{:<4} K={k:.6e}{mark}", r.id),
            None => println!("{:<4} irreversible", r.id),
        }
    }
}
