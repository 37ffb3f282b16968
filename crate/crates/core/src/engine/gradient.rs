use crate::dsl::CompiledNetwork;

use super::types::{SimulationError, StateVector};

/// Any concentration above this (mol/L) is treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[inline]
pub(crate) fn ipow(x: f64, n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => {
            let mut acc = x;
            for _ in 1..n {
                acc *= x;
            }
            acc
        }
    }
}

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    pub fluxes: Vec<f64>,
    pub gradient: Vec<f64>,
}

impl Workspace {
    pub fn new(network: &CompiledNetwork) -> Self {
        Self {
            fluxes: vec![0.0; network.fluxes.len()],
            gradient: vec![0.0; network.len()],
        }
    }
}

/// Fill `ws.gradient` with `dX/dt` at `conc`.
///
/// Each flux is `rate * c1^e1 * c2^e2 ...` multiplied left to right; each term
/// is `coefficient * flux`, summed per species in term order. The fixed order
/// makes results bitwise reproducible.
pub(crate) fn gradient_into(network: &CompiledNetwork, conc: &[f64], ws: &mut Workspace) {
    let k = &network.kernel;
    for (f, out) in ws.fluxes.iter_mut().enumerate() {
        let mut v = k.flux_rate[f];
        for j in k.flux_start[f] as usize..k.flux_start[f + 1] as usize {
            v *= ipow(conc[k.factor_species[j] as usize], k.factor_exponent[j]);
        }
        *out = v;
    }
    for (i, g) in ws.gradient.iter_mut().enumerate() {
        let mut acc = 0.0;
        for t in k.term_start[i] as usize..k.term_start[i + 1] as usize {
            acc += k.term_coefficient[t] * ws.fluxes[k.term_flux[t] as usize];
        }
        *g = acc;
    }
}

/// Superposed gradient (mol/L per second).
pub fn eval_gradient(network: &CompiledNetwork, state: &StateVector) -> Result<Vec<f64>, SimulationError> {
    check_dimension(network, state.conc.len())?;
    let mut ws = Workspace::new(network);
    gradient_into(network, &state.conc, &mut ws);
    Ok(ws.gradient)
}

pub(crate) fn check_dimension(network: &CompiledNetwork, found: usize) -> Result<(), SimulationError> {
    if found != network.len() {
        return Err(SimulationError::DimensionMismatch {
            expected: network.len(),
            found,
        });
    }
    Ok(())
}

/// Largest self-consumption rate `|d g_i / d c_i|` over species, counting
/// only terms that consume the species they depend on. Returns the species
/// index and the rate in 1/s.
pub(crate) fn stiffness(network: &CompiledNetwork, conc: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..network.len() {
        let mut rate = 0.0;
        for t in network.terms(i) {
            if t.coefficient >= 0.0 {
                continue;
            }
            let Some(own) = t.monomial.iter().find(|f| f.species == i) else {
                continue;
            };
            let mut d = t.rate * own.exponent as f64 * ipow(conc[i], own.exponent - 1);
            for f in &t.monomial {
                if f.species != i {
                    d *= ipow(conc[f.species], f.exponent);
                }
            }
            rate += -t.coefficient * d;
        }
        if best.is_none_or(|(_, b)| rate > b) {
            best = Some((i, rate));
        }
    }
    best
}

/// Outcome of one explicit Euler step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: StateVector,
    /// Species that would have turned negative and were set to zero.
    pub clamped: Vec<usize>,
}

/// One synchronous Euler update `X' = X + g * dt`, all species from the same
/// pre-step state.
///
/// With `dt > 0` negative results are clamped to zero. A negative `dt`
/// integrates backward in time and never clamps.
pub fn step(state: &StateVector, gradient: &[f64], dt: f64) -> Result<StepOutcome, SimulationError> {
    if gradient.len() != state.conc.len() {
        return Err(SimulationError::DimensionMismatch {
            expected: state.conc.len(),
            found: gradient.len(),
        });
    }
    let mut conc = state.conc.clone();
    let mut clamped = Vec::new();
    advance(&mut conc, gradient, dt, dt > 0.0, |i| clamped.push(i));
    if let Some(i) = conc.iter().position(|c| !c.is_finite()) {
        return Err(SimulationError::NonFinite {
            step: 0,
            species: format!("species #{i}"),
        });
    }
    Ok(StepOutcome {
        state: StateVector::new(state.time + dt, conc),
        clamped,
    })
}

/// In-place update; `on_clamp` receives each clamped index.
#[inline]
pub(crate) fn advance(conc: &mut [f64], gradient: &[f64], dt: f64, clamp: bool, mut on_clamp: impl FnMut(usize)) {
    for (i, (c, g)) in conc.iter_mut().zip(gradient).enumerate() {
        let next = *c + g * dt;
        if clamp && next < 0.0 {
            on_clamp(i);
            *c = 0.0;
        } else {
            *c = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{compile_network, parse_model};

    #[test]
    fn step_examples() {
        let s = StateVector::new(0.0, vec![1.0]);
        let out = step(&s, &[-0.5], 2.0).unwrap();
        assert_eq!(out.state.conc, vec![0.0]);
        assert_eq!(out.state.time, 2.0);
        assert!(out.clamped.is_empty());

        let s = StateVector::new(0.0, vec![1e-10]);
        let out = step(&s, &[-1.0], 1e-8).unwrap();
        assert_eq!(out.state.conc, vec![0.0]);
        assert_eq!(out.clamped, vec![0]);

        let s = StateVector::new(3.0, vec![1.0, 2.0]);
        for dt in [1e-8, 1.0, 1e3] {
            assert_eq!(step(&s, &[0.0, 0.0], dt).unwrap().state.conc, vec![1.0, 2.0]);
        }
    }

    #[test]
    fn reverse_step_does_not_clamp() {
        let s = StateVector::new(0.0, vec![1e-10]);
        let out = step(&s, &[1.0], -1e-8).unwrap();
        assert!(out.state.conc[0] < 0.0);
        assert!(out.clamped.is_empty());
        assert_eq!(out.state.time, -1e-8);
    }

    #[test]
    fn non_finite_is_an_error() {
        let s = StateVector::new(0.0, vec![1.0]);
        assert!(matches!(step(&s, &[f64::INFINITY], 1.0), Err(SimulationError::NonFinite { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let m = parse_model("species A charge=0 formula=X\n").unwrap();
        let net = compile_network(&m);
        assert!(matches!(
            eval_gradient(&net, &StateVector::zeros(2)),
            Err(SimulationError::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn stiffness_of_first_and_second_order_terms() {
        let m = parse_model(
            "species A charge=0 formula=X2\nspecies X charge=0 formula=X\nreaction r: A <-> 2 X kf=3 kb=5\n",
        )
        .unwrap();
        let net = compile_network(&m);
        // dg_X/dX = -2 * 5 * 2 * X = -20 X ; dg_A/dA = -3
        let (i, s) = stiffness(&net, &[1.0, 0.5]).unwrap();
        assert_eq!((i, s), (1, 10.0));
        let (i, s) = stiffness(&net, &[1.0, 0.0]).unwrap();
        assert_eq!((i, s), (0, 3.0));
    }
}
