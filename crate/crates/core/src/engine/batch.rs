use rayon::prelude::*;

use crate::dsl::CompiledNetwork;

use super::simulate::simulate;
use super::types::{Scenario, SimulationError, SimulationResult};

/// Run independent scenarios on `jobs` worker threads.
///
/// Results come back in input order and are bitwise identical to running
/// each scenario alone; a failing scenario yields an `Err` in its slot
/// without affecting the others.
pub fn run_batch(
    network: &CompiledNetwork,
    scenarios: &[Scenario],
    jobs: usize,
) -> Vec<Result<SimulationResult, SimulationError>> {
    if jobs <= 1 || scenarios.len() <= 1 {
        return scenarios.iter().map(|s| simulate(network, s)).collect();
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool,
        Err(_) => return scenarios.iter().map(|s| simulate(network, s)).collect(),
    };
    pool.install(|| scenarios.par_iter().map(|s| simulate(network, s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{compile_network, parse_model};

    #[test]
    fn empty_batch() {
        let net = compile_network(&parse_model("").unwrap());
        assert!(run_batch(&net, &[], 4).is_empty());
    }

    #[test]
    fn failures_are_isolated() {
        let net = compile_network(
            &parse_model("species A charge=0 formula=X\nspecies B charge=0 formula=X\nreaction r: A <-> B kf=1000 kb=1000\n")
                .unwrap(),
        );
        let good = Scenario { dt: 1e-5, ..Scenario::default() }.with_initial("A", 1.0).fixed_steps(1000);
        let bad = Scenario { dt: 1.0, ..Scenario::default() }.with_initial("A", 1.0);
        let mut list = vec![good.clone(); 9];
        list.insert(4, bad);
        for jobs in [1, 3] {
            let out = run_batch(&net, &list, jobs);
            assert_eq!(out.len(), 10);
            assert_eq!(out.iter().filter(|r| r.is_ok()).count(), 9);
            assert!(out[4].is_err());
            assert_eq!(out[0], out[9]);
        }
    }
}
