//! Shared inputs for the benchmarks.

use mzreach::{Rng, Zonotope};
use mzreach_cli::experiments::Prepared;
use mzreach_cli::scenario::Scenario;

/// The five-state benchmark, identified from its default data plan.
pub fn five_state() -> Prepared {
    Prepared::new(&Scenario::five_state()).expect("fixture identifies")
}

pub fn random_zonotope(n: usize, generators: usize, seed: u64) -> Zonotope {
    let mut rng = Rng::new(seed);
    Zonotope::new(rng.normal_vector(n), rng.normal_matrix(n, generators)).expect("consistent shapes")
}
