//! Seeded fixtures shared by the benchmarks.

use polplace::{Matrix, Spectrum, StateSpace, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense system with entries uniform in `[-1, 1]`.
pub fn random_system(n: usize, seed: u64) -> StateSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    StateSpace::new(a, b).expect("random system is well formed")
}

/// Distinct stable real targets `-1, -1.5, -2, …`.
pub fn stable_targets(n: usize) -> Spectrum {
    let values: Vec<f64> = (0..n).map(|i| -1.0 - 0.5 * i as f64).collect();
    Spectrum::real(&values)
}
