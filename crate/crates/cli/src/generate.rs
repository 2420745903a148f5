//! Seeded test systems and targets.

use clap::ValueEnum;
use polplace::linalg::condition_number;
use polplace::placement::controllability_matrix;
use polplace::{Complex64, Matrix, Spectrum, StateSpace, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// Dense systems are resampled until `κ(C)` is at most this.
pub const KAPPA_LIMIT: f64 = 1e8;
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Entries uniform in [-1, 1].
    Dense,
    /// Chain of integrators driven at the end, `b = e_n`.
    IntegratorChain,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Dense => "dense",
            Family::IntegratorChain => "integrator-chain",
        }
    }
}

/// Independent stream for `(seed, n, trial)`.
pub fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

/// One dense draw, no conditioning check.
pub fn dense_system(rng: &mut impl Rng, n: usize) -> Option<StateSpace> {
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
    let b = Vector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
    StateSpace::new(a, b).ok()
}

pub fn integrator_chain(n: usize) -> StateSpace {
    let a = Matrix::from_fn(n, n, |i, j| if j == i + 1 { 1.0 } else { 0.0 });
    let mut b = Vector::zeros(n);
    b[n - 1] = 1.0;
    StateSpace::new(a, b).expect("chain is well formed")
}

pub fn kappa_c(sys: &StateSpace) -> f64 {
    condition_number(&controllability_matrix(sys)).unwrap_or(f64::INFINITY)
}

/// Draws a dense system with `κ(C) <= KAPPA_LIMIT`, or gives up after
/// `MAX_ATTEMPTS` draws.
pub fn controllable_dense(rng: &mut impl Rng, n: usize) -> CliResult<StateSpace> {
    let mut best = f64::INFINITY;
    for _ in 0..MAX_ATTEMPTS {
        if let Some(sys) = dense_system(rng, n) {
            let kappa = kappa_c(&sys);
            if kappa <= KAPPA_LIMIT {
                return Ok(sys);
            }
            best = best.min(kappa);
        }
    }
    Err(CliError::Generation(format!(
        "no dense {n}x{n} system with controllability condition <= {KAPPA_LIMIT:e} in {MAX_ATTEMPTS} attempts (best {best:e})"
    )))
}

pub fn generate(n: usize, seed: u64, family: Family) -> CliResult<StateSpace> {
    if n == 0 {
        return Err(CliError::Input("n must be at least 1".into()));
    }
    match family {
        Family::Dense => controllable_dense(&mut ChaCha8Rng::seed_from_u64(seed), n),
        Family::IntegratorChain => Ok(integrator_chain(n)),
    }
}

/// Random stable self-conjugate targets: real parts in `[-3, -0.1]`, about
/// half of the values in conjugate pairs with imaginary parts in `[0.1, 2]`.
pub fn stable_targets(rng: &mut impl Rng, n: usize) -> Spectrum {
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let re = rng.random_range(-3.0..=-0.1);
        if n - values.len() >= 2 && rng.random_bool(0.5) {
            let im = rng.random_range(0.1..=2.0);
            values.push(Complex64::new(re, im));
            values.push(Complex64::new(re, -im));
        } else {
            values.push(Complex64::new(re, 0.0));
        }
    }
    Spectrum::new(values).expect("pairs are built exactly")
}
