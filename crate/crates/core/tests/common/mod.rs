#![allow(dead_code)]

use num_complex::Complex64;
use polplace::linalg::{condition_number, eigenvalues};
use polplace::placement::controllability_matrix;
use polplace::{Matrix, Spectrum, StateSpace, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Dense `(A, b)` with entries in `[-1, 1]`, resampled until `κ(C) <= max_kappa`.
pub fn controllable(rng: &mut ChaCha8Rng, n: usize, max_kappa: f64) -> StateSpace {
    loop {
        let a = dense(rng, n, n);
        let b = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let Ok(sys) = StateSpace::new(a, b) else { continue };
        if condition_number(&controllability_matrix(&sys)).unwrap() <= max_kappa {
            return sys;
        }
    }
}

/// Random self-conjugate set of `n` values with `|Re| <= 3`, roughly half in pairs.
pub fn targets(rng: &mut ChaCha8Rng, n: usize) -> Spectrum {
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let re = rng.random_range(-3.0..3.0);
        if n - values.len() >= 2 && rng.random_bool(0.5) {
            let im = rng.random_range(0.1..2.0);
            values.push(Complex64::new(re, im));
            values.push(Complex64::new(re, -im));
        } else {
            values.push(Complex64::new(re, 0.0));
        }
    }
    Spectrum::new(values).unwrap()
}

pub fn min_gap(s: &Spectrum) -> f64 {
    let v = s.values();
    let mut gap = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            gap = gap.min((v[i] - v[j]).norm());
        }
    }
    gap
}

/// Controllable system whose open-loop eigenvalues are pairwise at least `gap` apart.
pub fn separated(rng: &mut ChaCha8Rng, n: usize, gap: f64, max_kappa: f64) -> (StateSpace, Spectrum) {
    loop {
        let sys = controllable(rng, n, max_kappa);
        let ev = eigenvalues(sys.a()).unwrap();
        if min_gap(&ev) >= gap {
            return (sys, ev);
        }
    }
}

/// `max|a - b| / max(max|a|, max|b|)`, zero when both vanish.
pub fn rel_diff(a: &Vector, b: &Vector) -> f64 {
    let scale = a.amax().max(b.amax());
    if scale == 0.0 {
        return 0.0;
    }
    (a - b).amax() / scale
}

/// Every sub-multiset of `s` that keeps conjugate pairs together.
pub fn closed_subsets(s: &Spectrum) -> Vec<Spectrum> {
    let groups = s.conjugate_groups();
    (0u32..1 << groups.len())
        .map(|mask| {
            let values = groups
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .flat_map(|(_, g)| g.iter().copied())
                .collect();
            Spectrum::new(values).unwrap()
        })
        .collect()
}
