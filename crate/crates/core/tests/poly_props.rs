mod common;

use common::{controllable, dense, rng, targets};
use nalgebra::QR;
use polplace::linalg::max_abs;
use polplace::placement::{gamma_recursion, gamma_vector};
use polplace::poly::{char_poly, monic_from_roots};
use polplace::Polynomial;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn monic_vanishes_at_roots(seed in any::<u64>(), n in 1usize..=12) {
        let roots = targets(&mut rng(seed), n);
        let q = monic_from_roots(&roots);
        prop_assert!(q.is_monic());
        prop_assert_eq!(q.degree(), n);
        let bound = 1e-9 * (1.0 + roots.max_modulus()).powi(n as i32);
        for z in roots.iter() {
            prop_assert!(q.eval_scalar(*z).norm() <= bound);
        }
    }

    #[test]
    fn char_poly_orthogonal_invariance(seed in any::<u64>(), n in 1usize..=10) {
        let mut r = rng(seed);
        let a = dense(&mut r, n, n);
        let q = QR::new(dense(&mut r, n, n)).q();
        let b = q.transpose() * &a * &q;
        let pa = char_poly(&a).unwrap();
        let pb = char_poly(&b).unwrap();
        for (x, y) in pa.coeffs().iter().zip(pb.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0));
        }
    }

    #[test]
    fn deflating_every_root_leaves_one(seed in any::<u64>(), n in 1usize..=10) {
        let roots = targets(&mut rng(seed), n);
        let mut q = monic_from_roots(&roots);
        for g in roots.conjugate_groups() {
            q = if g.len() == 1 {
                q.deflate(g[0].re).unwrap().0
            } else {
                q.deflate_pair(g[0].re, g[0].im).unwrap().0
            };
        }
        prop_assert_eq!(q, Polynomial::one());
    }

    #[test]
    fn cayley_hamilton(seed in any::<u64>(), n in 1usize..=6) {
        let a = dense(&mut rng(seed), n, n) * 3.0;
        let residual = char_poly(&a).unwrap().eval_matrix(&a).unwrap();
        prop_assert!(max_abs(&residual) <= 1e-8 * max_abs(&a).powi(n as i32));
    }

    #[test]
    fn gamma_recursion_is_deflation(seed in any::<u64>(), n in 1usize..=10) {
        let mut r = rng(seed);
        let mut roots = targets(&mut r, n);
        // make sure there is a real root to deflate by
        if !roots.iter().any(|z| z.im == 0.0) {
            roots = roots.union(&polplace::Spectrum::real(&[rand::Rng::random_range(&mut r, -3.0..3.0)]));
        }
        let q = monic_from_roots(&roots);
        let lambda1 = roots.iter().find(|z| z.im == 0.0).unwrap().re;
        let via_recursion = gamma_recursion(&q, lambda1).unwrap();
        let via_deflate = gamma_vector(&q.deflate(lambda1).unwrap().0, q.degree()).unwrap();
        prop_assert!((&via_recursion - &via_deflate).amax() <= 1e-12 * via_deflate.amax().max(1.0));
    }

    #[test]
    fn cayley_hamilton_on_systems(seed in any::<u64>(), n in 2usize..=6) {
        let sys = controllable(&mut rng(seed), n, 1e8);
        let residual = char_poly(sys.a()).unwrap().eval_matrix(sys.a()).unwrap();
        prop_assert!(max_abs(&residual) <= 1e-8 * max_abs(sys.a()).powi(n as i32));
    }
}
