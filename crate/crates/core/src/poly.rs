//! Real polynomials with ascending coefficient storage.
//!
//! `coeffs[j]` multiplies `λ^j`. A degree-`d` polynomial padded to length `n`
//! is exactly the row vector that multiplies `[1, λ, …, λ^(n-1)]^T`, which is
//! how the placement formulas consume it.
//!
//! Sign convention: the monic factor of a root set is `m(λ) = ∏(λ - λ_i)`, so
//! the matrix polynomial is `m(A) = ∏(A - λ_i I)`. Placement formulas carry
//! their own explicit signs relative to this factor.

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{PlaceError, Result};
use crate::linalg::{ensure_square, Matrix};
pub use crate::spectrum::Spectrum;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(PlaceError::Validation(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(PlaceError::Validation("polynomial has a non-finite coefficient".into()));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1.0
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial { coeffs: out }
    }

    /// Synthetic division by `(λ - root)`: returns the quotient and the
    /// remainder `q(root)`.
    pub fn deflate(&self, root: f64) -> Result<(Polynomial, f64)> {
        if self.degree() == 0 {
            return Err(PlaceError::Validation("cannot deflate a constant polynomial".into()));
        }
        let d = self.degree();
        let mut quotient = vec![0.0; d];
        quotient[d - 1] = self.coeffs[d];
        for k in (1..d).rev() {
            quotient[k - 1] = self.coeffs[k] + root * quotient[k];
        }
        let remainder = self.coeffs[0] + root * quotient[0];
        Ok((Polynomial { coeffs: quotient }, remainder))
    }

    /// Long division by the real quadratic `λ² - 2·re·λ + (re² + im²)` carrying
    /// the pair `re ± i·im`. Returns the quotient and the linear remainder
    /// `[r0, r1]` (value `r0 + r1 λ`).
    pub fn deflate_pair(&self, re: f64, im: f64) -> Result<(Polynomial, [f64; 2])> {
        if self.degree() < 2 {
            return Err(PlaceError::Validation(
                "cannot divide a polynomial of degree < 2 by a quadratic".into(),
            ));
        }
        let p = -2.0 * re;
        let q = re * re + im * im;
        let mut rem = self.coeffs.clone();
        let d = self.degree();
        let mut quotient = vec![0.0; d - 1];
        for k in (2..=d).rev() {
            let f = rem[k];
            quotient[k - 2] = f;
            rem[k] = 0.0;
            rem[k - 1] -= f * p;
            rem[k - 2] -= f * q;
        }
        Ok((Polynomial { coeffs: quotient }, [rem[0], rem[1]]))
    }

    pub fn eval_scalar(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Horner evaluation of the matrix polynomial `q(A)`.
    pub fn eval_matrix(&self, a: &Matrix) -> Result<Matrix> {
        let n = ensure_square(a, "matrix")?;
        let eye = Matrix::identity(n, n);
        let mut acc = &eye * self.leading();
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = &acc * a + &eye * c;
        }
        Ok(acc)
    }

    /// Coefficients zero-padded (or checked) to length `n`.
    pub fn padded(&self, n: usize) -> Result<Vec<f64>> {
        if self.coeffs.len() > n {
            return Err(PlaceError::Validation(format!(
                "polynomial of degree {} does not fit in {n} coefficients",
                self.degree()
            )));
        }
        let mut out = self.coeffs.clone();
        out.resize(n, 0.0);
        Ok(out)
    }
}

/// Monic real polynomial with exactly the given roots, built from real linear
/// factors and real quadratic factors for conjugate pairs.
pub fn monic_from_roots(roots: &Spectrum) -> Polynomial {
    let mut acc = Polynomial::one();
    for group in roots.conjugate_groups() {
        let z = group[0];
        let factor = if group.len() == 1 {
            vec![-z.re, 1.0]
        } else {
            vec![z.re * z.re + z.im * z.im, -2.0 * z.re, 1.0]
        };
        acc = acc.mul(&Polynomial { coeffs: factor });
    }
    acc
}

/// Characteristic polynomial `det(λI - A)` by the Faddeev–LeVerrier recurrence.
///
/// Uses only matrix products, traces and division by integers, so it is
/// independent of any eigenvalue solver. The recurrence runs in double-double
/// arithmetic: its traces cancel heavily when `A` is far from normal.
pub fn char_poly(a: &Matrix) -> Result<Polynomial> {
    let n = ensure_square(a, "matrix")?;
    let a: Vec<TwoFloat> = a.iter().map(|&x| TwoFloat::from(x)).collect();
    let at = |i: usize, j: usize| a[i + j * n];
    let zero = TwoFloat::from(0.0);
    let mut c = vec![zero; n + 1];
    c[n] = TwoFloat::from(1.0);
    let mut m = vec![zero; n * n];
    for k in 1..=n {
        let mut next = vec![zero; n * n];
        for j in 0..n {
            for i in 0..n {
                let mut s = if i == j { c[n - k + 1] } else { zero };
                for l in 0..n {
                    s += at(i, l) * m[l + j * n];
                }
                next[i + j * n] = s;
            }
        }
        m = next;
        let mut trace = zero;
        for i in 0..n {
            for l in 0..n {
                trace += at(i, l) * m[l + i * n];
            }
        }
        c[n - k] = -trace / k as f64;
    }
    Ok(Polynomial {
        coeffs: c.into_iter().map(f64::from).collect(),
    })
}

/// Splits `q_n = q_{n-r} · q_r` where `q_r` carries `subset` and `q_{n-r}`
/// the rest of `full`. Returns `(q_{n-r}, q_r)`.
pub fn split(q_n: &Polynomial, subset: &Spectrum, full: &Spectrum) -> Result<(Polynomial, Polynomial)> {
    if q_n.degree() != full.len() {
        return Err(PlaceError::Validation(format!(
            "polynomial degree {} does not match {} roots",
            q_n.degree(),
            full.len()
        )));
    }
    let rest = full.without(subset)?;
    Ok((monic_from_roots(&rest), monic_from_roots(subset)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use nalgebra::dmatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair(re: f64, im: f64) -> Spectrum {
        Spectrum::new(vec![c(re, im), c(re, -im)]).unwrap()
    }

    #[test]
    fn monic_examples() {
        assert_eq!(
            monic_from_roots(&Spectrum::real(&[-1.0, -2.0])).coeffs(),
            &[2.0, 3.0, 1.0]
        );
        assert_eq!(monic_from_roots(&pair(-1.0, 1.0)).coeffs(), &[2.0, 2.0, 1.0]);
        assert_eq!(monic_from_roots(&Spectrum::empty()).coeffs(), &[1.0]);
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(
            char_poly(&dmatrix![0.0, 1.0; 0.0, 0.0]).unwrap().coeffs(),
            &[0.0, 0.0, 1.0]
        );
        assert_eq!(
            char_poly(&dmatrix![1.0, 0.0; 0.0, 2.0]).unwrap().coeffs(),
            &[2.0, -3.0, 1.0]
        );
    }

    #[test]
    fn deflate_examples() {
        let q = Polynomial::new(vec![2.0, 3.0, 1.0]).unwrap();
        let (quot, rem) = q.deflate(-1.0).unwrap();
        assert_eq!((quot.coeffs(), rem), (&[2.0, 1.0][..], 0.0));
        let (quot, rem) = q.deflate(0.0).unwrap();
        assert_eq!((quot.coeffs(), rem), (&[3.0, 1.0][..], 2.0));
        assert!(Polynomial::one().deflate(1.0).is_err());
    }

    #[test]
    fn deflate_pair_exact() {
        // (λ² + 2λ + 2)(λ + 3) = λ³ + 5λ² + 8λ + 6
        let q = Polynomial::new(vec![6.0, 8.0, 5.0, 1.0]).unwrap();
        let (quot, rem) = q.deflate_pair(-1.0, 1.0).unwrap();
        assert_eq!(quot.coeffs(), &[3.0, 1.0]);
        assert_eq!(rem, [0.0, 0.0]);
    }

    #[test]
    fn split_examples() {
        let full = Spectrum::real(&[-1.0, -2.0]);
        let q = monic_from_roots(&full);
        let (rest, sub) = split(&q, &Spectrum::real(&[-1.0]), &full).unwrap();
        assert_eq!((rest.coeffs(), sub.coeffs()), (&[2.0, 1.0][..], &[1.0, 1.0][..]));

        let (rest, sub) = split(&q, &full, &full).unwrap();
        assert_eq!(rest.coeffs(), &[1.0]);
        assert_eq!(sub, q);

        let full = pair(-1.0, 1.0).union(&Spectrum::real(&[-3.0]));
        let q = monic_from_roots(&full);
        let (rest, sub) = split(&q, &pair(-1.0, 1.0), &full).unwrap();
        assert_eq!((rest.coeffs(), sub.coeffs()), (&[3.0, 1.0][..], &[2.0, 2.0, 1.0][..]));
        assert_eq!(rest.mul(&sub), q);
    }

    #[test]
    fn split_rejects_foreign_subset() {
        let full = Spectrum::real(&[-1.0, -2.0]);
        let q = monic_from_roots(&full);
        assert!(split(&q, &Spectrum::real(&[-4.0]), &full).is_err());
        assert!(split(&Polynomial::one(), &Spectrum::empty(), &full).is_err());
    }

    #[test]
    fn eval_matrix_examples() {
        let q = Polynomial::new(vec![2.0, 3.0, 1.0]).unwrap();
        let a = dmatrix![0.0, 1.0; 0.0, 0.0];
        assert_eq!(q.eval_matrix(&a).unwrap(), dmatrix![2.0, 3.0; 0.0, 2.0]);
        assert_eq!(Polynomial::one().eval_matrix(&a).unwrap(), Matrix::identity(2, 2));
    }

    #[test]
    fn eval_matrix_commutes() {
        let a = dmatrix![0.3, -1.2, 0.5; 0.7, 0.1, -0.4; -0.9, 0.6, 0.2];
        let q = Polynomial::new(vec![0.5, -1.0, 2.0, 1.0]).unwrap();
        let qa = q.eval_matrix(&a).unwrap();
        assert!(max_abs(&(&qa * &a - &a * &qa)) <= 1e-12 * max_abs(&a));
    }

    #[test]
    fn eval_scalar_examples() {
        let q = Polynomial::new(vec![2.0, 3.0, 1.0]).unwrap();
        assert_eq!(q.eval_scalar(c(-1.0, 0.0)), c(0.0, 0.0));
        assert_eq!(q.eval_scalar(c(0.0, 0.0)), c(2.0, 0.0));
        let q = Polynomial::new(vec![2.0, 2.0, 1.0]).unwrap();
        assert_eq!(q.eval_scalar(c(-1.0, 1.0)), c(0.0, 0.0));
    }

    #[test]
    fn padding() {
        let q = Polynomial::new(vec![3.0, 1.0]).unwrap();
        assert_eq!(q.padded(4).unwrap(), vec![3.0, 1.0, 0.0, 0.0]);
        assert!(q.padded(1).is_err());
    }
}
