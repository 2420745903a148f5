//! Dense real linear algebra used by the placement algorithms.
//!
//! Storage and elementwise arithmetic come from `nalgebra`; the factorizations
//! that the placement code depends on for its guarantees (Hessenberg
//! reduction, the lower quasi-triangular real Schur form, block reordering,
//! pivoted solves and singular values) are implemented here so that their
//! tolerances and failure modes are under our control.

mod reorder;
mod schur;
mod svd;

use nalgebra::{DMatrix, DVector};

use crate::error::{PlaceError, Result};

pub use reorder::{invariant_split, match_spectrum, reorder_schur, InvariantSplit};
pub use schur::{eigenvalues, hessenberg, real_schur, SchurBlock, SchurDecomposition};
pub use svd::singular_values;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Unit roundoff spacing at 1.0.
pub const ULP: f64 = f64::EPSILON;

/// Largest absolute entry, 0 for an empty matrix.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn ensure_square(m: &Matrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(PlaceError::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        return Err(PlaceError::Validation(format!(
            "{what} has a non-finite entry at ({}, {})",
            pos % m.nrows(),
            pos / m.nrows()
        )));
    }
    Ok(())
}

/// Row-pivoted LU factorization `P M = L U`, stored compactly.
struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    swaps: usize,
}

fn lu_factor(m: &Matrix) -> Result<Lu> {
    let n = ensure_square(m, "matrix")?;
    let threshold = n as f64 * ULP * max_abs(m);
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= threshold || pivot == 0.0 {
            return Err(PlaceError::Singular { column: k, pivot });
        }
        if p != k {
            lu.swap_rows(p, k);
            perm.swap(p, k);
            swaps += 1;
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
    }
    Ok(Lu { lu, perm, swaps })
}

impl Lu {
    fn solve(&self, rhs: &Matrix) -> Matrix {
        let n = self.lu.nrows();
        let mut x = Matrix::zeros(n, rhs.ncols());
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from(&rhs.row(p));
        }
        for c in 0..rhs.ncols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for j in 0..i {
                    s -= self.lu[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for j in i + 1..n {
                    s -= self.lu[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        x
    }

    fn det(&self) -> f64 {
        let d: f64 = self.lu.diagonal().iter().product();
        if self.swaps % 2 == 1 {
            -d
        } else {
            d
        }
    }
}

/// Solves `M S = rhs` by row-pivoted elimination.
///
/// A pivot below `n * ulp * max|M|` is treated as exact singularity and
/// reported with the column where elimination broke down.
pub fn solve_linear(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = ensure_square(m, "coefficient matrix")?;
    if rhs.nrows() != n {
        return Err(PlaceError::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            rhs.nrows()
        )));
    }
    Ok(lu_factor(m)?.solve(rhs))
}

pub fn solve_vector(m: &Matrix, rhs: &Vector) -> Result<Vector> {
    let rhs = Matrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
    let s = solve_linear(m, &rhs)?;
    Ok(Vector::from_column_slice(s.as_slice()))
}

/// Determinant via pivoted LU; exactly zero when elimination finds no pivot.
pub fn determinant(m: &Matrix) -> Result<f64> {
    ensure_square(m, "matrix")?;
    match lu_factor(m) {
        Ok(lu) => Ok(lu.det()),
        Err(PlaceError::Singular { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// 2-norm condition number `sigma_max / sigma_min`.
///
/// Returns `+inf` when the smallest singular value is zero or underflows
/// relative to the largest.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    ensure_square(m, "matrix")?;
    if m.is_empty() {
        return Ok(1.0);
    }
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    if max == 0.0 || min <= max * f64::MIN_POSITIVE {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Numerical rank from singular values with the usual `n * ulp * sigma_max` cut.
pub fn numerical_rank(m: &Matrix) -> usize {
    let sv = singular_values(m);
    let Some(&max) = sv.first() else { return 0 };
    let tol = m.nrows().max(m.ncols()) as f64 * ULP * max;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthogonality defect `max |Q^T Q - I|`.
pub fn orthogonality_error(q: &Matrix) -> f64 {
    let g = q.transpose() * q;
    let eye = Matrix::identity(g.nrows(), g.ncols());
    max_abs(&(g - eye))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn solve_identity_returns_rhs() {
        let rhs = dmatrix![1.5, -2.0; 3.0, 0.25; 7.0, 1.0];
        let s = solve_linear(&Matrix::identity(3, 3), &rhs).unwrap();
        assert_eq!(s, rhs);
    }

    #[test]
    fn solve_permutation() {
        let m = dmatrix![0.0, 1.0; 1.0, 0.0];
        let s = solve_linear(&m, &dmatrix![1.0; 0.0]).unwrap();
        assert_eq!(s, dmatrix![0.0; 1.0]);
    }

    #[test]
    fn solve_singular_reports_column() {
        let m = dmatrix![1.0, 1.0; 1.0, 1.0];
        match solve_linear(&m, &dmatrix![1.0; 2.0]) {
            Err(PlaceError::Singular { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn solve_rejects_non_square() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(
            solve_linear(&m, &Matrix::zeros(2, 1)),
            Err(PlaceError::Dimension(_))
        ));
    }

    #[test]
    fn solve_residual_is_small() {
        let m = dmatrix![4.0, -2.0, 1.0; 3.0, 6.0, -4.0; 2.0, 1.0, 8.0];
        let rhs = dmatrix![12.0, 1.0; -25.0, 0.0; 32.0, -1.0];
        let s = solve_linear(&m, &rhs).unwrap();
        let bound = 1024.0 * 3.0 * ULP * max_abs(&m) * max_abs(&s);
        assert!(max_abs(&(&m * &s - rhs)) <= bound);
    }

    #[test]
    fn determinant_values() {
        assert_eq!(determinant(&dmatrix![2.0, 1.0; 1.0, 3.0]).unwrap(), 5.0);
        assert_eq!(determinant(&dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(determinant(&dmatrix![1.0, 2.0; 2.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn condition_of_identity_is_one() {
        let k = condition_number(&Matrix::identity(4, 4)).unwrap();
        assert!((k - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn condition_of_scaled_diagonal() {
        let k = condition_number(&dmatrix![1.0, 0.0; 0.0, 1e-6]).unwrap();
        assert!((k - 1e6).abs() / 1e6 <= 1e-6);
    }

    #[test]
    fn condition_of_singular_is_infinite() {
        let k = condition_number(&dmatrix![1.0, 2.0; 2.0, 4.0]).unwrap();
        assert!(k.is_infinite());
    }

    #[test]
    fn rank_of_rank_one() {
        assert_eq!(numerical_rank(&dmatrix![1.0, 2.0; 2.0, 4.0]), 1);
        assert_eq!(numerical_rank(&Matrix::identity(3, 3)), 3);
        assert_eq!(numerical_rank(&Matrix::zeros(2, 2)), 0);
    }
}
