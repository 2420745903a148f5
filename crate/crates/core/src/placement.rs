//! Full-spectrum placement for single-input pairs `(A, b)`.
//!
//! Feedback is `u = k^T x`, so the closed loop is `A + b k^T`. Every gain here
//! is expressed through the transformation to controller canonical form,
//! `T = C C_c^{-1}` with `C = Con(A, b)` and `C_c = Con(A_c, b_c)`. Products with
//! `C^{-1}` are always back-solves; the inverse is never formed.

use std::fmt;

use serde::Serialize;

use crate::error::{PlaceError, Result};
use crate::linalg::{ensure_finite, ensure_square, numerical_rank, solve_linear, solve_vector, Matrix, Vector};
use crate::poly::{char_poly, monic_from_roots, split, Polynomial, Spectrum};
use crate::verify::{diagnostics, Diagnostics};

/// The single-input pair `(A, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    a: Matrix,
    b: Vector,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        let n = ensure_square(&a, "A")?;
        if n == 0 {
            return Err(PlaceError::Dimension("state dimension must be at least 1".into()));
        }
        if b.len() != n {
            return Err(PlaceError::Dimension(format!("b has length {}, expected {n}", b.len())));
        }
        ensure_finite(&a, "A")?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(PlaceError::Validation("b has a non-finite entry".into()));
        }
        if b.iter().all(|&v| v == 0.0) {
            return Err(PlaceError::Validation("b must be nonzero".into()));
        }
        Ok(StateSpace { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }
}

/// Which formula produced a gain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Eigenpair,
    BassGura,
    Ackermann,
    General { r: usize },
    SimonMitter,
    Partial,
    Sequential,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Eigenpair => write!(f, "eigenpair"),
            Method::BassGura => write!(f, "bass_gura"),
            Method::Ackermann => write!(f, "ackermann"),
            Method::General { r } => write!(f, "general({r})"),
            Method::SimonMitter => write!(f, "simon_mitter"),
            Method::Partial => write!(f, "partial"),
            Method::Sequential => write!(f, "sequential"),
        }
    }
}

/// A feedback gain `k` for `u = k^T x`, with its provenance and quality report.
#[derive(Clone, Debug)]
pub struct Gain {
    pub k: Vector,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// Controller canonical realization of a controllable pair.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub a_c: Matrix,
    pub b_c: Vector,
    /// `x = T ξ`.
    pub t: Matrix,
    pub c: Matrix,
    pub c_c: Matrix,
    /// Open-loop characteristic polynomial.
    pub p: Polynomial,
}

/// `[b, Ab, …, A^(n-1) b]`.
pub fn controllability_matrix(sys: &StateSpace) -> Matrix {
    krylov(sys.a(), sys.b(), sys.n())
}

pub(crate) fn krylov(a: &Matrix, b: &Vector, cols: usize) -> Matrix {
    let mut c = Matrix::zeros(b.len(), cols);
    let mut col = b.clone();
    for j in 0..cols {
        c.set_column(j, &col);
        if j + 1 < cols {
            col = a * col;
        }
    }
    c
}

/// Companion matrix with superdiagonal ones and last row `-[p_0, …, p_(n-1)]`.
fn companion(p: &Polynomial) -> Matrix {
    let n = p.degree();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -p.coeffs()[j];
    }
    a
}

fn uncontrollable(sys: &StateSpace, c: &Matrix) -> PlaceError {
    PlaceError::Uncontrollable {
        rank: numerical_rank(c).min(sys.n() - 1),
        n: sys.n(),
    }
}

pub fn controller_canonical(sys: &StateSpace) -> Result<CanonicalForm> {
    let n = sys.n();
    let c = controllability_matrix(sys);
    // pivot test on C itself
    if let Err(PlaceError::Singular { .. }) = solve_linear(&c, &Matrix::identity(n, 1)) {
        return Err(uncontrollable(sys, &c));
    }
    let p = char_poly(sys.a())?;
    let a_c = companion(&p);
    let mut b_c = Vector::zeros(n);
    b_c[n - 1] = 1.0;
    let c_c = krylov(&a_c, &b_c, n);
    // T C_c = C  <=>  C_c^T T^T = C^T
    let t = solve_linear(&c_c.transpose(), &c.transpose())?.transpose();
    Ok(CanonicalForm { a_c, b_c, t, c, c_c, p })
}

/// `γ` for a monic `q` of degree below `n`: its ascending coefficients,
/// zero-padded to length `n`.
pub fn gamma_vector(q: &Polynomial, n: usize) -> Result<Vector> {
    if q.degree() >= n {
        return Err(PlaceError::Validation(format!(
            "gamma source must have degree < {n}, got {}",
            q.degree()
        )));
    }
    Ok(Vector::from_vec(q.padded(n)?))
}

/// `γ_(n-1)` by the running recursion `g_i = α_i + g_(i-1) λ1`, `g_0 = 1`,
/// where `α_i` are the descending coefficients of the monic `q_n`.
///
/// This is synthetic division of `q_n` by `(λ - λ1)`, returned ascending.
pub fn gamma_recursion(q_n: &Polynomial, lambda1: f64) -> Result<Vector> {
    let n = q_n.degree();
    if n == 0 || !q_n.is_monic() {
        return Err(PlaceError::Validation(
            "gamma recursion needs a monic polynomial of degree >= 1".into(),
        ));
    }
    let alpha = |i: usize| q_n.coeffs()[n - i];
    let mut g = vec![1.0; n];
    for i in 1..n {
        g[i] = alpha(i) + g[i - 1] * lambda1;
    }
    Ok(Vector::from_iterator(n, g.into_iter().rev()))
}

/// `γ_n`: ascending coefficients of `p - q_n` (the canonical-coordinate gain).
pub fn gamma_full(p: &Polynomial, q_n: &Polynomial) -> Result<Vector> {
    let n = p.degree();
    if q_n.degree() != n || !p.is_monic() || !q_n.is_monic() {
        return Err(PlaceError::Validation(format!(
            "gamma_full needs two monic polynomials of equal degree, got {} and {}",
            p.degree(),
            q_n.degree()
        )));
    }
    Ok(Vector::from_iterator(
        n,
        (0..n).map(|j| p.coeffs()[j] - q_n.coeffs()[j]),
    ))
}

impl CanonicalForm {
    /// `ω^T = γ^T C_c C^{-1}`, i.e. `C^T ω = C_c^T γ`.
    pub fn omega(&self, gamma: &Vector) -> Result<Vector> {
        if gamma.len() != self.c.nrows() {
            return Err(PlaceError::Dimension(format!(
                "gamma has length {}, expected {}",
                gamma.len(),
                self.c.nrows()
            )));
        }
        solve_vector(&self.c.transpose(), &(self.c_c.transpose() * gamma))
    }
}

pub fn omega_vector(sys: &StateSpace, gamma: &Vector) -> Result<Vector> {
    controller_canonical(sys)?.omega(gamma)
}

fn check_targets(sys: &StateSpace, targets: &Spectrum) -> Result<()> {
    if targets.len() != sys.n() {
        return Err(PlaceError::Validation(format!(
            "expected {} target eigenvalues, got {}",
            sys.n(),
            targets.len()
        )));
    }
    Ok(())
}

fn finish(sys: &StateSpace, k: Vector, method: Method, targets: Option<&Spectrum>) -> Gain {
    let diagnostics = diagnostics(sys, &k, targets, Vec::new());
    Gain { k, method, diagnostics }
}

/// Gain assigning the real eigenvalue `λ1` with left eigenvector `ω`:
/// `k^T = ω^T (λ1 I - A)` after normalizing `ω^T b = 1`.
pub fn place_eigenpair(sys: &StateSpace, omega: &Vector, lambda1: f64) -> Result<Gain> {
    let k = eigenpair_gain(sys, omega, lambda1)?.0;
    Ok(finish(sys, k, Method::Eigenpair, None))
}

/// Returns the gain and the normalized `ω`.
pub(crate) fn eigenpair_gain(sys: &StateSpace, omega: &Vector, lambda1: f64) -> Result<(Vector, Vector)> {
    if omega.len() != sys.n() {
        return Err(PlaceError::Dimension(format!(
            "omega has length {}, expected {}",
            omega.len(),
            sys.n()
        )));
    }
    if !lambda1.is_finite() {
        return Err(PlaceError::Validation("eigenvalue must be finite".into()));
    }
    let projection = omega.dot(sys.b());
    let threshold = 1e-9 * omega.norm() * sys.b().norm();
    if !(projection.abs() >= threshold) || projection == 0.0 {
        return Err(PlaceError::InvariantEigenvalue {
            projection: projection.abs(),
            threshold,
        });
    }
    let w = omega / projection;
    let k = &w * lambda1 - sys.a().transpose() * &w;
    Ok((k, w))
}

/// Full placement through a single real eigenpair: `γ_(n-1)` from the
/// recursion at `λ1`, mapped to `ω` in state coordinates, then
/// [`place_eigenpair`].
pub fn place_initial(sys: &StateSpace, targets: &Spectrum, lambda1: f64) -> Result<Gain> {
    check_targets(sys, targets)?;
    if !targets.iter().any(|z| z.im == 0.0 && z.re == lambda1) {
        return Err(PlaceError::Validation(format!(
            "{lambda1} is not a real element of the targets"
        )));
    }
    let q_n = monic_from_roots(targets);
    let gamma = gamma_recursion(&q_n, lambda1)?;
    let omega = omega_vector(sys, &gamma)?;
    let k = eigenpair_gain(sys, &omega, lambda1)?.0;
    Ok(finish(sys, k, Method::Eigenpair, Some(targets)))
}

pub(crate) fn bass_gura_gain(sys: &StateSpace, targets: &Spectrum) -> Result<Vector> {
    check_targets(sys, targets)?;
    let cf = controller_canonical(sys)?;
    let gamma = gamma_full(&cf.p, &monic_from_roots(targets))?;
    cf.omega(&gamma)
}

/// `k^T = γ_n^T C_c C^{-1}` with `γ_n = coeffs(p - q_n)`.
pub fn place_bass_gura(sys: &StateSpace, targets: &Spectrum) -> Result<Gain> {
    let k = bass_gura_gain(sys, targets)?;
    Ok(finish(sys, k, Method::BassGura, Some(targets)))
}

pub(crate) fn ackermann_gain(sys: &StateSpace, targets: &Spectrum) -> Result<Vector> {
    check_targets(sys, targets)?;
    let n = sys.n();
    let c = controllability_matrix(sys);
    let mut e_n = Vector::zeros(n);
    e_n[n - 1] = 1.0;
    // w^T = e_n^T C^{-1}
    let w = solve_vector(&c.transpose(), &e_n).map_err(|e| match e {
        PlaceError::Singular { .. } => uncontrollable(sys, &c),
        other => other,
    })?;
    let m = monic_from_roots(targets).eval_matrix(sys.a())?;
    Ok(-(m.transpose() * w))
}

/// `k^T = -e_n^T C^{-1} m(A)` with `m` the monic target polynomial.
pub fn place_ackermann(sys: &StateSpace, targets: &Spectrum) -> Result<Gain> {
    let k = ackermann_gain(sys, targets)?;
    Ok(finish(sys, k, Method::Ackermann, Some(targets)))
}

/// Generalized formula `k^T = -ω_(n-r)^T m_r(A)` where `m_r` carries the `r`
/// pulled targets and `ω_(n-r)` the coefficients of the remaining ones.
/// `r = 0` is the Bass-Gura case and `r = n` the Ackermann case.
pub fn place_general(sys: &StateSpace, targets: &Spectrum, pulled: &Spectrum) -> Result<Gain> {
    check_targets(sys, targets)?;
    let r = pulled.len();
    let k = if r == 0 {
        bass_gura_gain(sys, targets)?
    } else {
        let n = sys.n();
        let q_n = monic_from_roots(targets);
        let (rest, pulled_poly) = split(&q_n, pulled, targets)?;
        let gamma = gamma_vector(&rest, n)?;
        let omega = omega_vector(sys, &gamma)?;
        let m = pulled_poly.eval_matrix(sys.a())?;
        -(m.transpose() * omega)
    };
    Ok(finish(sys, k, Method::General { r }, Some(targets)))
}
