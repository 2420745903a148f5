//! Oracles for checking a gain independently of the formula that produced it.
//!
//! The coefficient oracle ([`charpoly_residual`]) never touches an eigenvalue
//! solver; the spectrum oracle ([`spectrum_distance`] on the closed-loop
//! eigenvalues from [`closed_loop_spectrum`]) is the user-facing one. Both are
//! always reported.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{PlaceError, Result};
use crate::linalg::{condition_number, determinant, eigenvalues, solve_vector, Matrix, Vector};
use crate::placement::{controllability_matrix, eigenpair_gain, StateSpace};
use crate::poly::{char_poly, monic_from_roots, Spectrum};

/// `κ(C)` above this is flagged.
pub const KAPPA_WARN: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningTag {
    IllConditioned,
    OracleDisagreement,
    EigenSolverFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Warning {
    pub tag: WarningTag,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Condition number of the open-loop controllability matrix.
    pub kappa_c: f64,
    /// Condition numbers of the projected controllability matrices, one per step.
    pub kappa_steps: Vec<f64>,
    /// `None` when no target spectrum was available.
    pub charpoly_residual: Option<f64>,
    pub spectrum_residual: Option<f64>,
    pub warnings: Vec<Warning>,
}

impl Diagnostics {
    pub fn has_warning(&self, tag: WarningTag) -> bool {
        self.warnings.iter().any(|w| w.tag == tag)
    }
}

/// `A + b k^T`.
///
/// # Panics
/// If `k` does not have length `n`.
pub fn closed_loop(sys: &StateSpace, k: &Vector) -> Matrix {
    assert_eq!(k.len(), sys.n(), "gain length must match the state dimension");
    sys.a() + sys.b() * k.transpose()
}

/// Eigenvalues of `A + b k^T` without rounding the closed-loop matrix.
///
/// Forming `A + b k^T` in floating point perturbs it by about `ε |b| |k|`,
/// which moves ill-conditioned eigenvalues well past what the gain itself
/// does. Each solver estimate is polished by Newton steps on the eigenpair
/// whose residual `A x + b (k^T x) - λ x` is accumulated in double-double.
/// Estimates for which the iteration does not shrink the residual, or drifts
/// toward a neighboring eigenvalue, are kept as they are.
pub fn closed_loop_spectrum(sys: &StateSpace, k: &Vector) -> Result<Spectrum> {
    let ab = closed_loop(sys, k);
    let rough = eigenvalues(&ab)?;
    let mut out = Vec::with_capacity(rough.len());
    for &z in rough.iter() {
        if z.im < 0.0 {
            continue;
        }
        let gap = rough
            .iter()
            .map(|&v| (v - z).norm())
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let w = refine_eigenvalue(sys, k, &ab, z)
            .filter(|w| (w - z).norm() < gap / 2.0)
            .unwrap_or(z);
        if z.im == 0.0 {
            out.push(Complex64::new(w.re, 0.0));
        } else {
            out.push(w);
            out.push(w.conj());
        }
    }
    Spectrum::new(out)
}

#[derive(Clone, Copy)]
struct Dd(TwoFloat, TwoFloat);

impl Dd {
    fn new(z: Complex64) -> Self {
        Dd(z.re.into(), z.im.into())
    }
    fn add(self, o: Dd) -> Dd {
        Dd(self.0 + o.0, self.1 + o.1)
    }
    fn mul(self, o: Dd) -> Dd {
        Dd(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn scale(self, x: f64) -> Dd {
        Dd(self.0 * x, self.1 * x)
    }
    fn get(self) -> Complex64 {
        Complex64::new(self.0.into(), self.1.into())
    }
}

fn refine_eigenvalue(sys: &StateSpace, k: &Vector, ab: &Matrix, z: Complex64) -> Option<Complex64> {
    const STEPS: usize = 6;
    let n = sys.n();
    let abc = ab.map(|x| Complex64::new(x, 0.0));
    let scale = ab.amax().max(1.0);
    let shift = z + Complex64::new(scale * 1e-13, 0.0);
    let shifted = &abc - DMatrix::<Complex64>::identity(n, n) * shift;
    let start = DVector::from_fn(n, |i, _| Complex64::new(1.0, 0.1 * (i + 1) as f64));
    let x = shifted.lu().solve(&start)?;
    let s = (0..n).max_by(|&a, &b| x[a].norm().total_cmp(&x[b].norm()))?;
    if !(x[s].norm() > 0.0 && x.iter().all(|v| v.re.is_finite() && v.im.is_finite())) {
        return None;
    }
    let mut x: Vec<Dd> = (&x / x[s]).iter().map(|&v| Dd::new(v)).collect();
    let mut lam = Dd::new(z);
    let residual = |x: &[Dd], lam: Dd| -> DVector<Complex64> {
        let kx = (0..n).fold(Dd::new(Complex64::ZERO), |acc, j| acc.add(x[j].scale(k[j])));
        DVector::from_fn(n, |i, _| {
            let ax = (0..n).fold(kx.scale(sys.b()[i]), |acc, j| acc.add(x[j].scale(sys.a()[(i, j)])));
            ax.add(lam.mul(x[i]).scale(-1.0)).get()
        })
    };
    let first = residual(&x, lam).norm();
    let mut r = first;
    for _ in 0..STEPS {
        let res = residual(&x, lam);
        r = res.norm();
        if r == 0.0 {
            break;
        }
        let l = lam.get();
        let mut m = DMatrix::<Complex64>::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&abc);
        for i in 0..n {
            m[(i, i)] -= l;
            m[(i, n)] = -x[i].get();
        }
        m[(n, s)] = Complex64::ONE;
        let mut rhs = DVector::<Complex64>::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&(-res));
        let d = m.lu().solve(&rhs)?;
        if !d.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return None;
        }
        for (xi, di) in x.iter_mut().zip(d.iter()) {
            *xi = xi.add(Dd::new(*di));
        }
        lam = lam.add(Dd::new(d[n]));
    }
    r = r.min(residual(&x, lam).norm());
    (r < first).then(|| lam.get())
}

/// Largest relative coefficient deviation between `det(λI - (A + b k^T))`
/// (Faddeev–LeVerrier) and the monic polynomial of `targets`.
pub fn charpoly_residual(sys: &StateSpace, k: &Vector, targets: &Spectrum) -> f64 {
    let Ok(actual) = char_poly(&closed_loop(sys, k)) else {
        return f64::INFINITY;
    };
    let wanted = monic_from_roots(targets);
    if actual.degree() != wanted.degree() {
        return f64::INFINITY;
    }
    actual
        .coeffs()
        .iter()
        .zip(wanted.coeffs())
        .map(|(a, w)| (a - w).abs() / w.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Bottleneck distance between two multisets: the smallest `t` such that the
/// values can be paired up with every pair closer than `t`.
///
/// Exact (threshold search plus augmenting-path matching) up to 12 values,
/// greedy nearest-pair beyond.
pub fn spectrum_distance(s1: &Spectrum, s2: &Spectrum) -> Result<f64> {
    let n = s1.len();
    if s2.len() != n {
        return Err(PlaceError::Validation(format!(
            "cannot compare spectra of sizes {n} and {}",
            s2.len()
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let dist: Vec<Vec<f64>> = s1.iter().map(|a| s2.iter().map(|b| (a - b).norm()).collect()).collect();

    if n > 12 {
        let mut pairs: Vec<(f64, usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (dist[i][j], i, j))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut left, mut right) = (vec![false; n], vec![false; n]);
        let mut worst: f64 = 0.0;
        for (d, i, j) in pairs {
            if !left[i] && !right[j] {
                left[i] = true;
                right[j] = true;
                worst = worst.max(d);
            }
        }
        return Ok(worst);
    }

    let mut thresholds: Vec<f64> = dist.iter().flatten().copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let (mut lo, mut hi) = (0, thresholds.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&dist, thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(thresholds[lo])
}

fn perfect_matching(dist: &[Vec<f64>], t: f64) -> bool {
    fn augment(i: usize, dist: &[Vec<f64>], t: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..dist.len() {
            if dist[i][j] <= t && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|o| augment(o, dist, t, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let n = dist.len();
    let mut owner = vec![None; n];
    (0..n).all(|i| augment(i, dist, t, &mut vec![false; n], &mut owner))
}

/// Which arrangement of the adjugate factor reproduces the closed-loop
/// characteristic polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjugateForm {
    /// `(s - λ1) ω^T adj(sI - A) b`
    Plain,
    /// `(s - λ1) ω^T adj(sI - A^T) b`
    Transposed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdjugateCheck {
    /// Residual of the plain arrangement.
    pub plain: f64,
    pub transposed: f64,
}

impl AdjugateCheck {
    /// Residual of the arrangement that holds for every `(A, b, ω)`.
    pub fn residual(&self) -> f64 {
        self.plain
    }

    /// Arrangements whose residual is within `tol`.
    pub fn passing(&self, tol: f64) -> Vec<AdjugateForm> {
        let mut out = Vec::new();
        if self.plain <= tol {
            out.push(AdjugateForm::Plain);
        }
        if self.transposed <= tol {
            out.push(AdjugateForm::Transposed);
        }
        out
    }
}

/// Checks the closed-loop characteristic polynomial of the eigenpair gain
/// against its adjugate factorization at each sample point `s`:
/// `det(sI - Ā)` versus `(s - λ1) ω^T adj(sI - A) b`, and the same with
/// `adj(sI - A^T)`. The adjugate is evaluated as `det(M) M^{-1}`.
///
/// `ω` is normalized to `ω^T b = 1` as in [`crate::placement::place_eigenpair`].
pub fn adjugate_identity_check(
    sys: &StateSpace,
    omega: &Vector,
    lambda1: f64,
    samples: &[f64],
) -> Result<AdjugateCheck> {
    let (k, w) = eigenpair_gain(sys, omega, lambda1)?;
    let n = sys.n();
    let abar = closed_loop(sys, &k);
    let eye = Matrix::identity(n, n);
    let mut check = AdjugateCheck {
        plain: 0.0,
        transposed: 0.0,
    };
    for &s in samples {
        let m = &eye * s - sys.a();
        let det_m = determinant(&m)?;
        if !(det_m.abs() >= 1e-9) {
            return Err(PlaceError::Validation(format!(
                "sample {s} is too close to an open-loop eigenvalue (|det(sI - A)| = {:e})",
                det_m.abs()
            )));
        }
        let det_bar = determinant(&(&eye * s - &abar))?;
        let plain = det_m * w.dot(&solve_vector(&m, sys.b())?);
        let transposed = det_m * w.dot(&solve_vector(&m.transpose(), sys.b())?);
        let scale = det_bar.abs().max(1.0);
        check.plain = check.plain.max((det_bar - (s - lambda1) * plain).abs() / scale);
        check.transposed = check
            .transposed
            .max((det_bar - (s - lambda1) * transposed).abs() / scale);
    }
    Ok(check)
}

/// Builds the quality report for gain `k`.
pub fn diagnostics(sys: &StateSpace, k: &Vector, targets: Option<&Spectrum>, kappa_steps: Vec<f64>) -> Diagnostics {
    let mut out = Diagnostics {
        kappa_c: condition_number(&controllability_matrix(sys)).unwrap_or(f64::INFINITY),
        kappa_steps,
        ..Diagnostics::default()
    };
    if out.kappa_c > KAPPA_WARN {
        out.warnings.push(Warning {
            tag: WarningTag::IllConditioned,
            message: format!(
                "controllability matrix condition {:e} exceeds {KAPPA_WARN:e}",
                out.kappa_c
            ),
        });
    }
    let Some(targets) = targets.filter(|t| t.len() == sys.n()) else {
        return out;
    };
    let cp = charpoly_residual(sys, k, targets);
    out.charpoly_residual = Some(cp);
    match closed_loop_spectrum(sys, k).and_then(|ev| spectrum_distance(&ev, targets)) {
        Ok(d) => {
            out.spectrum_residual = Some(d);
            if cp <= 1e-8 && d > 1e-5 {
                out.warnings.push(Warning {
                    tag: WarningTag::OracleDisagreement,
                    message: format!(
                        "coefficients match ({cp:e}) but eigenvalues are off by {d:e}: closed-loop eigenvalues are ill-conditioned"
                    ),
                });
            }
        }
        Err(e) => out.warnings.push(Warning {
            tag: WarningTag::EigenSolverFailed,
            message: e.to_string(),
        }),
    }
    out
}
