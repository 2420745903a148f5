//! Placement restricted to part of the spectrum.
//!
//! A partial step splits the state space with an orthogonal Schur basis
//! `[U V]` where `V` spans an `A`-invariant subspace. Feedback of the form
//! `k^T = θ^T U^T` leaves the eigenvalues of `Y = V^T A V` alone and acts on
//! `X = U^T A U` through the projected pair `(X, U^T b)`, so only an `r × r`
//! system is ever inverted.

use serde::Serialize;

use crate::error::{PlaceError, Result};
use crate::linalg::{
    condition_number, eigenvalues, invariant_split, match_spectrum, max_abs, solve_vector, InvariantSplit, Matrix,
    Vector, ULP,
};
use crate::placement::{krylov, Gain, Method, StateSpace};
use crate::poly::{monic_from_roots, Spectrum};
use crate::verify::diagnostics;

/// Ordered `(move, to)` groups for sequential assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentPlan {
    groups: Vec<(Spectrum, Spectrum)>,
}

impl AssignmentPlan {
    pub fn new(groups: Vec<(Spectrum, Spectrum)>) -> Result<Self> {
        if groups.is_empty() {
            return Err(PlaceError::Validation("assignment plan has no groups".into()));
        }
        for (i, (mv, to)) in groups.iter().enumerate() {
            if mv.is_empty() {
                return Err(PlaceError::Validation(format!("group {} moves nothing", i + 1)));
            }
            if mv.len() != to.len() {
                return Err(PlaceError::Validation(format!(
                    "group {} moves {} eigenvalues to {} targets",
                    i + 1,
                    mv.len(),
                    to.len()
                )));
            }
        }
        Ok(AssignmentPlan { groups })
    }

    pub fn groups(&self) -> &[(Spectrum, Spectrum)] {
        &self.groups
    }

    /// Union of all `move` sets.
    pub fn moved(&self) -> Spectrum {
        self.groups.iter().fold(Spectrum::empty(), |acc, (m, _)| acc.union(m))
    }

    /// Union of all `to` sets: the intended closed-loop spectrum.
    pub fn targets(&self) -> Spectrum {
        self.groups.iter().fold(Spectrum::empty(), |acc, (_, t)| acc.union(t))
    }

    /// Checks that the `move` sets partition the computed spectrum of `a`.
    pub fn check_partition(&self, a: &Matrix) -> Result<()> {
        let moved = self.moved();
        if moved.len() != a.nrows() {
            return Err(PlaceError::Validation(format!(
                "plan moves {} eigenvalues but the system has {}",
                moved.len(),
                a.nrows()
            )));
        }
        let spectrum = eigenvalues(a)?;
        match_spectrum(&moved, spectrum.values(), match_tolerance(a))?;
        Ok(())
    }
}

fn match_tolerance(a: &Matrix) -> f64 {
    1e-6 * max_abs(a).max(1.0)
}

/// One step of a sequential assignment.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    #[serde(skip)]
    pub u: Matrix,
    #[serde(skip)]
    pub x: Matrix,
    pub eta: Vec<f64>,
    pub gain: Vec<f64>,
    /// Condition number of the projected controllability matrix.
    pub kappa: f64,
    #[serde(serialize_with = "serialize_spectrum")]
    pub spectrum_after: Spectrum,
}

impl StepRecord {
    /// Size of the only matrix inverted in this step.
    pub fn inverted_size(&self) -> usize {
        self.x.nrows()
    }
}

fn serialize_spectrum<S: serde::Serializer>(s: &Spectrum, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(s.iter().map(|z| crate::spectrum::format_complex(*z)))
}

/// Rank (complete-pivoting elimination, threshold `r·ulp·max|P|`) and
/// condition number of `P = U^T [b, Ab, …, A^(r-1) b]`.
pub fn projected_controllability_rank(sys: &StateSpace, u: &Matrix) -> (usize, f64) {
    let r = u.ncols();
    if r == 0 {
        return (0, 1.0);
    }
    let p = u.transpose() * krylov(sys.a(), sys.b(), r);
    rank_and_kappa(&p)
}

fn rank_and_kappa(p: &Matrix) -> (usize, f64) {
    let r = p.ncols();
    let kappa = condition_number(p).unwrap_or(f64::INFINITY);
    (pivot_rank(p, r as f64 * ULP * max_abs(p)), kappa)
}

fn pivot_rank(m: &Matrix, tol: f64) -> usize {
    let mut w = m.clone();
    let (rows, cols) = w.shape();
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (0.0, rank, rank);
        for i in rank..rows {
            for j in rank..cols {
                if w[(i, j)].abs() > best.0 {
                    best = (w[(i, j)].abs(), i, j);
                }
            }
        }
        if !(best.0 > tol) {
            break;
        }
        w.swap_rows(rank, best.1);
        w.swap_columns(rank, best.2);
        let pivot = w[(rank, rank)];
        for i in rank + 1..rows {
            let f = w[(i, rank)] / pivot;
            for j in rank..cols {
                let v = w[(rank, j)];
                w[(i, j)] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}

struct PartialStep {
    u: Matrix,
    x: Matrix,
    eta: Vector,
    gain: Vector,
    kappa: f64,
    kept: Spectrum,
}

/// Step quantities for one split: `η` with `η^T = e_r^T C(X, U^T b)^{-1}`,
/// the gain `k^T = -η^T m(X) U^T` for the monic `m` of `to`, and the
/// condition number of `C(X, U^T b)`.
pub fn split_gain(split: &InvariantSplit, b: &Vector, to: &Spectrum) -> Result<(Vector, Vector, f64)> {
    let r = split.u.ncols();
    if to.len() != r {
        return Err(PlaceError::Validation(format!(
            "{r} eigenvalues to move but {} targets",
            to.len()
        )));
    }
    if r == 0 {
        return Err(PlaceError::Validation("nothing to move".into()));
    }
    let ub = split.u.transpose() * b;
    let p = krylov(&split.x, &ub, r);
    let (rank, kappa) = rank_and_kappa(&p);
    if rank < r {
        return Err(PlaceError::RankDeficient { rank, needed: r, kappa });
    }
    let mut e_r = Vector::zeros(r);
    e_r[r - 1] = 1.0;
    let eta = solve_vector(&p.transpose(), &e_r).map_err(|e| match e {
        PlaceError::Singular { .. } => PlaceError::RankDeficient {
            rank: r - 1,
            needed: r,
            kappa,
        },
        other => other,
    })?;
    let m = monic_from_roots(to).eval_matrix(&split.x)?;
    let gain = -(&split.u * (m.transpose() * &eta));
    Ok((eta, gain, kappa))
}

fn partial_step(a: &Matrix, b: &Vector, mv: &Spectrum, to: &Spectrum) -> Result<PartialStep> {
    if mv.len() != to.len() {
        return Err(PlaceError::Validation(format!(
            "{} eigenvalues to move but {} targets",
            mv.len(),
            to.len()
        )));
    }
    if mv.is_empty() {
        return Err(PlaceError::Validation("nothing to move".into()));
    }
    let split = invariant_split(a, mv)?;
    let (eta, gain, kappa) = split_gain(&split, b, to)?;
    Ok(PartialStep {
        u: split.u,
        x: split.x,
        eta,
        gain,
        kappa,
        kept: split.kept,
    })
}

/// Moves the eigenvalues `mv` of `A` to `to` and leaves the rest in place.
pub fn place_partial(sys: &StateSpace, mv: &Spectrum, to: &Spectrum) -> Result<Gain> {
    let step = partial_step(sys.a(), sys.b(), mv, to)?;
    let targets = step.kept.union(to);
    let diagnostics = diagnostics(sys, &step.gain, Some(&targets), vec![step.kappa]);
    Ok(Gain {
        k: step.gain,
        method: Method::Partial,
        diagnostics,
    })
}

/// Shifts the real eigenvalue `μ1` to `λ1` with `k = (λ1 - μ1) ω`, where `ω`
/// is the left eigenvector at `μ1` scaled to `ω^T b = 1`.
pub fn place_simon_mitter(sys: &StateSpace, mu1: f64, lambda1: f64) -> Result<Gain> {
    if !mu1.is_finite() || !lambda1.is_finite() {
        return Err(PlaceError::Validation("eigenvalues must be finite".into()));
    }
    let split = invariant_split(sys.a(), &Spectrum::real(&[mu1]))?;
    if split.moved.values()[0].im != 0.0 {
        return Err(PlaceError::Matching(format!("{mu1} matched a complex eigenvalue")));
    }
    let omega = split.u.column(0).clone_owned();
    let projection = omega.dot(sys.b());
    let threshold = 1e-9 * omega.norm() * sys.b().norm();
    if !(projection.abs() >= threshold) || projection == 0.0 {
        return Err(PlaceError::InvariantEigenvalue {
            projection: projection.abs(),
            threshold,
        });
    }
    let k = omega * ((lambda1 - mu1) / projection);
    let targets = split.kept.union(&Spectrum::real(&[lambda1]));
    let diagnostics = diagnostics(sys, &k, Some(&targets), Vec::new());
    Ok(Gain {
        k,
        method: Method::SimonMitter,
        diagnostics,
    })
}

/// Applies the plan's groups in order, each as a partial step on the current
/// closed loop, and returns the summed gain with one record per step.
///
/// Errors inside a step are wrapped in [`PlaceError::Step`] together with the
/// records of the steps that completed.
pub fn place_sequential(sys: &StateSpace, plan: &AssignmentPlan) -> Result<(Gain, Vec<StepRecord>)> {
    plan.check_partition(sys.a())?;
    let n = sys.n();
    let mut abar = sys.a().clone();
    let mut total = Vector::zeros(n);
    let mut records: Vec<StepRecord> = Vec::with_capacity(plan.groups.len());
    for (i, (mv, to)) in plan.groups.iter().enumerate() {
        let outcome = partial_step(&abar, sys.b(), mv, to).and_then(|st| {
            let next = &abar + sys.b() * st.gain.transpose();
            let after = eigenvalues(&next)?;
            Ok((st, next, after))
        });
        let (st, next, after) = match outcome {
            Ok(v) => v,
            Err(e) => {
                return Err(PlaceError::Step {
                    step: i + 1,
                    completed: records,
                    source: Box::new(e),
                });
            }
        };
        total += &st.gain;
        abar = next;
        records.push(StepRecord {
            step: i + 1,
            u: st.u,
            x: st.x,
            eta: st.eta.iter().copied().collect(),
            gain: st.gain.iter().copied().collect(),
            kappa: st.kappa,
            spectrum_after: after,
        });
    }
    let kappas = records.iter().map(|r| r.kappa).collect();
    let diagnostics = diagnostics(sys, &total, Some(&plan.targets()), kappas);
    Ok((
        Gain {
            k: total,
            method: Method::Sequential,
            diagnostics,
        },
        records,
    ))
}
