use num_complex::Complex64;

use super::schur::{householder, real_schur, scan_blocks, standardize_block, SchurDecomposition};
use super::{condition_number, ensure_square, max_abs, solve_vector, Matrix, Vector, ULP};
use crate::error::{PlaceError, Result};
use crate::poly::Spectrum;
use crate::spectrum::format_complex;

/// Orthogonal split `[U V]` of the state space from a reordered Schur form:
/// `A (U, V) = (U, V) [[X, 0], [*, Y]]`.
///
/// `range(V)` is `A`-invariant and carries the `kept` eigenvalues; `U` spans
/// its orthogonal complement and `X = U^T A U` carries the `moved` ones.
#[derive(Clone, Debug)]
pub struct InvariantSplit {
    pub u: Matrix,
    pub v: Matrix,
    pub x: Matrix,
    pub y: Matrix,
    pub moved: Spectrum,
    pub kept: Spectrum,
}

/// Solves `A11 X - X A22 = A12` for blocks of order at most 2 through the
/// Kronecker form. Returns the solution and the condition of the system.
fn solve_sylvester(a11: &Matrix, a22: &Matrix, a12: &Matrix) -> Result<(Matrix, f64)> {
    let (n1, n2) = (a11.nrows(), a22.nrows());
    let idx = |i: usize, j: usize| i + j * n1;
    let size = n1 * n2;
    let mut k = Matrix::zeros(size, size);
    let mut rhs = Vector::zeros(size);
    for i in 0..n1 {
        for j in 0..n2 {
            for t in 0..n1 {
                k[(idx(i, j), idx(t, j))] += a11[(i, t)];
            }
            for t in 0..n2 {
                k[(idx(i, j), idx(i, t))] -= a22[(t, j)];
            }
            rhs[idx(i, j)] = a12[(i, j)];
        }
    }
    let kappa = condition_number(&k)?;
    if !(kappa <= 1.0 / ULP) {
        return Ok((Matrix::zeros(n1, n2), kappa));
    }
    let x = solve_vector(&k, &rhs)?;
    Ok((Matrix::from_column_slice(n1, n2, x.as_slice()), kappa))
}

/// Full orthogonal factor of the Householder QR of a tall `m x k` matrix.
fn householder_q(w: &Matrix) -> Matrix {
    let (m, k) = w.shape();
    let mut r = w.clone();
    let mut reflectors = Vec::with_capacity(k);
    for j in 0..k {
        let x: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
        let (v, tau, _) = householder(&x);
        for c in j..k {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * r[(j + t, c)]).sum();
            for (t, vt) in v.iter().enumerate() {
                r[(j + t, c)] -= tau * dot * vt;
            }
        }
        reflectors.push((j, v, tau));
    }
    let mut q = Matrix::identity(m, m);
    for (j, v, tau) in reflectors.into_iter().rev() {
        for c in 0..m {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * q[(j + t, c)]).sum();
            for (t, vt) in v.iter().enumerate() {
                q[(j + t, c)] -= tau * dot * vt;
            }
        }
    }
    q
}

/// Swaps adjacent diagonal blocks of sizes `n1` (at `p`) and `n2` (at `p + n1`)
/// of the upper quasi-triangular `s`, updating `z`.
fn swap_blocks(s: &mut Matrix, z: &mut Matrix, p: usize, n1: usize, n2: usize, index: usize) -> Result<()> {
    let n = s.nrows();
    let m = n1 + n2;
    let local = s.view((p, p), (m, m)).clone_owned();
    let a11 = local.view((0, 0), (n1, n1)).clone_owned();
    let a12 = local.view((0, n1), (n1, n2)).clone_owned();
    let a22 = local.view((n1, n1), (n2, n2)).clone_owned();

    let (x, kappa) = solve_sylvester(&a11, &a22, &a12)?;
    if !(kappa <= 1.0 / ULP) {
        return Err(PlaceError::IllConditionedSwap {
            first: index,
            second: index + 1,
            reason: format!("Sylvester system has condition {kappa:e} (eigenvalues too close)"),
        });
    }

    // Columns of [-X; I] span the invariant subspace of the trailing block.
    let mut w = Matrix::zeros(m, n2);
    for i in 0..n1 {
        for j in 0..n2 {
            w[(i, j)] = -x[(i, j)];
        }
    }
    for j in 0..n2 {
        w[(n1 + j, j)] = 1.0;
    }
    let q = householder_q(&w);

    let rows = q.transpose() * s.view((p, 0), (m, n));
    s.view_mut((p, 0), (m, n)).copy_from(&rows);
    let cols = s.view((0, p), (n, m)) * &q;
    s.view_mut((0, p), (n, m)).copy_from(&cols);
    let zcols = z.view((0, p), (z.nrows(), m)) * &q;
    z.view_mut((0, p), (z.nrows(), m)).copy_from(&zcols);

    let residual = max_abs(&s.view((p + n2, p), (n1, n2)).clone_owned());
    let thresh = (10.0 * ULP * max_abs(&local)).max(f64::MIN_POSITIVE);
    if residual > thresh {
        return Err(PlaceError::IllConditionedSwap {
            first: index,
            second: index + 1,
            reason: format!("swap residual {residual:e} exceeds {thresh:e}"),
        });
    }
    for i in p + n2..p + m {
        for j in p..p + n2 {
            s[(i, j)] = 0.0;
        }
    }

    for (start, size) in [(p, n2), (p + n2, n1)] {
        if size == 2 {
            standardize_block(s, z, start);
            if s[(start + 1, start)] == 0.0 {
                return Err(PlaceError::IllConditionedSwap {
                    first: index,
                    second: index + 1,
                    reason: "complex pair split into real eigenvalues during the swap".into(),
                });
            }
        }
    }
    Ok(())
}

/// Reorders a lower quasi-triangular Schur decomposition so that the selected
/// blocks (indices into `dec.blocks`) occupy the leading diagonal positions,
/// keeping their relative order. Unselected blocks keep theirs too.
pub fn reorder_schur(dec: &SchurDecomposition, select: &[usize]) -> Result<SchurDecomposition> {
    let nb = dec.blocks.len();
    let mut chosen = vec![false; nb];
    for &i in select {
        if i >= nb {
            return Err(PlaceError::Validation(format!(
                "block index {i} out of range ({nb} blocks)"
            )));
        }
        chosen[i] = true;
    }

    // Reordering works on the upper form S = T^T, which shares Q.
    let mut s = dec.t.transpose();
    let mut z = dec.q.clone();
    let mut layout: Vec<(usize, bool)> = dec.blocks.iter().map(|b| b.size).zip(chosen).collect();
    let mut swapped = false;
    let mut next = 0;
    for i in 0..nb {
        if !layout[i].1 {
            continue;
        }
        let mut pos = i;
        while pos > next {
            let start: usize = layout[..pos - 1].iter().map(|b| b.0).sum();
            let (n1, n2) = (layout[pos - 1].0, layout[pos].0);
            swap_blocks(&mut s, &mut z, start, n1, n2, pos - 1)?;
            layout.swap(pos - 1, pos);
            swapped = true;
            pos -= 1;
        }
        next += 1;
    }
    if !swapped {
        return Ok(dec.clone());
    }
    let blocks = scan_blocks(&s);
    Ok(SchurDecomposition {
        q: z,
        t: s.transpose(),
        blocks,
    })
}

/// Greedy nearest-first matching of `targets` onto `candidates`.
///
/// Returns, for each target, the index of its candidate. Fails when a target
/// has no candidate within `tol`, or when two candidates within `tol` of one
/// target are themselves more than `tol` apart (the choice would matter).
pub fn match_spectrum(targets: &Spectrum, candidates: &[Complex64], tol: f64) -> Result<Vec<usize>> {
    for t in targets.iter() {
        let near: Vec<&Complex64> = candidates.iter().filter(|c| (*c - t).norm() <= tol).collect();
        for (a, ca) in near.iter().enumerate() {
            for cb in &near[a + 1..] {
                if (*ca - *cb).norm() > tol {
                    return Err(PlaceError::Matching(format!(
                        "{} is ambiguous: both {} and {} lie within {tol:e}",
                        format_complex(*t),
                        format_complex(**ca),
                        format_complex(**cb)
                    )));
                }
            }
        }
    }

    let mut pairs = Vec::new();
    for (ti, t) in targets.iter().enumerate() {
        for (ci, c) in candidates.iter().enumerate() {
            let d = (c - t).norm();
            if d <= tol {
                pairs.push((d, ti, ci));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assigned = vec![None; targets.len()];
    let mut taken = vec![false; candidates.len()];
    for (_, ti, ci) in pairs {
        if assigned[ti].is_none() && !taken[ci] {
            assigned[ti] = Some(ci);
            taken[ci] = true;
        }
    }

    let missing: Vec<String> = assigned
        .iter()
        .zip(targets.iter())
        .filter(|(a, _)| a.is_none())
        .map(|(_, t)| {
            let mut near: Vec<&Complex64> = candidates.iter().collect();
            near.sort_by(|a, b| (*a - t).norm().total_cmp(&(*b - t).norm()));
            let list: Vec<String> = near.iter().take(3).map(|c| format_complex(**c)).collect();
            format!("{} (nearest: {})", format_complex(*t), list.join(", "))
        })
        .collect();
    if !missing.is_empty() {
        return Err(PlaceError::Matching(format!(
            "no unused eigenvalue within {tol:e} of {}",
            missing.join("; ")
        )));
    }
    Ok(assigned.into_iter().map(|a| a.unwrap_or_default()).collect())
}

/// Splits the state space into the orthogonal complement `U` of an
/// `A`-invariant subspace `V`, where `X = U^T A U` carries `moved` and
/// `Y = V^T A V` carries the remaining eigenvalues.
///
/// `moved` is matched against the computed spectrum with tolerance
/// `1e-6 * max(1, max|A|)`; a conjugate pair must be moved as a whole.
pub fn invariant_split(a: &Matrix, moved: &Spectrum) -> Result<InvariantSplit> {
    let n = ensure_square(a, "matrix")?;
    let dec = real_schur(a)?;
    let mut candidates = Vec::with_capacity(n);
    let mut owner = Vec::with_capacity(n);
    for (bi, block) in dec.blocks.iter().enumerate() {
        for ev in block.eigenvalues() {
            candidates.push(ev);
            owner.push(bi);
        }
    }
    let tol = 1e-6 * max_abs(a).max(1.0);
    let assignment = match_spectrum(moved, &candidates, tol)?;

    let mut hits = vec![0usize; dec.blocks.len()];
    for ci in assignment {
        hits[owner[ci]] += 1;
    }
    let mut select = Vec::new();
    for (bi, block) in dec.blocks.iter().enumerate() {
        match hits[bi] {
            0 => {}
            h if h == block.size => select.push(bi),
            _ => {
                return Err(PlaceError::Validation(format!(
                    "moved set splits the conjugate pair {}±{}i",
                    block.re, block.im
                )))
            }
        }
    }

    let ordered = reorder_schur(&dec, &select)?;
    let r = moved.len();
    let lead = select.len();
    let moved = Spectrum::from_trusted(ordered.blocks[..lead].iter().flat_map(|b| b.eigenvalues()).collect());
    let kept = Spectrum::from_trusted(ordered.blocks[lead..].iter().flat_map(|b| b.eigenvalues()).collect());
    Ok(InvariantSplit {
        u: ordered.q.columns(0, r).clone_owned(),
        v: ordered.q.columns(r, n - r).clone_owned(),
        x: ordered.t.view((0, 0), (r, r)).clone_owned(),
        y: ordered.t.view((r, r), (n - r, n - r)).clone_owned(),
        moved,
        kept,
    })
}
