use num_complex::Complex64;

use super::{ensure_finite, ensure_square, max_abs, Matrix, ULP};
use crate::error::{PlaceError, Result};
use crate::poly::Spectrum;

/// One diagonal block of a quasi-triangular Schur factor.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurBlock {
    pub start: usize,
    /// 1 or 2.
    pub size: usize,
    /// `re` for a 1x1 block, `re ± i·im` for a 2x2 block (`im` is 0 when the
    /// discriminant was clamped to a repeated real value).
    pub re: f64,
    pub im: f64,
}

impl SchurBlock {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        match self.size {
            1 => vec![Complex64::new(self.re, 0.0)],
            _ => vec![Complex64::new(self.re, self.im), Complex64::new(self.re, -self.im)],
        }
    }
}

/// `A = Q T Q^T` with `Q` orthogonal and `T` lower quasi-triangular.
#[derive(Clone, Debug)]
pub struct SchurDecomposition {
    pub q: Matrix,
    pub t: Matrix,
    pub blocks: Vec<SchurBlock>,
}

impl SchurDecomposition {
    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_trusted(self.blocks.iter().flat_map(|b| b.eigenvalues()).collect())
    }

    /// Reconstructs `Q T Q^T`.
    pub fn reconstruct(&self) -> Matrix {
        &self.q * &self.t * self.q.transpose()
    }
}

/// Fortran-style `SIGN(a, b)`.
fn sign(a: f64, b: f64) -> f64 {
    if b.is_sign_negative() {
        -a.abs()
    } else {
        a.abs()
    }
}

pub(super) struct Standard2x2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub cs: f64,
    pub sn: f64,
}

/// Schur factorization of a real 2x2 block in standard form.
///
/// On return `[a b; c d]_in = [cs -sn; sn cs] [a b; c d]_out [cs sn; -sn cs]`
/// where the output is upper triangular for real eigenvalues, or has
/// `a == d` and `b * c < 0` for a complex pair.
pub(super) fn standardize_2x2(mut a: f64, mut b: f64, mut c: f64, mut d: f64) -> Standard2x2 {
    const MULTPL: f64 = 4.0;
    let eps = ULP;
    let (mut cs, mut sn);
    if c == 0.0 {
        cs = 1.0;
        sn = 0.0;
    } else if b == 0.0 {
        cs = 0.0;
        sn = 1.0;
        std::mem::swap(&mut a, &mut d);
        b = -c;
        c = 0.0;
    } else if a - d == 0.0 && sign(1.0, b) != sign(1.0, c) {
        cs = 1.0;
        sn = 0.0;
    } else {
        let temp = a - d;
        let mut p = 0.5 * temp;
        let bcmax = b.abs().max(c.abs());
        let bcmis = b.abs().min(c.abs()) * sign(1.0, b) * sign(1.0, c);
        let scale = p.abs().max(bcmax);
        let mut z = p / scale * p + bcmax / scale * bcmis;
        if z >= MULTPL * eps {
            // real eigenvalues
            z = p + sign(scale.sqrt() * z.sqrt(), p);
            a = d + z;
            d -= bcmax / z * bcmis;
            let tau = c.hypot(z);
            cs = z / tau;
            sn = c / tau;
            b -= c;
            c = 0.0;
        } else {
            // complex or nearly equal real eigenvalues: equalize the diagonal
            let sigma = b + c;
            let tau = sigma.hypot(temp);
            cs = (0.5 * (1.0 + sigma.abs() / tau)).sqrt();
            sn = -(p / (tau * cs)) * sign(1.0, sigma);

            let aa = a * cs + b * sn;
            let bb = -a * sn + b * cs;
            let cc = c * cs + d * sn;
            let dd = -c * sn + d * cs;

            a = aa * cs + cc * sn;
            b = bb * cs + dd * sn;
            c = -aa * sn + cc * cs;
            d = -bb * sn + dd * cs;

            let mid = 0.5 * (a + d);
            a = mid;
            d = mid;

            if c != 0.0 {
                if b != 0.0 {
                    if sign(1.0, b) == sign(1.0, c) {
                        // real eigenvalues after all: triangularize
                        let sab = b.abs().sqrt();
                        let sac = c.abs().sqrt();
                        p = sign(sab * sac, c);
                        let tau = 1.0 / (b + c).abs().sqrt();
                        a = mid + p;
                        d = mid - p;
                        b -= c;
                        c = 0.0;
                        let cs1 = sab * tau;
                        let sn1 = sac * tau;
                        let t = cs * cs1 - sn * sn1;
                        sn = cs * sn1 + sn * cs1;
                        cs = t;
                    }
                } else {
                    b = -c;
                    c = 0.0;
                    let t = cs;
                    cs = -sn;
                    sn = t;
                }
            }
        }
    }
    Standard2x2 { a, b, c, d, cs, sn }
}

/// Applies the plane rotation `[cs sn; -sn cs]` from the left to rows `(p, p+1)`.
pub(super) fn rotate_rows(h: &mut Matrix, p: usize, cols: std::ops::Range<usize>, cs: f64, sn: f64) {
    for j in cols {
        let (x, y) = (h[(p, j)], h[(p + 1, j)]);
        h[(p, j)] = cs * x + sn * y;
        h[(p + 1, j)] = cs * y - sn * x;
    }
}

/// Applies `[cs -sn; sn cs]` from the right to columns `(p, p+1)`.
pub(super) fn rotate_cols(h: &mut Matrix, p: usize, rows: std::ops::Range<usize>, cs: f64, sn: f64) {
    for i in rows {
        let (x, y) = (h[(i, p)], h[(i, p + 1)]);
        h[(i, p)] = cs * x + sn * y;
        h[(i, p + 1)] = cs * y - sn * x;
    }
}

/// Puts the 2x2 diagonal block of the upper quasi-triangular `h` at `p` into
/// standard form, updating the rest of `h` and the accumulated `z`.
pub(super) fn standardize_block(h: &mut Matrix, z: &mut Matrix, p: usize) {
    let n = h.nrows();
    let s = standardize_2x2(h[(p, p)], h[(p, p + 1)], h[(p + 1, p)], h[(p + 1, p + 1)]);
    h[(p, p)] = s.a;
    h[(p, p + 1)] = s.b;
    h[(p + 1, p)] = s.c;
    h[(p + 1, p + 1)] = s.d;
    rotate_rows(h, p, p + 2..n, s.cs, s.sn);
    rotate_cols(h, p, 0..p, s.cs, s.sn);
    rotate_cols(z, p, 0..z.nrows(), s.cs, s.sn);
}

/// Householder vector for `x`: returns `(v, tau, beta)` with `v[0] = 1` and
/// `(I - tau v v^T) x = beta e_1`. `tau == 0` when `x` is already a multiple of `e_1`.
pub(super) fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let alpha = x[0];
    let xnorm = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut v = vec![0.0; x.len()];
    v[0] = 1.0;
    if xnorm == 0.0 {
        return (v, 0.0, alpha);
    }
    let beta = -sign(alpha.hypot(xnorm), alpha);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for (vi, xi) in v[1..].iter_mut().zip(&x[1..]) {
        *vi = xi * scale;
    }
    (v, tau, beta)
}

/// Upper Hessenberg reduction `m = Q H Q^T`.
fn upper_hessenberg(m: &Matrix) -> (Matrix, Matrix) {
    let n = m.nrows();
    let mut h = m.clone();
    let mut q = Matrix::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let (v, tau, beta) = householder(&x);
        if tau == 0.0 {
            continue;
        }
        // H <- P H
        for j in k..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * h[(k + 1 + t, j)]).sum();
            let f = tau * dot;
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= f * vt;
            }
        }
        // H <- H P, Q <- Q P
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * mat[(i, k + 1 + t)]).sum();
                let f = tau * dot;
                for (t, vt) in v.iter().enumerate() {
                    mat[(i, k + 1 + t)] -= f * vt;
                }
            }
        }
        h[(k + 1, k)] = beta;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    (q, h)
}

/// Reduces `A` to lower Hessenberg form: `A = Q H Q^T`, `H(i, j) = 0` for `j > i + 1`.
pub fn hessenberg(a: &Matrix) -> Result<(Matrix, Matrix)> {
    ensure_square(a, "matrix")?;
    let (q, h) = upper_hessenberg(&a.transpose());
    Ok((q, h.transpose()))
}

/// Francis double-shift QR on an upper Hessenberg matrix, accumulating into `z`.
/// Returns the number of sweeps spent, or that count as an error if the cap was hit.
fn francis(h: &mut Matrix, z: &mut Matrix) -> std::result::Result<usize, usize> {
    let n = h.nrows();
    let norm = max_abs(h);
    let max_sweeps = 40 * n;
    let mut sweeps = 0;
    let mut stalled = 0;
    let mut hi = n as isize - 1;

    while hi >= 0 {
        let hu = hi as usize;
        let mut l = hu;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() <= ULP * s {
                break;
            }
            l -= 1;
        }
        if l > 0 {
            h[(l, l - 1)] = 0.0;
        }
        if l == hu {
            hi -= 1;
            stalled = 0;
            continue;
        }
        if l + 1 == hu {
            standardize_block(h, z, l);
            hi -= 2;
            stalled = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            return Err(sweeps);
        }
        sweeps += 1;
        stalled += 1;

        let (x, y, w) = if stalled % 10 == 0 {
            let s = h[(hu, hu - 1)].abs() + h[(hu - 1, hu - 2)].abs();
            let x = h[(hu, hu)] + 0.75 * s;
            (x, x, -0.4375 * s * s)
        } else {
            (h[(hu, hu)], h[(hu - 1, hu - 1)], h[(hu, hu - 1)] * h[(hu - 1, hu)])
        };

        // Look for two consecutive small subdiagonal elements.
        let mut m = hu - 2;
        let (mut p, mut q, mut r);
        loop {
            let zz = h[(m, m)];
            let rr = x - zz;
            let ss = y - zz;
            p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
            q = h[(m + 1, m + 1)] - zz - rr - ss;
            r = h[(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
            let rhs = ULP * (p.abs() * (h[(m - 1, m - 1)].abs() + zz.abs() + h[(m + 1, m + 1)].abs()));
            if lhs < rhs {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=hu {
            h[(i, i - 2)] = 0.0;
            if i > m + 2 {
                h[(i, i - 3)] = 0.0;
            }
        }

        // Double QR step on rows l..=hi and columns m..=hi.
        for k in m..hu {
            let notlast = k != hu - 1;
            let mut xs = 1.0;
            if k != m {
                p = h[(k, k - 1)];
                q = h[(k + 1, k - 1)];
                r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                xs = p.abs() + q.abs() + r.abs();
                if xs == 0.0 {
                    continue;
                }
                p /= xs;
                q /= xs;
                r /= xs;
            }
            let mut s = (p * p + q * q + r * r).sqrt();
            if p < 0.0 {
                s = -s;
            }
            if s == 0.0 {
                continue;
            }
            if k != m {
                h[(k, k - 1)] = -s * xs;
                h[(k + 1, k - 1)] = 0.0;
                if notlast {
                    h[(k + 2, k - 1)] = 0.0;
                }
            } else if l != m {
                h[(k, k - 1)] = -h[(k, k - 1)];
            }
            p += s;
            let vx = p / s;
            let vy = q / s;
            let vz = r / s;
            q /= p;
            r /= p;

            for j in k..n {
                let mut t = h[(k, j)] + q * h[(k + 1, j)];
                if notlast {
                    t += r * h[(k + 2, j)];
                    h[(k + 2, j)] -= t * vz;
                }
                h[(k, j)] -= t * vx;
                h[(k + 1, j)] -= t * vy;
            }
            for i in 0..=hu.min(k + 3) {
                let mut t = vx * h[(i, k)] + vy * h[(i, k + 1)];
                if notlast {
                    t += vz * h[(i, k + 2)];
                    h[(i, k + 2)] -= t * r;
                }
                h[(i, k)] -= t;
                h[(i, k + 1)] -= t * q;
            }
            for i in 0..n {
                let mut t = vx * z[(i, k)] + vy * z[(i, k + 1)];
                if notlast {
                    t += vz * z[(i, k + 2)];
                    z[(i, k + 2)] -= t * r;
                }
                z[(i, k)] -= t;
                z[(i, k + 1)] -= t * q;
            }
        }
    }
    Ok(sweeps)
}

/// Eigenvalues of a 2x2 block from trace and determinant.
///
/// A discriminant in `[-tol, 0)` is clamped to zero and the block is reported
/// as a repeated real eigenvalue.
pub(super) fn block_eigen(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let half_trace = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = half_diff * half_diff + b * c;
    let scale = a.abs() + b.abs() + c.abs() + d.abs();
    let tol = 4.0 * ULP * scale * scale;
    if disc < -tol {
        (half_trace, (-disc).sqrt())
    } else {
        (half_trace, 0.0)
    }
}

/// Reads the block structure off an upper quasi-triangular matrix.
pub(super) fn scan_blocks(s: &Matrix) -> Vec<SchurBlock> {
    let n = s.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && s[(i + 1, i)] != 0.0 {
            let (re, im) = block_eigen(s[(i, i)], s[(i, i + 1)], s[(i + 1, i)], s[(i + 1, i + 1)]);
            blocks.push(SchurBlock {
                start: i,
                size: 2,
                re,
                im,
            });
            i += 2;
        } else {
            blocks.push(SchurBlock {
                start: i,
                size: 1,
                re: s[(i, i)],
                im: 0.0,
            });
            i += 1;
        }
    }
    blocks
}

/// Real Schur decomposition in lower quasi-triangular form.
///
/// The Francis iteration runs on `A^T` in the usual upper form; the result is
/// transposed back, so `Q` is shared and `T = S^T`.
pub fn real_schur(a: &Matrix) -> Result<SchurDecomposition> {
    let n = ensure_square(a, "matrix")?;
    if n == 0 {
        return Err(PlaceError::Dimension("matrix must be at least 1x1".into()));
    }
    ensure_finite(a, "matrix")?;
    let (mut q, mut s) = upper_hessenberg(&a.transpose());
    let outcome = francis(&mut s, &mut q);
    for j in 0..n {
        for i in j + 2..n {
            s[(i, j)] = 0.0;
        }
    }
    match outcome {
        Ok(_) => {
            let blocks = scan_blocks(&s);
            Ok(SchurDecomposition {
                q,
                t: s.transpose(),
                blocks,
            })
        }
        Err(sweeps) => Err(PlaceError::NonConvergence {
            sweeps,
            partial: Box::new(SchurDecomposition {
                q,
                t: s.transpose(),
                blocks: Vec::new(),
            }),
        }),
    }
}

/// Eigenvalues of `A` as a self-conjugate multiset read off the Schur blocks.
/// Eigenvalues of `a`, computed on a balanced copy (see [`balance`]).
pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    Ok(real_schur(&balance(a))?.spectrum())
}

/// Diagonal similarity `D^-1 A D` with `D` a power-of-two diagonal that
/// brings each row and column of the off-diagonal part to similar norms.
/// The scaling is exact, so the spectrum is unchanged while its sensitivity
/// to rounding in the QR iteration usually drops sharply.
pub fn balance(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let mut m = a.clone();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                col += m[(j, i)].abs();
                row += m[(i, j)].abs();
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            while col < row / 2.0 {
                col *= 2.0;
                row /= 2.0;
                f *= 2.0;
            }
            while col >= row * 2.0 {
                col /= 2.0;
                row *= 2.0;
                f /= 2.0;
            }
            if col + row < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    m
}
