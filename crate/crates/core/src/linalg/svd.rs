use super::Matrix;

/// Singular values in descending order, by one-sided Jacobi rotations.
///
/// Equivalent to diagonalizing `M^T M` without forming it, so small singular
/// values keep their relative accuracy.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut a = if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        m.transpose()
    };
    let cols = a.ncols();
    if cols == 0 {
        return Vec::new();
    }
    let scale = super::max_abs(&a);
    if scale == 0.0 {
        return vec![0.0; cols];
    }
    a /= scale;
    let tol = f64::EPSILON * (a.nrows() as f64).sqrt();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..a.nrows() {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..a.nrows() {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * x - s * y;
                    a[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols).map(|j| a.column(j).norm() * scale).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}
