use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Entries may differ from their transpose by this much (relative to the
/// largest entry) before a matrix is rejected as non-symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to `||S||_F`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEigen {
    /// Descending; ties keep their original diagonal order.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector of `values[i]`, with its
    /// largest-magnitude entry positive.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver.
///
/// The input is symmetrized as `(S + S^T) / 2` before rotating. Each sweep
/// visits every `(p, q)` pair above the diagonal once and zeroes it with a
/// plane rotation; accumulated rotations give the eigenvectors.
pub fn eigh_symmetric(s: &Matrix) -> Result<SymmetricEigen> {
    if !s.is_square() {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    if s.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let scale = s.max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (s[(i, j)] - s[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::Shape(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    s[(i, j)],
                    s[(j, i)]
                )));
            }
        }
    }

    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = Matrix::identity(n);
    let tol = OFF_DIAGONAL_TOLERANCE * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > tol {
        return Err(Error::Convergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep index order
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));

    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = v.select_columns(&order);
    for j in 0..n {
        let mut pivot = 0;
        for i in 1..n {
            if vectors[(i, j)].abs() > vectors[(pivot, j)].abs() {
                pivot = i;
            }
        }
        if vectors[(pivot, j)] < 0.0 {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Applies `A <- J^T A J`, `V <- V J` with `J` chosen to zero `A[p][q]`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
