//! Shared test oracles, independent of the library's own numerics.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns (diagonal, off-diagonal).
fn tridiagonalize(a: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum();
        if alpha_sq == 0.0 {
            continue;
        }
        let alpha = -a[k + 1][k].signum() * alpha_sq.sqrt();
        let mut v = vec![0.0; n];
        v[k + 1] = a[k + 1][k] - alpha;
        for i in k + 2..n {
            v[i] = a[i][k];
        }
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        // A <- H A H with H = I - 2 v v^T / (v^T v)
        let p: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum::<f64>() * 2.0 / vv)
            .collect();
        let kc: f64 = (0..n).map(|i| v[i] * p[i]).sum::<f64>() / vv;
        let q: Vec<f64> = (0..n).map(|i| p[i] - kc * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= v[i] * q[j] + q[i] * v[j];
            }
        }
    }
    let d = (0..n).map(|i| a[i][i]).collect();
    let e = (1..n).map(|i| a[i][i - 1]).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues in descending order by bisection on Sturm counts.
pub fn eigenvalues_by_bisection(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let (d, e) = tridiagonalize(a);
    let mut radius = 0.0f64;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { e[i].abs() } else { 0.0 };
        radius = radius.max(d[i].abs() + left + right);
    }
    let (lo0, hi0) = (-radius - 1.0, radius + 1.0);
    let mut values: Vec<f64> = (0..n)
        .map(|k| {
            // k-th smallest: smallest x with count(x) > k
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if sturm_count(&d, &e, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    values.reverse();
    values
}

/// Symmetric matrix with entries uniform on [-scale, scale].
pub fn random_symmetric(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let x = rng.random_range(-scale..=scale);
            a[i][j] = x;
            a[j][i] = x;
        }
    }
    a
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
