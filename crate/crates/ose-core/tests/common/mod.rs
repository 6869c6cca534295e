//! Shared oracles for integration tests. These stay independent of the
//! library's solver paths: eigenvalues come from sign-change bisection on the
//! characteristic polynomial of the 3x3 Gram matrix.

#![allow(clippy::needless_range_loop)]

use ose_core::sparsemat::DenseMatrix;

/// Extreme eigenvalues of A^T A for a 3-column matrix via the characteristic
/// cubic. The cubic's critical points split the real line into monotone
/// pieces; each sign change is bisected to f64 precision.
pub fn charpoly_eigen_bounds_3x3(a: &DenseMatrix) -> (f64, f64) {
    assert_eq!(a.cols(), 3);
    let mut g = [[0.0f64; 3]; 3];
    for r in 0..a.rows() {
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += a.get(r, i) * a.get(r, j);
            }
        }
    }
    let tr = g[0][0] + g[1][1] + g[2][2];
    let c1 = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        + g[0][0] * g[2][2] - g[0][2] * g[2][0]
        + g[1][1] * g[2][2] - g[1][2] * g[2][1];
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    // p(x) = x^3 - tr x^2 + c1 x - det
    let p = |x: f64| ((x - tr) * x + c1) * x - det;

    let bound = (0..3)
        .map(|i| (0..3).map(|j| g[i][j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let (lo, hi) = (-bound - 1.0, bound + 1.0);

    let disc = tr * tr - 3.0 * c1;
    let mut brackets = Vec::new();
    if disc > 0.0 {
        let sq = disc.sqrt();
        let t1 = (tr - sq) / 3.0;
        let t2 = (tr + sq) / 3.0;
        brackets.push((lo, t1));
        brackets.push((t1, t2));
        brackets.push((t2, hi));
    } else {
        brackets.push((lo, hi));
    }

    let mut roots = Vec::new();
    for (mut x0, mut x1) in brackets {
        let (f0, f1) = (p(x0), p(x1));
        if f0 == 0.0 {
            roots.push(x0);
            continue;
        }
        if f1 == 0.0 {
            roots.push(x1);
            continue;
        }
        if f0.signum() == f1.signum() {
            continue;
        }
        let mut fa = f0;
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            let fm = p(mid);
            if fm == 0.0 {
                x0 = mid;
                x1 = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                x0 = mid;
                fa = fm;
            } else {
                x1 = mid;
            }
        }
        roots.push(0.5 * (x0 + x1));
    }
    assert!(!roots.is_empty(), "bisection found no eigenvalues");
    let min = roots.iter().copied().fold(f64::INFINITY, f64::min);
    let max = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}
