#![allow(dead_code)]

use opnorm_core::SymmetricMatrix;

/// Cyclic Jacobi eigendecomposition: `(values ascending, vectors as columns
/// in the same order)`. Independent of the library's tridiagonal solver.
pub fn jacobi_eigen(m: &SymmetricMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.n();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Largest principal angle (as its sine) between two orthonormal sets.
pub fn subspace_sine(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    // ‖(I − P_b) a_i‖ for each a_i, maximised; equals sin θ_max when ranks match.
    let mut worst = 0.0f64;
    for x in a {
        let mut r = x.clone();
        for y in b {
            let c = dot(x, y);
            for (ri, yi) in r.iter_mut().zip(y) {
                *ri -= c * yi;
            }
        }
        worst = worst.max(norm(&r));
    }
    worst
}

/// Exhaustive `max xᵀMx` over all `2ⁿ` sign vectors, written without Gray codes.
pub fn naive_qp(m: &SymmetricMatrix) -> f64 {
    let n = m.n();
    let mut best = f64::NEG_INFINITY;
    for code in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| if code >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        best = best.max(m.quad_form(&x));
    }
    best
}
