//! Seeded random instance families used by tests, benchmarks and the CLI.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{DenseMatrix, SymmetricMatrix};
use crate::projection::{orthonormalize, DataMatrix};

/// Deterministic generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    crate::rng_from_seed(seed)
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard-normal symmetric matrix with the diagonal replaced by its absolute value.
pub fn random_symmetric_nonneg_diag(n: usize, rng: &mut impl Rng) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(n, |i, j| {
        let x = normal(rng);
        if i == j {
            x.abs()
        } else {
            x
        }
    })
}

/// Standard-normal symmetric matrix (diagonal unconstrained).
pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(n, |_, _| normal(rng))
}

/// `AAᵀ` for standard-normal `n × n` `A`, scaled to unit trace.
pub fn random_psd(n: usize, rng: &mut impl Rng) -> SymmetricMatrix {
    let a = DenseMatrix::from_fn(n, n, |_, _| normal(rng));
    // Rows of A are the columns of Aᵀ, so (Aᵀ)ᵀAᵀ = AAᵀ.
    let mut m = a.transpose().gram();
    let tr = m.trace();
    if tr > 0.0 {
        m.scale(1.0 / tr);
    }
    m
}

/// `r` orthonormal vectors spanning a uniformly random subspace of `ℝⁿ`.
pub fn random_orthonormal(n: usize, r: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    loop {
        let raw: Vec<Vec<f64>> = (0..r).map(|_| (0..n).map(|_| normal(rng)).collect()).collect();
        let q = orthonormalize(&raw);
        if q.len() == r {
            return q;
        }
    }
}

/// Haar-random orthogonal `n × n` matrix (rows orthonormal).
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let rows = random_orthonormal(n, n, rng);
    DenseMatrix::from_rows(&rows).expect("square")
}

/// Random rank-`r` orthogonal projection matrix.
pub fn random_projection(n: usize, r: usize, rng: &mut impl Rng) -> SymmetricMatrix {
    let basis = random_orthonormal(n, r, rng);
    let mut p = SymmetricMatrix::zeros(n);
    for b in &basis {
        p.rank_one_update(b, 1.0);
    }
    p
}

/// Data whose Gram matrix is `Σ σ_i w_i w_iᵀ` plus a small isotropic-ish noise
/// term, where the `w_i` are unit vectors with disjoint supports.
#[derive(Debug, Clone)]
pub struct PlantedSparse {
    pub data: DataMatrix,
    pub components: Vec<Vec<f64>>,
    pub supports: Vec<Vec<usize>>,
}

impl PlantedSparse {
    /// The same data rotated by a dense random orthogonal matrix, so the
    /// planted directions become dense.
    pub fn rotated(&self, rng: &mut impl Rng) -> DataMatrix {
        let a = self.data.as_dense();
        let q = random_orthogonal(a.cols(), rng);
        let rotated = a.matmul(&q.transpose()).expect("conforming shapes");
        DataMatrix::new(rotated).expect("non-empty")
    }
}

/// `k` planted `sparsity`-sparse components in dimension `n` with variances
/// `1, 1/2, 1/3, …`. The noise rows are scaled so that the noise Gram matrix
/// has Frobenius norm `noise` times the signal trace.
pub fn planted_sparse(n: usize, k: usize, sparsity: usize, noise: f64, rng: &mut impl Rng) -> PlantedSparse {
    assert!(k * sparsity <= n, "supports must be disjoint");
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut components = Vec::with_capacity(k);
    let mut supports = Vec::with_capacity(k);
    let mut rows = Vec::new();
    let mut signal_trace = 0.0;
    for c in 0..k {
        let mut support: Vec<usize> = perm[c * sparsity..(c + 1) * sparsity].to_vec();
        support.sort_unstable();
        let mut w = vec![0.0; n];
        for &i in &support {
            // Magnitudes bounded away from zero keep the support identifiable.
            let mag = 0.5 + rng.random::<f64>();
            w[i] = if rng.random::<bool>() { mag } else { -mag };
        }
        let nrm = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        w.iter_mut().for_each(|x| *x /= nrm);
        let var = 1.0 / (c + 1) as f64;
        signal_trace += var;
        rows.push(w.iter().map(|x| x * libm::sqrt(var)).collect::<Vec<f64>>());
        components.push(w);
        supports.push(support);
    }
    if noise > 0.0 {
        let raw = DenseMatrix::from_fn(2 * n, n, |_, _| normal(rng));
        let fro = raw.gram().frobenius_norm();
        let scale = libm::sqrt(noise * signal_trace / fro);
        for i in 0..raw.rows() {
            rows.push(raw.row(i).iter().map(|x| x * scale).collect());
        }
    }
    let data = DataMatrix::new(DenseMatrix::from_rows(&rows).expect("equal rows")).expect("non-empty");
    PlantedSparse { data, components, supports }
}
