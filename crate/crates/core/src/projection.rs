//! Low-rank projections with small certified ∞→2 norm.
//!
//! A rank-`r` orthogonal projection always has `√r ≤ ‖Π‖_{∞→2} ≤ √n`, and
//! `‖Π‖²_{∞→2}` is sandwiched by the entrywise ℓ1 norm: `‖Π‖₁/r ≤ ‖Π‖²_{∞→2} ≤ ‖Π‖₁`.
//! Sparse bases therefore make good candidates. [`robust_projection`] mixes a
//! PCA head with a sparse-PCA tail for a grid of head ranks, certifies each
//! combined projection, and keeps the smallest bound that meets the
//! reconstruction budget.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::certify::{certify_sdp, CertifyOutcome, CertifyParams};
use crate::eigen::{self, symmetric_eigen, EigenOptions};
use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, DenseMatrix, SymmetricMatrix};

/// Power iterations per sparse component.
pub const SPARSE_PCA_ITERS: usize = 100;
const ORTHO_DROP_TOL: f64 = 1e-10;

/// `m × n` data, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    data: DenseMatrix,
}

impl DataMatrix {
    pub fn new(data: DenseMatrix) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::Empty("data matrix has no entries"));
        }
        Ok(Self { data })
    }

    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn cols(&self) -> usize {
        self.data.cols()
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.data
    }

    /// `AᵀA / tr(AᵀA)`.
    pub fn normalized_gram(&self) -> Result<SymmetricMatrix> {
        let mut g = self.data.gram();
        let tr = g.trace();
        if !(tr > 0.0) {
            return Err(Error::Empty("data matrix is identically zero"));
        }
        g.scale(1.0 / tr);
        Ok(g)
    }
}

/// `Π = B Bᵀ` for an orthonormal basis `B` of `r` vectors in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    n: usize,
    basis: Vec<Vec<f64>>,
    /// Verified upper bound κ on `‖Π‖_{∞→2}`.
    pub certified_bound: Option<f64>,
    /// `⟨G, I − Π⟩` against the Gram matrix the projection was fitted to.
    pub reconstruction_error: f64,
    /// Fewer than `r` directions carried signal; the rest are arbitrary.
    pub padded: bool,
}

impl ProjectionMatrix {
    /// Wraps an orthonormal basis, checking `BᵀB = I` to `tol`.
    pub fn from_orthonormal(n: usize, basis: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        for b in &basis {
            if b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.len() });
            }
        }
        let p = Self { n, basis, certified_bound: None, reconstruction_error: 0.0, padded: false };
        if p.orthonormality_defect() > tol {
            return Err(Error::InvalidParameter("basis is not orthonormal"));
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn matrix(&self) -> SymmetricMatrix {
        let mut p = SymmetricMatrix::zeros(self.n);
        for b in &self.basis {
            p.rank_one_update(b, 1.0);
        }
        p
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for b in &self.basis {
            axpy(dot(b, x), b, &mut out);
        }
        out
    }

    /// `‖BᵀB − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }

    /// Support of each basis vector (entries with `|x| > tol`).
    pub fn supports(&self, tol: f64) -> Vec<Vec<usize>> {
        self.basis
            .iter()
            .map(|b| b.iter().enumerate().filter(|(_, x)| x.abs() > tol).map(|(i, _)| i).collect())
            .collect()
    }

    /// Captured variance `⟨G, Π⟩`.
    pub fn captured_variance(&self, g: &SymmetricMatrix) -> f64 {
        self.basis.iter().map(|b| g.quad_form(b)).sum()
    }

    /// Certifies `‖Π‖_{∞→2}`; `certified_bound` is set only when the
    /// certificate verifies.
    pub fn certify(&mut self, params: &CertifyParams) -> Result<CertifyOutcome> {
        let outcome = certify_sdp(&self.matrix(), params)?;
        self.certified_bound = outcome
            .certificate
            .verification
            .is_verified()
            .then(|| libm::sqrt(outcome.certificate.bound.max(0.0)));
        Ok(outcome)
    }

    /// Block-diagonal combination of per-block projections (e.g. one per color
    /// channel). The result is uncertified; certify it directly.
    pub fn block_diagonal(parts: &[ProjectionMatrix]) -> ProjectionMatrix {
        let n: usize = parts.iter().map(|p| p.n).sum();
        let mut basis = Vec::new();
        let mut offset = 0;
        let mut err = 0.0;
        for p in parts {
            for b in &p.basis {
                let mut v = vec![0.0; n];
                v[offset..offset + p.n].copy_from_slice(b);
                basis.push(v);
            }
            offset += p.n;
            err += p.reconstruction_error;
        }
        ProjectionMatrix {
            n,
            basis,
            certified_bound: None,
            // Equal-trace blocks: the combined trace-normalized error is the mean.
            reconstruction_error: if parts.is_empty() { 0.0 } else { err / parts.len() as f64 },
            padded: parts.iter().any(|p| p.padded),
        }
    }
}

/// `⟨G, I − Π⟩`, clamped at zero.
pub fn reconstruction_error(g: &SymmetricMatrix, p: &ProjectionMatrix) -> f64 {
    (g.trace() - p.captured_variance(g)).max(0.0)
}

/// Modified Gram-Schmidt; vectors that collapse below `ORTHO_DROP_TOL` are dropped.
pub(crate) fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        let start = norm2(&w);
        if start == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let nrm = norm2(&w);
        if nrm > ORTHO_DROP_TOL * start.max(1.0) {
            for x in w.iter_mut() {
                *x /= nrm;
            }
            out.push(w);
        }
    }
    out
}

/// Keeps the `s` largest-magnitude entries (ties broken by index) and renormalizes.
fn hard_threshold(v: &mut [f64], s: usize) {
    if s < v.len() {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
        for &i in &idx[s..] {
            v[i] = 0.0;
        }
    }
    let nrm = norm2(v);
    if nrm > 0.0 {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
}

fn top_eigenvectors(g: &SymmetricMatrix, r: usize) -> Result<(Vec<Vec<f64>>, bool)> {
    let eig = symmetric_eigen(g)?;
    let n = g.n();
    let top = eig.values[n - 1].abs().max(f64::MIN_POSITIVE);
    let positive = eig.values.iter().filter(|&&v| v > 1e-12 * top).count();
    let basis = (0..r).map(|k| eig.vector(n - 1 - k)).collect();
    Ok((basis, positive < r))
}

/// Top-`r` principal subspace of the trace-normalized Gram matrix.
pub fn pca_projection(a: &DataMatrix, r: usize) -> Result<ProjectionMatrix> {
    pca_from_gram(&a.normalized_gram()?, r)
}

pub fn pca_from_gram(g: &SymmetricMatrix, r: usize) -> Result<ProjectionMatrix> {
    let n = g.n();
    if r == 0 || r > n {
        return Err(Error::InvalidParameter("PCA rank must satisfy 1 <= r <= n"));
    }
    let (basis, padded) = top_eigenvectors(g, r)?;
    let mut p = ProjectionMatrix { n, basis, certified_bound: None, reconstruction_error: 0.0, padded };
    p.reconstruction_error = reconstruction_error(g, &p);
    Ok(p)
}

/// Truncated power method for one `s`-sparse direction, started from the
/// thresholded top eigenvector of `g`.
fn truncated_power(g: &SymmetricMatrix, s: usize, seed: u64) -> Result<Vec<f64>> {
    let opts = EigenOptions { seed, tol: 1e-9, ..EigenOptions::default() };
    let mut v = match eigen::max_eigenpair(g, &opts) {
        Ok(p) => p.vector,
        Err(Error::EigenNotConverged { best, .. }) => best.vector,
        Err(e) => return Err(e),
    };
    hard_threshold(&mut v, s);
    let mut w = vec![0.0; g.n()];
    for _ in 0..SPARSE_PCA_ITERS {
        g.matvec_into(&v, &mut w);
        if norm2(&w) <= 1e-14 {
            break;
        }
        hard_threshold(&mut w, s);
        let diff: f64 = v.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum();
        core::mem::swap(&mut v, &mut w);
        if diff <= 1e-24 {
            break;
        }
    }
    Ok(v)
}

/// `k` orthonormal directions, each found by the truncated power method with
/// sparsity `s`, deflating `g ← (I − vvᵀ) g (I − vvᵀ)` in between. The basis is
/// orthonormalized, thresholded once more and orthonormalized again, so the
/// support union stays within `k·s` coordinates.
pub fn sparse_pca_projection(g: &SymmetricMatrix, k: usize, s: usize, seed: u64) -> Result<ProjectionMatrix> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter("sparse PCA rank must satisfy 1 <= k <= n"));
    }
    if s == 0 || s > n {
        return Err(Error::InvalidParameter("sparsity must satisfy 1 <= s <= n"));
    }
    let mut work = g.clone();
    let mut comps = Vec::with_capacity(k);
    for c in 0..k {
        let mut v = truncated_power(&work, s, seed.wrapping_add(c as u64))?;
        if norm2(&v) == 0.0 {
            v = vec![0.0; n];
        }
        work = work.deflate(&v);
        comps.push(v);
    }
    let mut basis = orthonormalize(&comps);
    for b in basis.iter_mut() {
        hard_threshold(b, s);
    }
    let mut basis = orthonormalize(&basis);
    let padded = basis.len() < k;
    if padded {
        fill_complement(&mut basis, n, k);
    }
    let mut p = ProjectionMatrix { n, basis, certified_bound: None, reconstruction_error: 0.0, padded };
    p.reconstruction_error = reconstruction_error(g, &p);
    Ok(p)
}

/// Extends an orthonormal set with coordinate directions up to `k` vectors.
fn fill_complement(basis: &mut Vec<Vec<f64>>, n: usize, k: usize) {
    for i in 0..n {
        if basis.len() >= k {
            break;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let extended = orthonormalize(&[basis.clone(), vec![e]].concat());
        if extended.len() > basis.len() {
            *basis = extended;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustProjectionParams {
    /// PCA head ranks to try; `None` means `{0, k/4, k/2, 3k/4, k}` rounded.
    pub r_grid: Option<Vec<usize>>,
    /// Sparsity of the sparse-PCA tail; `None` means `⌈2n/k⌉`.
    pub sparsity: Option<usize>,
    pub certify: CertifyParams,
    pub seed: u64,
}

impl Default for RobustProjectionParams {
    fn default() -> Self {
        Self {
            r_grid: None,
            sparsity: None,
            certify: CertifyParams::with_delta(0.25),
            seed: 0,
        }
    }
}

pub fn default_r_grid(k: usize) -> Vec<usize> {
    let kf = k as f64;
    let mut grid: Vec<usize> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|f| libm::round(f * kf) as usize)
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSummary {
    pub r: usize,
    pub rank: usize,
    /// `None` when the certificate failed verification.
    pub kappa: Option<f64>,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustProjection {
    pub projection: ProjectionMatrix,
    pub kappa: f64,
    /// Head rank of the chosen candidate.
    pub r: usize,
    pub candidates: Vec<CandidateSummary>,
}

/// PCA head of rank `r` plus a sparse-PCA tail of rank `k − r`, for each `r`
/// in the grid; returns the smallest verified κ with `⟨G, I − Π⟩ ≤ budget`.
pub fn robust_projection(
    a: &DataMatrix,
    k: usize,
    budget: f64,
    params: &RobustProjectionParams,
) -> Result<RobustProjection> {
    let g = a.normalized_gram()?;
    robust_projection_from_gram(&g, k, budget, params)
}

pub fn robust_projection_from_gram(
    g: &SymmetricMatrix,
    k: usize,
    budget: f64,
    params: &RobustProjectionParams,
) -> Result<RobustProjection> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter("rank must satisfy 1 <= k <= n"));
    }
    let grid = params.r_grid.clone().unwrap_or_else(|| default_r_grid(k));
    if grid.is_empty() {
        return Err(Error::Empty("r grid"));
    }
    if grid.iter().any(|&r| r > k) {
        return Err(Error::InvalidParameter("every grid rank must be <= k"));
    }
    let s = params.sparsity.unwrap_or_else(|| (2 * n).div_ceil(k)).clamp(1, n);
    let (head_all, head_padded) = top_eigenvectors(g, k)?;

    let mut best: Option<RobustProjection> = None;
    let mut best_infeasible: Option<ProjectionMatrix> = None;
    let mut candidates = Vec::with_capacity(grid.len());

    for &r in &grid {
        let head = &head_all[..r];
        let mut vectors: Vec<Vec<f64>> = head.to_vec();
        let mut padded = head_padded && r > 0;
        if r < k {
            // G − Π₁GΠ₁ for the eigenvector head Π₁.
            let mut residual = g.clone();
            for u in head {
                residual.rank_one_update(u, -g.quad_form(u));
            }
            let tail = sparse_pca_projection(&residual, k - r, s, params.seed)?;
            padded |= tail.padded;
            vectors.extend(tail.basis);
        }
        let mut basis = orthonormalize(&vectors);
        if basis.len() < k {
            padded = true;
            fill_complement(&mut basis, n, k);
        }
        let mut candidate = ProjectionMatrix { n, basis, certified_bound: None, reconstruction_error: 0.0, padded };
        candidate.reconstruction_error = reconstruction_error(g, &candidate);
        candidate.certify(&params.certify)?;
        candidates.push(CandidateSummary {
            r,
            rank: candidate.rank(),
            kappa: candidate.certified_bound,
            reconstruction_error: candidate.reconstruction_error,
        });

        let feasible = candidate.reconstruction_error <= budget;
        match candidate.certified_bound {
            Some(kappa) if feasible => {
                if best.as_ref().is_none_or(|b| kappa < b.kappa) {
                    best = Some(RobustProjection { projection: candidate, kappa, r, candidates: Vec::new() });
                }
            }
            _ => {
                if best_infeasible
                    .as_ref()
                    .is_none_or(|b| candidate.reconstruction_error < b.reconstruction_error)
                {
                    best_infeasible = Some(candidate);
                }
            }
        }
    }

    match best {
        Some(mut b) => {
            b.candidates = candidates;
            Ok(b)
        }
        None => Err(Error::NoFeasibleProjection {
            budget,
            best: Box::new(best_infeasible.expect("grid is non-empty")),
        }),
    }
}
