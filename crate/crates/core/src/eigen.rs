//! Symmetric eigensolvers.
//!
//! Small matrices (`n <= dense_threshold`) go through a full dense
//! decomposition: Householder reduction to tridiagonal form followed by the
//! implicit QL iteration. Larger ones use restarted Lanczos with full
//! reorthogonalization, which only touches the matrix through matvecs and can
//! be warm-started from a previous eigenvector.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, SymmetricMatrix};

/// Anything that can apply a symmetric linear map.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

impl LinearOperator for SymmetricMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.matvec_into(x, out);
    }
}

/// `D^{-1/2} M D^{-1/2}` applied without forming it.
pub struct ScaledOperator<'a> {
    pub matrix: &'a SymmetricMatrix,
    pub inv_sqrt_weights: &'a [f64],
}

impl LinearOperator for ScaledOperator<'_> {
    fn dim(&self) -> usize {
        self.matrix.n()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let z: Vec<f64> = x.iter().zip(self.inv_sqrt_weights).map(|(a, b)| a * b).collect();
        self.matrix.matvec_into(&z, out);
        for (o, s) in out.iter_mut().zip(self.inv_sqrt_weights) {
            *o *= s;
        }
    }
}

struct Negated<'a, O: LinearOperator>(&'a O);

impl<O: LinearOperator> LinearOperator for Negated<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.0.apply(x, out);
        for o in out.iter_mut() {
            *o = -*o;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit ℓ2 norm.
    pub vector: Vec<f64>,
    /// `‖Sv − value·v‖₂`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative residual target: `residual <= tol * max(1, |value|)`.
    pub tol: f64,
    pub max_matvecs: usize,
    /// Seed of the uniform random Lanczos starting vector.
    pub seed: u64,
    /// Matrices up to this size are decomposed densely.
    pub dense_threshold: usize,
    /// Lanczos basis size before a restart.
    pub krylov_dim: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_matvecs: 20_000, seed: 0, dense_threshold: 64, krylov_dim: 48 }
    }
}

/// Full eigendecomposition. `values` ascend; column `j` of `vectors` pairs with `values[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    n: usize,
    pub values: Vec<f64>,
    vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|k| self.vectors[k * self.n + j]).collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Dense decomposition of a symmetric matrix.
pub fn symmetric_eigen(m: &SymmetricMatrix) -> Result<SymmetricEigen> {
    let n = m.n();
    if n == 0 {
        return Ok(SymmetricEigen { n, values: Vec::new(), vectors: Vec::new() });
    }
    let mut v = m.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    implicit_ql(n, &mut v, &mut d, &mut e)?;
    Ok(sorted(n, d, v))
}

/// Decomposition of the symmetric tridiagonal matrix with diagonal `diag`
/// and sub-diagonal `sub` (`sub.len() + 1 == diag.len()`).
pub fn tridiagonal_eigen(diag: &[f64], sub: &[f64]) -> Result<SymmetricEigen> {
    let n = diag.len();
    debug_assert_eq!(sub.len() + 1, n.max(1));
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d = diag.to_vec();
    // implicit_ql expects e[i] to couple rows i-1 and i.
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&sub[..(n - 1)]);
    implicit_ql(n, &mut v, &mut d, &mut e)?;
    Ok(sorted(n, d, v))
}

fn sorted(n: usize, d: Vec<f64>, v: Vec<f64>) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&j| d[j]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + dst] = v[k * n + src];
        }
    }
    SymmetricEigen { n, values, vectors }
}

/// Householder reduction of the row-major symmetric `v` to tridiagonal form.
/// On return `v` holds the orthogonal transform, `d` the diagonal and `e` the
/// sub-diagonal (with `e[0] = 0`).
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on a tridiagonal matrix, accumulating rotations into `v`.
fn implicit_ql(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    if n > 0 {
        e[n - 1] = 0.0;
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let max_sweeps = 60 * n.max(1);
    let mut sweeps = 0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            // Only reachable with NaN input.
            return Err(Error::InvalidParameter("non-finite entries in eigenproblem"));
        }
        if m > l {
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::InvalidParameter("QL iteration failed to converge"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[at(k, i + 1)];
                        v[at(k, i + 1)] = s * v[at(k, i)] + c * h;
                        v[at(k, i)] = c * v[at(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Algebraically largest eigenpair of `s`.
pub fn max_eigenpair(s: &SymmetricMatrix, opts: &EigenOptions) -> Result<EigenPair> {
    check_tol(opts.tol)?;
    if s.n() == 0 {
        return Err(Error::InvalidDimension("empty matrix"));
    }
    if s.n() <= opts.dense_threshold {
        dense_max_eigenpair(s)
    } else {
        lanczos_max(s, opts, None, None)
    }
}

/// Algebraically smallest eigenvalue, accurate to about `tol · ‖S‖_F`.
pub fn min_eigenvalue(s: &SymmetricMatrix, tol: f64) -> Result<f64> {
    let opts = EigenOptions { tol, ..EigenOptions::default() };
    min_eigenvalue_with(s, &opts)
}

pub fn min_eigenvalue_with(s: &SymmetricMatrix, opts: &EigenOptions) -> Result<f64> {
    check_tol(opts.tol)?;
    let n = s.n();
    if n == 0 {
        return Err(Error::InvalidDimension("empty matrix"));
    }
    if n <= opts.dense_threshold {
        return Ok(symmetric_eigen(s)?.values[0]);
    }
    let abs_tol = opts.tol * s.frobenius_norm().max(f64::MIN_POSITIVE);
    match lanczos_max(&Negated(s), opts, None, Some(abs_tol)) {
        Ok(pair) => Ok(-pair.value),
        Err(Error::EigenNotConverged { mut best, matvecs }) => {
            best.value = -best.value;
            Err(Error::EigenNotConverged { best, matvecs })
        }
        Err(e) => Err(e),
    }
}

/// Largest eigenpair of an operator. Dense decomposition is not available here,
/// so this always runs Lanczos; `start` warm-starts it.
pub fn max_eigenpair_op<O: LinearOperator>(
    op: &O,
    opts: &EigenOptions,
    start: Option<&[f64]>,
) -> Result<EigenPair> {
    check_tol(opts.tol)?;
    if op.dim() == 0 {
        return Err(Error::InvalidDimension("empty operator"));
    }
    lanczos_max(op, opts, start, None)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("eigen tolerance must be positive"))
    }
}

pub(crate) fn dense_max_eigenpair(s: &SymmetricMatrix) -> Result<EigenPair> {
    let eig = symmetric_eigen(s)?;
    let top = eig.dim() - 1;
    let mut vector = eig.vector(top);
    normalize(&mut vector);
    fix_sign(&mut vector);
    let (value, residual) = rayleigh(s, &vector);
    Ok(EigenPair { value, vector, residual })
}

/// Rayleigh quotient and residual of a unit vector.
fn rayleigh<O: LinearOperator>(op: &O, v: &[f64]) -> (f64, f64) {
    let mut av = vec![0.0; v.len()];
    op.apply(v, &mut av);
    let value = dot(v, &av);
    axpy(-value, v, &mut av);
    (value, norm2(&av))
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = norm2(v);
    if nrm > 0.0 {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

/// Makes the largest-magnitude component positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if normalize(&mut v) > 1e-8 {
            return v;
        }
    }
}

/// Orthogonalizes `w` against `basis` (two classical Gram-Schmidt passes).
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

const WARM_START_NOISE: f64 = 1e-2;

fn lanczos_max<O: LinearOperator>(
    op: &O,
    opts: &EigenOptions,
    start: Option<&[f64]>,
    abs_tol: Option<f64>,
) -> Result<EigenPair> {
    let n = op.dim();
    let target = |value: f64| abs_tol.unwrap_or(opts.tol * value.abs().max(1.0));
    let mut rng = crate::rng_from_seed(opts.seed);

    if n == 1 {
        let mut out = [0.0];
        op.apply(&[1.0], &mut out);
        return Ok(EigenPair { value: out[0], vector: vec![1.0], residual: 0.0 });
    }

    let mut q0 = match start {
        Some(s) if s.len() == n => {
            let mut v = s.to_vec();
            if normalize(&mut v) > 1e-12 && v.iter().all(|x| x.is_finite()) {
                // A little noise keeps every eigendirection present in the
                // Krylov space, so a nearby larger eigenvalue is not missed.
                let noise = random_unit(n, &mut rng);
                axpy(WARM_START_NOISE, &noise, &mut v);
                normalize(&mut v);
                v
            } else {
                random_unit(n, &mut rng)
            }
        }
        _ => random_unit(n, &mut rng),
    };

    let k_max = opts.krylov_dim.clamp(2, n);
    // After a breakdown the fresh block needs a few steps before its Ritz
    // values can be trusted to dominate the old block.
    let min_steps = n.min(6);
    let mut matvecs = 0usize;
    let mut best: Option<EigenPair> = None;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k_max);
    let mut alphas: Vec<f64> = Vec::with_capacity(k_max);
    let mut betas: Vec<f64> = Vec::with_capacity(k_max);
    let mut w = vec![0.0; n];

    loop {
        basis.clear();
        alphas.clear();
        betas.clear();
        basis.push(q0.clone());
        let mut steps_in_block = 0usize;
        let mut ritz: Option<Vec<f64>> = None;

        for j in 0..k_max {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            steps_in_block += 1;
            let alpha = dot(&basis[j], &w);
            alphas.push(alpha);
            reorthogonalize(&basis, &mut w);
            let beta = norm2(&w);

            let tri = tridiagonal_eigen(&alphas, &betas)?;
            let top = tri.dim() - 1;
            let theta = tri.values[top];
            let s = tri.vector(top);
            let scale = tri.values[0].abs().max(theta.abs()).max(f64::MIN_POSITIVE);
            let breakdown = beta <= 1e-13 * scale;
            let est = beta * s[j].abs();
            let full = basis.len() == n;

            let settled = steps_in_block >= min_steps || full;
            let done = (settled && (est <= 0.5 * target(theta) || (breakdown && full)))
                || j + 1 == k_max
                || matvecs >= opts.max_matvecs;
            if done {
                let mut y = vec![0.0; n];
                for (coef, q) in s.iter().zip(&basis) {
                    axpy(*coef, q, &mut y);
                }
                normalize(&mut y);
                ritz = Some(y);
                break;
            }

            if breakdown {
                // Invariant subspace: continue in a fresh orthogonal direction.
                let mut fresh = random_unit(n, &mut rng);
                reorthogonalize(&basis, &mut fresh);
                if normalize(&mut fresh) < 1e-10 {
                    break;
                }
                basis.push(fresh);
                betas.push(0.0);
                steps_in_block = 0;
            } else {
                for x in w.iter_mut() {
                    *x /= beta;
                }
                basis.push(w.clone());
                betas.push(beta);
            }
        }

        let mut y = ritz.unwrap_or_else(|| q0.clone());
        fix_sign(&mut y);
        let (value, residual) = rayleigh(op, &y);
        matvecs += 1;
        let pair = EigenPair { value, vector: y, residual };
        if residual <= target(value) {
            return Ok(pair);
        }
        q0 = pair.vector.clone();
        if best.as_ref().is_none_or(|b| pair.value >= b.value) {
            best = Some(pair);
        }
        if matvecs >= opts.max_matvecs {
            let best = best.expect("at least one restart");
            return Err(Error::EigenNotConverged { best: Box::new(best), matvecs });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dense_opts() -> EigenOptions {
        EigenOptions::default()
    }

    fn lanczos_opts() -> EigenOptions {
        EigenOptions { dense_threshold: 0, tol: 1e-10, ..EigenOptions::default() }
    }

    #[test]
    fn identity_top_is_one() {
        for opts in [dense_opts(), lanczos_opts()] {
            let p = max_eigenpair(&SymmetricMatrix::identity(3), &opts).unwrap();
            assert!((p.value - 1.0).abs() < 1e-12);
            assert!((norm2(&p.vector) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_top_is_last_coordinate() {
        let m = SymmetricMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        for opts in [dense_opts(), lanczos_opts()] {
            let p = max_eigenpair(&m, &opts).unwrap();
            assert!((p.value - 3.0).abs() < 1e-10, "{}", p.value);
            assert!((p.vector[2].abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn single_entry_is_exact() {
        let m = SymmetricMatrix::from_diagonal(&[-2.5]);
        assert_eq!(max_eigenpair(&m, &lanczos_opts()).unwrap().value, -2.5);
        assert_eq!(max_eigenpair(&m, &dense_opts()).unwrap().value, -2.5);
        assert_eq!(min_eigenvalue(&m, 1e-9).unwrap(), -2.5);
    }

    #[test]
    fn min_of_swap_matrix() {
        let m = SymmetricMatrix::from_row_major(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((min_eigenvalue(&m, 1e-10).unwrap() + 1.0).abs() < 1e-12);
        assert!((min_eigenvalue(&SymmetricMatrix::identity(4), 1e-10).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_matches_known_spectrum() {
        // Path graph Laplacian-like matrix: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 7;
        let eig = tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, v) in eig.values.iter().enumerate() {
            let expect = 2.0 - 2.0 * libm::cos((k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn lanczos_handles_repeated_top() {
        // J_n has an invariant start direction when warm-started at 1/√n.
        let n = 80;
        let j = SymmetricMatrix::ones(n);
        let start = vec![1.0; n];
        let p = max_eigenpair_op(&j, &lanczos_opts(), Some(&start)).unwrap();
        assert!((p.value - n as f64).abs() < 1e-8);
        // Starting orthogonal to the top eigenvector must still find it.
        let mut alt = vec![0.0; n];
        alt[0] = 1.0;
        alt[1] = -1.0;
        let p = max_eigenpair_op(&j, &lanczos_opts(), Some(&alt)).unwrap();
        assert!((p.value - n as f64).abs() < 1e-8, "{}", p.value);
    }

    #[test]
    fn non_convergence_reports_best_iterate() {
        let n = 100;
        let m = SymmetricMatrix::from_fn(n, |i, j| if i == j { i as f64 / n as f64 } else { 0.0 });
        let opts = EigenOptions { max_matvecs: 3, tol: 1e-14, dense_threshold: 0, ..EigenOptions::default() };
        match max_eigenpair(&m, &opts) {
            Err(Error::EigenNotConverged { best, matvecs }) => {
                assert!(matvecs >= 3);
                assert!(best.residual > 0.0);
                assert!(best.value <= 1.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let m = SymmetricMatrix::identity(2);
        let opts = EigenOptions { tol: 0.0, ..EigenOptions::default() };
        assert!(max_eigenpair(&m, &opts).is_err());
    }
}
