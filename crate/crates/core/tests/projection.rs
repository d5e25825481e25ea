mod common;

use common::{jacobi_eigen, naive_qp, subspace_sine};
use opnorm_core::instances::{planted_sparse, random_orthonormal, seeded_rng};
use opnorm_core::projection::{pca_from_gram, robust_projection_from_gram};
use opnorm_core::{
    pca_projection, reconstruction_error, robust_projection, sparse_pca_projection, CertifyParams, DataMatrix,
    DenseMatrix, Error, ProjectionMatrix, RobustProjectionParams, SymmetricMatrix,
};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian_data(m: usize, n: usize, seed: u64) -> DataMatrix {
    let mut rng = seeded_rng(seed);
    DataMatrix::new(DenseMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal))).unwrap()
}

fn e(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

#[test]
fn pca_matches_jacobi_subspace() {
    let a = gaussian_data(100, 20, 5);
    let g = a.normalized_gram().unwrap();
    let p = pca_projection(&a, 5).unwrap();
    assert!(p.orthonormality_defect() < 1e-12);
    let (vals, vecs) = jacobi_eigen(&g);
    let top: Vec<Vec<f64>> = vecs[15..].to_vec();
    assert!(subspace_sine(p.basis(), &top) < 1e-8);
    let tail: f64 = vals[..15].iter().sum();
    assert!((p.reconstruction_error - tail).abs() < 1e-10);
    assert!((g.trace() - 1.0).abs() < 1e-12);
}

#[test]
fn sparse_pca_on_a_diagonal() {
    let g = SymmetricMatrix::from_diagonal(&[3.0, 2.0, 1.0, 0.0]);
    let p = sparse_pca_projection(&g, 2, 1, 0).unwrap();
    let mut hits: Vec<usize> = p.supports(1e-9).into_iter().flatten().collect();
    hits.sort_unstable();
    assert_eq!(hits, vec![0, 1]);
    assert!((p.reconstruction_error - 1.0).abs() < 1e-9);
    assert!(!p.padded);
}

#[test]
fn sparse_pca_recovers_planted_supports() {
    let inst = planted_sparse(40, 2, 4, 0.0, &mut seeded_rng(9));
    let g = inst.data.normalized_gram().unwrap();
    let p = sparse_pca_projection(&g, 2, 4, 1).unwrap();
    let mut found = p.supports(1e-6);
    found.iter_mut().for_each(|s| s.sort_unstable());
    for s in &inst.supports {
        assert!(found.contains(s), "{s:?} not in {found:?}");
    }
    assert!(subspace_sine(p.basis(), &inst.components) < 1e-6);
}

#[test]
fn dense_sparse_pca_approaches_pca() {
    let a = gaussian_data(60, 12, 11);
    let g = a.normalized_gram().unwrap();
    for k in [1usize, 3, 5] {
        let pca = pca_from_gram(&g, k).unwrap().captured_variance(&g);
        let sp = sparse_pca_projection(&g, k, 12, 2).unwrap().captured_variance(&g);
        assert!(sp >= 0.99 * pca, "k={k}: {sp} vs {pca}");
        assert!(sp <= pca + 1e-12);
    }
}

#[test]
fn coordinate_subspace_is_certified_tightly() {
    let delta = 0.1;
    let mut g = SymmetricMatrix::zeros(6);
    g.set(0, 0, 0.6);
    g.set(1, 1, 0.4);
    let params = RobustProjectionParams { certify: CertifyParams::with_delta(delta), ..Default::default() };
    let out = robust_projection_from_gram(&g, 2, 1e-9, &params).unwrap();
    assert!(out.kappa >= 2f64.sqrt() * (1.0 - 1e-12));
    assert!(out.kappa <= 2f64.sqrt() * (1.0 + delta), "{}", out.kappa);
    assert!(out.projection.reconstruction_error <= 1e-9);
    assert!(!out.candidates.is_empty());
}

#[test]
fn reconstruction_error_identities() {
    let a = gaussian_data(30, 8, 2);
    let g = a.normalized_gram().unwrap();
    let full = ProjectionMatrix::from_orthonormal(8, (0..8).map(|i| e(8, i)).collect(), 1e-12).unwrap();
    assert!(reconstruction_error(&g, &full) < 1e-12);
    let empty = ProjectionMatrix::from_orthonormal(8, Vec::new(), 1e-12).unwrap();
    assert!((reconstruction_error(&g, &empty) - 1.0).abs() < 1e-12);
    // ⟨G, I − Π⟩ = tr G − Σ bᵢᵀ G bᵢ, computed through the dense product.
    let q = random_orthonormal(8, 3, &mut seeded_rng(4));
    let p = ProjectionMatrix::from_orthonormal(8, q, 1e-10).unwrap();
    let pm = p.matrix();
    let direct = g.trace() - g.inner(&pm);
    assert!((reconstruction_error(&g, &p) - direct).abs() < 1e-12);
}

#[test]
fn budget_failure_returns_best_candidate() {
    let a = gaussian_data(40, 10, 3);
    match robust_projection(&a, 1, 1e-6, &RobustProjectionParams::default()) {
        Err(Error::NoFeasibleProjection { best, budget }) => {
            assert_eq!(budget, 1e-6);
            assert_eq!(best.rank(), 1);
            assert!(best.reconstruction_error > 1e-6);
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn robust_projection_beats_pca_on_rotated_sparse_data() {
    let inst = planted_sparse(30, 2, 3, 0.002, &mut seeded_rng(17));
    let params = RobustProjectionParams::default();
    let ours = robust_projection(&inst.data, 2, 0.05, &params).unwrap();
    let mut pca = pca_projection(&inst.data, 2).unwrap();
    pca.certify(&params.certify).unwrap();
    assert!(ours.kappa < pca.certified_bound.unwrap());
    assert!(ours.projection.reconstruction_error <= 0.05);
    assert!(ours.projection.orthonormality_defect() < 1e-10);
    let p = ours.projection.matrix();
    let mut rng = seeded_rng(1);
    for _ in 0..2000 {
        let x: Vec<f64> = (0..30).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        assert!(ours.kappa * ours.kappa >= p.quad_form(&x) * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_norm_sandwiches(seed in 0u64..100_000, n in 2usize..11, r_frac in 0.0f64..1.0) {
        let r = 1 + ((n - 1) as f64 * r_frac) as usize;
        let q = random_orthonormal(n, r, &mut seeded_rng(seed));
        let mut p = ProjectionMatrix::from_orthonormal(n, q, 1e-10).unwrap();
        let pm = p.matrix();
        let exact = naive_qp(&pm);
        let l1 = pm.entrywise_l1();
        prop_assert!(exact >= l1 / r as f64 * (1.0 - 1e-9));
        prop_assert!(exact <= l1 * (1.0 + 1e-9));
        prop_assert!(exact >= r as f64 * (1.0 - 1e-9) && exact <= n as f64 * (1.0 + 1e-9));
        p.certify(&CertifyParams::default()).unwrap();
        let kappa = p.certified_bound.unwrap();
        prop_assert!(kappa * kappa >= exact * (1.0 - 1e-12));
    }

    #[test]
    fn projections_are_idempotent(seed in 0u64..100_000, n in 2usize..16, r in 1usize..5) {
        let r = r.min(n);
        let q = random_orthonormal(n, r, &mut seeded_rng(seed));
        let p = ProjectionMatrix::from_orthonormal(n, q, 1e-10).unwrap();
        let mut rng = seeded_rng(seed ^ 0xabc);
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let px = p.apply(&x);
        let ppx = p.apply(&px);
        for (a, b) in px.iter().zip(&ppx) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn nested_subspaces_have_monotone_norm(seed in 0u64..100_000, n in 3usize..10) {
        let q = random_orthonormal(n, n - 1, &mut seeded_rng(seed));
        let mut prev = 0.0;
        for r in 1..n {
            let p = ProjectionMatrix::from_orthonormal(n, q[..r].to_vec(), 1e-10).unwrap();
            let v = naive_qp(&p.matrix());
            prop_assert!(v >= prev * (1.0 - 1e-12));
            prev = v;
        }
    }
}
