//! Certified bounds on the ∞→1 and ∞→2 operator norms of dense matrices.
//!
//! The centerpiece is [`certify::certify_sdp`], a multiplicative-weights solver
//! for the semidefinite relaxation of `max_{‖x‖∞≤1} xᵀMx`. Every iterate yields a
//! dual vector `y` with `diag(y) ⪰ M`, so `Σ yᵢ` is an upper bound on the
//! quadratic program no matter when the loop stops. The solver also returns a
//! primal candidate `X` whose objective equals the running dual average.
//!
//! Around it sit the pieces needed to use such bounds for robustness:
//!
//! * [`matrix`] / [`eigen`]: dense symmetric storage, Lanczos and dense
//!   eigensolvers, and the orthonormal DCT-II basis.
//! * [`oracle`]: exact Gray-code enumeration of the quadratic program for
//!   small `n`, used as ground truth.
//! * [`projection`]: PCA and truncated-power sparse PCA searches for low-rank
//!   projections with small certified ∞→2 norm.
//! * [`robustness`]: smoothing radii, ℓ2→ℓ∞ radius translation and
//!   certified-accuracy curves.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line front-end live in the companion `opnorm-cli` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod certify;
pub mod eigen;
mod error;
pub mod instances;
pub mod matrix;
pub mod oracle;
pub mod projection;
pub mod robustness;

pub use certify::{
    certify_sdp, dual_bound, infty_to_2_bound, verify_certificate, Certificate, CertifyOutcome,
    CertifyParams, IterationRecord, PrimalCandidate, StopReason, Verification,
};
pub use eigen::{max_eigenpair, min_eigenvalue, EigenOptions, EigenPair};
pub use error::{Error, Result};
pub use matrix::{dct_basis, scaled_matrix, DenseMatrix, OrthogonalBasis, SymmetricMatrix};
pub use oracle::{brute_force_qp, infty_to_1_exact, QpSolution};
pub use projection::{
    pca_projection, reconstruction_error, robust_projection, sparse_pca_projection, DataMatrix,
    ProjectionMatrix, RobustProjection, RobustProjectionParams,
};
pub use robustness::{
    accuracy_curve_translate, certified_accuracy, certified_radius, noise_sigma,
    subspace_noise_sample, translate_radius, RobustnessRecord, SmoothingEstimate,
};

pub(crate) fn rng_from_seed(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
