//! Radius and accuracy arithmetic for certified robustness.
//!
//! A smoothed classifier with top-class probability `p_A` and runner-up `p_B`
//! under `N(0, σ²I)` noise is constant on an ℓ2 ball of radius
//! `(σ/2)(Φ⁻¹(p_A) − Φ⁻¹(p_B))`. If the classifier only sees `Πx` and
//! `‖Π‖_{∞→2} ≤ κ`, any ℓ∞ perturbation of size `ε` moves `Πx` by at most `κε`
//! in ℓ2, so the ℓ∞ radius is at least `r₂ / κ`. Orthogonal changes of basis
//! (e.g. DCT) preserve ℓ2 distances, so the same bound holds in the rotated
//! representation.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::projection::ProjectionMatrix;

/// Probabilities are clamped into `[PROB_CLAMP, 1 − PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-12;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Halley step against `erfc`.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -normal_quantile(1.0 - p);
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * libm::sqrt(2.0 * PI) * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingEstimate {
    sigma: f64,
    p_a: f64,
    p_b: f64,
}

impl SmoothingEstimate {
    pub fn new(sigma: f64, p_a: f64, p_b: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter("sigma must be positive"));
        }
        if !(0.0..=1.0).contains(&p_a) || !(0.0..=1.0).contains(&p_b) {
            return Err(Error::InvalidParameter("probabilities must lie in [0, 1]"));
        }
        if p_a < p_b {
            return Err(Error::ProbabilityOrder { p_a, p_b });
        }
        if p_a + p_b > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter("p_a + p_b must not exceed 1"));
        }
        Ok(Self { sigma, p_a, p_b })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p_a(&self) -> f64 {
        self.p_a
    }

    pub fn p_b(&self) -> f64 {
        self.p_b
    }

    /// Either probability sits outside `[PROB_CLAMP, 1 − PROB_CLAMP]`.
    pub fn is_clamped(&self) -> bool {
        let out = |p: f64| !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p);
        out(self.p_a) || out(self.p_b)
    }
}

/// `(σ/2)(Φ⁻¹(p_A) − Φ⁻¹(p_B))` with probabilities clamped away from 0 and 1.
pub fn certified_radius(est: &SmoothingEstimate) -> f64 {
    let clamp = |p: f64| p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    0.5 * est.sigma * (normal_quantile(clamp(est.p_a)) - normal_quantile(clamp(est.p_b)))
}

/// ℓ∞ radius `r₂ / κ` implied by a certified `‖Π‖_{∞→2} ≤ κ`.
pub fn translate_radius(l2_radius: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter("kappa must be positive"));
    }
    if !(l2_radius >= 0.0) {
        return Err(Error::InvalidParameter("radius must be non-negative"));
    }
    Ok(l2_radius / kappa)
}

/// Noise scale `λ · σ_base · √(n/r)` for smoothing inside a rank-`r` subspace.
pub fn noise_sigma(lambda: f64, n: usize, r: usize, sigma_base: f64) -> Result<f64> {
    if r == 0 || r > n {
        return Err(Error::InvalidParameter("rank must satisfy 1 <= r <= n"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter("lambda must lie in [0, 1]"));
    }
    if !(sigma_base > 0.0) {
        return Err(Error::InvalidParameter("sigma_base must be positive"));
    }
    Ok(lambda * sigma_base * libm::sqrt(n as f64 / r as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessRecord {
    pub correct: bool,
    pub l2_radius: f64,
}

impl RobustnessRecord {
    pub fn new(correct: bool, l2_radius: f64) -> Result<Self> {
        if !(l2_radius >= 0.0) {
            return Err(Error::InvalidParameter("radius must be non-negative"));
        }
        Ok(Self { correct, l2_radius })
    }

    /// Abstentions count as incorrect with radius zero.
    pub fn abstain() -> Self {
        Self { correct: false, l2_radius: 0.0 }
    }
}

/// Fraction of records that are correct with radius at least `epsilon`.
pub fn certified_accuracy(records: &[RobustnessRecord], epsilon: f64) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Empty("no robustness records"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter("epsilon must be non-negative"));
    }
    let hits = records.iter().filter(|r| r.correct && r.l2_radius >= epsilon).count();
    Ok(hits as f64 / records.len() as f64)
}

/// ℓ∞ accuracy curve `(ε/κ, acc_ε)` from ℓ2 records.
pub fn accuracy_curve_translate(
    records: &[RobustnessRecord],
    kappa: f64,
    epsilons: &[f64],
) -> Result<Vec<(f64, f64)>> {
    epsilons
        .iter()
        .map(|&eps| Ok((translate_radius(eps, kappa)?, certified_accuracy(records, eps)?)))
        .collect()
}

/// `count` draws of `Πδ` with `δ ~ N(0, σ²I)`; their covariance is `σ²Π`.
pub fn subspace_noise_sample(
    projection: &ProjectionMatrix,
    sigma: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter("sigma must be positive"));
    }
    let mut rng = crate::rng_from_seed(seed);
    let n = projection.n();
    let mut out = Vec::with_capacity(count);
    let mut delta = alloc::vec![0.0; n];
    for _ in 0..count {
        for d in delta.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *d = sigma * z;
        }
        out.push(projection.apply(&delta));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn quantile_symmetry_and_center() {
        assert_eq!(normal_quantile(0.5), 0.0);
        for &p in &[1e-4, 0.01, 0.2, 0.4] {
            assert!((normal_quantile(p) + normal_quantile(1.0 - p)).abs() < 1e-9);
        }
        assert!(normal_quantile(-0.1).is_nan());
    }

    #[test]
    fn radius_examples() {
        let est = SmoothingEstimate::new(1.0, 0.5, 0.5).unwrap();
        assert_eq!(certified_radius(&est), 0.0);
        let est = SmoothingEstimate::new(1.0, normal_cdf(1.0), normal_cdf(-1.0)).unwrap();
        assert!((certified_radius(&est) - 1.0).abs() < 1e-6);
        let est2 = SmoothingEstimate::new(2.0, normal_cdf(1.0), normal_cdf(-1.0)).unwrap();
        assert!((certified_radius(&est2) - 2.0 * certified_radius(&est)).abs() < 1e-12);
    }

    #[test]
    fn estimate_validation() {
        assert!(matches!(
            SmoothingEstimate::new(1.0, 0.2, 0.3),
            Err(Error::ProbabilityOrder { .. })
        ));
        assert!(SmoothingEstimate::new(0.0, 0.6, 0.1).is_err());
        assert!(SmoothingEstimate::new(1.0, 0.8, 0.3).is_err());
        let edge = SmoothingEstimate::new(1.0, 1.0, 0.0).unwrap();
        assert!(edge.is_clamped());
        assert!(certified_radius(&edge).is_finite());
    }

    #[test]
    fn translation_examples() {
        assert!((translate_radius(1.0, 32.0).unwrap() - 0.03125).abs() < 1e-15);
        assert_eq!(translate_radius(0.0, 7.0).unwrap(), 0.0);
        assert!((translate_radius(1.0, 30.22).unwrap() - 0.033091).abs() < 1e-6);
        assert!(translate_radius(1.0, 0.0).is_err());
    }

    #[test]
    fn noise_sigma_examples() {
        let s = noise_sigma(0.5, 1024, 200, 0.5).unwrap();
        assert!((s - 0.565685).abs() < 1e-6);
        assert_eq!(noise_sigma(1.0, 10, 10, 0.25).unwrap(), 0.25);
        assert_eq!(noise_sigma(0.0, 10, 3, 0.25).unwrap(), 0.0);
        assert!(noise_sigma(0.5, 10, 0, 0.25).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let all = vec![RobustnessRecord::new(true, 1.0).unwrap(); 4];
        assert_eq!(certified_accuracy(&all, 0.5).unwrap(), 1.0);
        let mut half = vec![RobustnessRecord::new(true, 1.0).unwrap(); 2];
        half.extend(vec![RobustnessRecord::abstain(); 2]);
        assert_eq!(certified_accuracy(&half, 0.0).unwrap(), 0.5);
        assert!(certified_accuracy(&[], 0.0).is_err());

        let one = [RobustnessRecord::new(true, 1.0).unwrap()];
        let curve = accuracy_curve_translate(&one, 2.0, &[0.5, 1.0, 1.5]).unwrap();
        assert_eq!(curve, vec![(0.25, 1.0), (0.5, 1.0), (0.75, 0.0)]);
    }
}
