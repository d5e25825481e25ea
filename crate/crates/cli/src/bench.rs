//! Wall-time scaling harness over seeded random instance families.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use opnorm_core::instances::{random_psd, random_symmetric_nonneg_diag, seeded_rng};
use opnorm_core::{certify_sdp, CertifyParams, SymmetricMatrix};
use rayon::prelude::*;

use crate::oracle::parallel_qp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    /// `AAᵀ` with standard-normal `A`, trace-normalized.
    Psd,
    /// Standard-normal symmetric with absolute-value diagonal.
    Qp,
}

impl Family {
    pub fn generate(self, n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = seeded_rng(seed);
        match self {
            Family::Psd => random_psd(n, &mut rng),
            Family::Qp => random_symmetric_nonneg_diag(n, &mut rng),
        }
    }
}

/// Parses `a:b:step`, `a:b` (step 1) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let parse = |s: &str| -> Result<usize> { s.trim().parse().with_context(|| format!("bad grid value {s:?}")) };
    let grid: Vec<usize> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (parse(a)?, parse(b)?, 1),
            [a, b, s] => (parse(a)?, parse(b)?, parse(s)?),
            _ => bail!("grid must be a:b or a:b:step"),
        };
        if step == 0 || a > b {
            bail!("grid needs a <= b and a positive step");
        }
        (a..=b).step_by(step).collect()
    } else {
        spec.split(',').map(parse).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        bail!("grid must contain positive sizes");
    }
    Ok(grid)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub family: Family,
    pub grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub certify: CertifyParams,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub trial: usize,
    pub wall_ms: f64,
    pub bound: f64,
    pub iterations: usize,
    /// `(bound − ⟨M, X⟩/max X_ii) / bound`, an upper bound on the relative
    /// distance of `bound` from the SDP optimum.
    pub gap: f64,
    pub verified: bool,
    pub oracle: Option<f64>,
}

impl BenchRow {
    pub fn ratio(&self) -> Option<f64> {
        self.oracle.map(|q| self.bound / q)
    }
}

pub fn run_one(family: Family, n: usize, trial: usize, cfg: &BenchConfig) -> Result<BenchRow> {
    let seed = cfg.seed + trial as u64;
    let m = family.generate(n, seed);
    let params = CertifyParams { seed, ..cfg.certify };
    let start = Instant::now();
    let out = certify_sdp(&m, &params)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let bound = out.certificate.bound;
    let gap = ((bound - out.primal.feasible_value()) / bound).max(0.0);
    let oracle = if cfg.oracle { Some(parallel_qp(&m)?.value) } else { None };
    log::info!("n={n} trial={trial} wall_ms={wall_ms:.1} bound={bound:.6} iters={}", out.certificate.iterations_used);
    Ok(BenchRow {
        n,
        trial,
        wall_ms,
        bound,
        iterations: out.certificate.iterations_used,
        gap,
        verified: out.certificate.verification.is_verified(),
        oracle,
    })
}

/// Trials of one size run in parallel; sizes run in grid order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(cfg.grid.len() * cfg.trials);
    for &n in &cfg.grid {
        let batch: Vec<BenchRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_one(cfg.family, n, t, cfg))
            .collect::<Result<_>>()?;
        rows.extend(batch);
    }
    Ok(rows)
}

pub fn format_bench_csv(rows: &[BenchRow], oracle: bool) -> String {
    let mut out = String::from("n,wall_ms,bound,iterations,gap,trial,verified");
    if oracle {
        out.push_str(",oracle,ratio");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{:.3},{},{},{},{},{}",
            r.n,
            r.wall_ms,
            r.bound,
            r.iterations,
            r.gap,
            r.trial,
            u8::from(r.verified)
        );
        if oracle {
            let q = r.oracle.map_or(String::new(), |q| q.to_string());
            let ratio = r.ratio().map_or(String::new(), |x| x.to_string());
            let _ = write!(out, ",{q},{ratio}");
        }
        out.push('\n');
    }
    out
}

/// Median wall time per grid size.
pub fn median_wall_ms(rows: &[BenchRow]) -> Vec<(usize, f64)> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let mut t: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.wall_ms).collect();
            t.sort_by(f64::total_cmp);
            let mid = t.len() / 2;
            let med = if t.len() % 2 == 1 { t[mid] } else { 0.5 * (t[mid - 1] + t[mid]) };
            (n, med)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("500:1500:250").unwrap(), vec![500, 750, 1000, 1250, 1500]);
        assert_eq!(parse_grid("8:10").unwrap(), vec![8, 9, 10]);
        assert_eq!(parse_grid("4,9").unwrap(), vec![4, 9]);
        for bad in ["", "5:1", "1:5:0", "0:3", "a:b", "1:2:3:4"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn small_bench_with_oracle() {
        let cfg = BenchConfig {
            family: Family::Qp,
            grid: vec![6, 8],
            trials: 2,
            seed: 3,
            certify: CertifyParams::default(),
            oracle: true,
        };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert!(r.verified);
            assert!(r.ratio().unwrap() >= 1.0);
            assert!((0.0..1.0).contains(&r.gap));
        }
        let csv = format_bench_csv(&rows, true);
        assert!(csv.starts_with("n,wall_ms,bound,iterations,gap,trial,verified,oracle,ratio\n"));
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(median_wall_ms(&rows).len(), 2);
    }
}
