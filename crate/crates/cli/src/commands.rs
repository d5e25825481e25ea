//! Subcommand definitions and their implementations.
//!
//! Exit codes: 0 success (certificate verified), 2 I/O or parse error,
//! 3 failed precondition or unverified certificate, 4 no projection within
//! the reconstruction budget.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use opnorm_core::certify::NormCertificate;
use opnorm_core::instances::{planted_sparse, random_projection, seeded_rng};
use opnorm_core::projection::CandidateSummary;
use opnorm_core::{
    accuracy_curve_translate, certify_sdp, infty_to_2_bound, reconstruction_error, robust_projection,
    CertifyOutcome, CertifyParams, DataMatrix, DenseMatrix, Error, ProjectionMatrix, RobustProjectionParams,
    RobustnessRecord, SymmetricMatrix,
};
use serde::Serialize;

use crate::bench::{format_bench_csv, parse_grid, run_bench, BenchConfig, Family};
use crate::formats::{self, CertificateJson, Mode};
use crate::oracle::parallel_qp;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_IO, error: error.into() }
    }

    pub fn precondition(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_PRECONDITION, error: error.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoFeasibleProjection { .. } => EXIT_INFEASIBLE,
            _ => EXIT_PRECONDITION,
        };
        Self { code, error: e.into() }
    }
}

pub type CmdResult = Result<u8, Failure>;

#[derive(Debug, Parser)]
#[command(name = "opnorm", version, about = "Certified ∞→1 / ∞→2 operator norm bounds and robust projections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify an upper bound on max xᵀMx over the hypercube (or on ‖P‖_{∞→2}).
    Certify(CertifyArgs),
    /// Exact value by hypercube enumeration (n ≤ 24).
    Oracle(OracleArgs),
    /// Search for a low-rank projection with small certified ∞→2 norm.
    Project(ProjectArgs),
    /// Translate ℓ2 robustness records into a certified ℓ∞ accuracy curve.
    Translate(TranslateArgs),
    /// Wall-time scaling benchmark on random instances.
    Bench(BenchArgs),
    /// Write a seeded random instance to disk.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Matrix file (.mtx or dense CSV).
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Width parameter; defaults to n/δ.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Iteration budget; defaults to min(⌈n ln n/δ³⌉, 5000).
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value_t = 1e-7)]
    pub eig_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Inf1)]
    pub mode: Mode,
    /// Stop once the best bound stops improving.
    #[arg(long)]
    pub stall: bool,
    /// Certificate JSON output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Inf1)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synth {
    /// Disjoint sparse components plus small noise.
    Planted,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Data CSV, one sample per row.
    #[arg(required_unless_present = "synth", conflicts_with = "synth")]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub synth: Option<Synth>,
    /// Dimension of the synthetic instance.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Projection rank (per channel).
    #[arg(long, alias = "k", default_value_t = 2)]
    pub rank: usize,
    /// Nonzeros per planted component.
    #[arg(long, default_value_t = 5)]
    pub planted_sparsity: usize,
    /// Noise Gram Frobenius norm relative to the signal trace.
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
    /// Sparse-PCA sparsity; defaults to ⌈2n/k⌉.
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Reconstruction error budget ⟨G, I − Π⟩.
    #[arg(long, default_value_t = 0.05)]
    pub budget: f64,
    /// PCA head ranks to try, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Split the columns into this many equal contiguous channels.
    #[arg(long, default_value_t = 1)]
    pub channels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Basis CSV output path (n × rank, columns orthonormal).
    #[arg(long)]
    pub out_basis: Option<PathBuf>,
    /// Also write the synthetic data matrix.
    #[arg(long)]
    pub save_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// Records CSV: `correct,radius` per line.
    pub records: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Certificate JSON from `certify --mode inf2`.
    #[arg(long, conflicts_with = "kappa")]
    pub cert: Option<PathBuf>,
    /// ℓ2 radii to evaluate; defaults to 0 and every distinct radius.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Family::Psd)]
    pub family: Family,
    /// Sizes as `a:b:step`, `a:b` or `n1,n2,...`.
    #[arg(long, default_value = "500:4500:250")]
    pub grid: String,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disable the stalled-bound early stop.
    #[arg(long)]
    pub no_stall: bool,
    /// Add brute-force values and bound/oracle ratios (n ≤ 24).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenFamily {
    Psd,
    Qp,
    Identity,
    Ones,
    Projection,
    /// Planted sparse data matrix (CSV).
    Planted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Mtx,
    Csv,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: GenFamily,
    #[arg(long)]
    pub n: usize,
    /// Rank of `projection`, number of components of `planted`.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, default_value_t = 5)]
    pub planted_sparsity: usize,
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Mtx)]
    pub format: MatrixFormat,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Certify(a) => cmd_certify(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Project(a) => cmd_project(&a),
        Command::Translate(a) => cmd_translate(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Generate(a) => cmd_generate(&a),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => formats::write_string(p, text).map_err(Failure::io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_certify(a: &CertifyArgs) -> CmdResult {
    let params = CertifyParams {
        delta: a.delta,
        rho: a.rho,
        max_iters: a.max_iters,
        eig_tol: a.eig_tol,
        seed: a.seed,
        stall_stop: a.stall,
        ..CertifyParams::default()
    };
    let start = Instant::now();
    let (outcome, kappa): (CertifyOutcome, Option<f64>) = match a.mode {
        Mode::Inf1 => {
            let m = formats::read_symmetric(&a.matrix).map_err(Failure::io)?;
            (certify_sdp(&m, &params)?, None)
        }
        Mode::Inf2 => {
            let p = formats::read_matrix(&a.matrix).map_err(Failure::io)?;
            let NormCertificate { kappa, outcome, .. } = infty_to_2_bound(&p, &params)?;
            (outcome, Some(kappa))
        }
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let cert = &outcome.certificate;
    let json = CertificateJson {
        n: cert.n,
        bound: cert.bound,
        mode: a.mode,
        y: cert.y.clone(),
        iterations_used: cert.iterations_used,
        early_stopped: cert.early_stopped(),
        stop_reason: cert.stop_reason.as_str().to_string(),
        verified: cert.verification.is_verified(),
        margin: cert.verification.margin().filter(|m| m.is_finite()),
        wall_time_ms,
        kappa,
    };
    println!("bound {}", json.bound);
    if let Some(k) = kappa {
        println!("kappa {k}");
    }
    println!("iterations {} ({})", json.iterations_used, json.stop_reason);
    println!("verified {} margin {}", json.verified, json.margin.map_or("n/a".into(), |m| m.to_string()));
    if outcome.truncated {
        println!("note: iteration budget capped at {}", outcome.max_iters);
    }
    println!("wall_time_ms {wall_time_ms:.3}");
    if let Some(out) = &a.out {
        formats::write_string(out, &json.to_json()).map_err(Failure::io)?;
    }
    Ok(if json.verified { EXIT_OK } else { EXIT_PRECONDITION })
}

pub fn cmd_oracle(a: &OracleArgs) -> CmdResult {
    let m = match a.mode {
        Mode::Inf1 => formats::read_symmetric(&a.matrix).map_err(Failure::io)?,
        Mode::Inf2 => {
            let p = formats::read_matrix(&a.matrix).map_err(Failure::io)?;
            opnorm_core::certify::norm_matrix(&p).0
        }
    };
    let sol = parallel_qp(&m)?;
    match a.mode {
        Mode::Inf1 => println!("value {}", sol.value),
        Mode::Inf2 => {
            println!("value {}", sol.value.sqrt());
            println!("squared {}", sol.value);
        }
    }
    let signs: Vec<&str> = sol.argmax.iter().map(|&s| if s > 0 { "+1" } else { "-1" }).collect();
    println!("argmax {}", signs.join(" "));
    Ok(EXIT_OK)
}

/// Entries at least this large (in magnitude) count towards a basis vector's
/// support when comparing against planted components.
pub const SUPPORT_TOL: f64 = 0.05;

#[derive(Debug, Serialize)]
struct CandidateJson {
    r: usize,
    rank: usize,
    kappa: Option<f64>,
    reconstruction_error: f64,
}

impl From<&CandidateSummary> for CandidateJson {
    fn from(c: &CandidateSummary) -> Self {
        Self { r: c.r, rank: c.rank, kappa: c.kappa, reconstruction_error: c.reconstruction_error }
    }
}

#[derive(Debug, Serialize)]
struct ChannelJson {
    channel: usize,
    feasible: bool,
    kappa: Option<f64>,
    r: Option<usize>,
    reconstruction_error: f64,
    candidates: Vec<CandidateJson>,
}

#[derive(Debug, Serialize)]
struct ProjectReport {
    n: usize,
    rank: usize,
    budget: f64,
    feasible: bool,
    kappa: Option<f64>,
    reconstruction_error: f64,
    padded: bool,
    channels: Vec<ChannelJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted_supports: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered_supports: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    supports_recovered: Option<bool>,
}

fn sorted_supports(basis: &[Vec<f64>], tol: f64) -> Vec<Vec<usize>> {
    let mut s: Vec<Vec<usize>> = basis
        .iter()
        .map(|v| (0..v.len()).filter(|&i| v[i].abs() >= tol).collect())
        .collect();
    s.sort();
    s
}

fn column_block(a: &DenseMatrix, start: usize, width: usize) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows(), width, |i, j| a.get(i, start + j))
}

fn format_basis_csv(p: &ProjectionMatrix) -> String {
    let cols = DenseMatrix::from_fn(p.n(), p.rank(), |i, j| p.basis()[j][i]);
    formats::format_dense_csv(&cols)
}

pub fn cmd_project(a: &ProjectArgs) -> CmdResult {
    let mut planted = None;
    let data = match (&a.data, a.synth) {
        (Some(path), _) => {
            let text = formats::read_to_string(path).map_err(Failure::io)?;
            formats::parse_data_csv(&text).map_err(|e| Failure::io(e.context(format!("in {}", path.display()))))?
        }
        (None, Some(Synth::Planted)) => {
            if a.n == 0 || a.rank == 0 || a.planted_sparsity == 0 || a.rank * a.planted_sparsity > a.n {
                return Err(Failure::precondition(anyhow!("planted instance needs rank·planted_sparsity <= n")));
            }
            let mut rng = seeded_rng(a.seed);
            let inst = planted_sparse(a.n, a.rank, a.planted_sparsity, a.noise, &mut rng);
            let d = inst.data.as_dense().clone();
            planted = Some(inst);
            d
        }
        (None, None) => return Err(Failure::io(anyhow!("need a data file or --synth"))),
    };
    if let Some(path) = &a.save_data {
        formats::write_string(path, &formats::format_data_csv(&data)).map_err(Failure::io)?;
    }
    let n = data.cols();
    if a.channels == 0 || n % a.channels != 0 {
        return Err(Failure::precondition(anyhow!("{n} columns do not split into {} channels", a.channels)));
    }
    let width = n / a.channels;
    let params = RobustProjectionParams {
        r_grid: a.r_grid.clone(),
        sparsity: a.sparsity,
        certify: CertifyParams { max_iters: a.max_iters, seed: a.seed, ..CertifyParams::with_delta(a.delta) },
        seed: a.seed,
    };

    let mut parts = Vec::with_capacity(a.channels);
    let mut channel_reports = Vec::with_capacity(a.channels);
    let mut infeasible = None;
    for c in 0..a.channels {
        let block = if a.channels == 1 { data.clone() } else { column_block(&data, c * width, width) };
        let dm = DataMatrix::new(block)?;
        match robust_projection(&dm, a.rank, a.budget, &params) {
            Ok(rp) => {
                println!(
                    "channel {c}: kappa {} r {} reconstruction_error {}",
                    rp.kappa, rp.r, rp.projection.reconstruction_error
                );
                channel_reports.push(ChannelJson {
                    channel: c,
                    feasible: true,
                    kappa: Some(rp.kappa),
                    r: Some(rp.r),
                    reconstruction_error: rp.projection.reconstruction_error,
                    candidates: rp.candidates.iter().map(CandidateJson::from).collect(),
                });
                parts.push(rp.projection);
            }
            Err(Error::NoFeasibleProjection { budget, best }) => {
                println!(
                    "channel {c}: no projection within reconstruction budget {budget}; best error {} kappa {}",
                    best.reconstruction_error,
                    best.certified_bound.map_or("unverified".into(), |k| k.to_string())
                );
                channel_reports.push(ChannelJson {
                    channel: c,
                    feasible: false,
                    kappa: best.certified_bound,
                    r: None,
                    reconstruction_error: best.reconstruction_error,
                    candidates: Vec::new(),
                });
                infeasible.get_or_insert(budget);
                parts.push(*best);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let g = DataMatrix::new(data.clone())?.normalized_gram()?;
    let mut combined = if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        ProjectionMatrix::block_diagonal(&parts)
    };
    combined.reconstruction_error = reconstruction_error(&g, &combined);
    if a.channels > 1 && infeasible.is_none() {
        let params = CertifyParams { max_iters: a.max_iters, seed: a.seed, ..CertifyParams::with_delta(a.delta) };
        combined.certify(&params)?;
        println!(
            "combined: kappa {} reconstruction_error {}",
            combined.certified_bound.map_or("unverified".into(), |k| k.to_string()),
            combined.reconstruction_error
        );
    }

    let (planted_supports, recovered_supports, supports_recovered) = match &planted {
        Some(inst) => {
            let mut want = inst.supports.clone();
            want.sort();
            let got = sorted_supports(combined.basis(), SUPPORT_TOL);
            let ok = want == got;
            println!("planted supports recovered: {ok}");
            (Some(want), Some(got), Some(ok))
        }
        None => (None, None, None),
    };
    let feasible = infeasible.is_none();
    let report = ProjectReport {
        n,
        rank: combined.rank(),
        budget: a.budget,
        feasible,
        kappa: if feasible { combined.certified_bound } else { None },
        reconstruction_error: combined.reconstruction_error,
        padded: combined.padded,
        channels: channel_reports,
        planted_supports,
        recovered_supports,
        supports_recovered,
    };
    if let Some(out) = &a.out {
        let mut text = serde_json::to_string_pretty(&report).map_err(Failure::io)?;
        text.push('\n');
        formats::write_string(out, &text).map_err(Failure::io)?;
    }
    if let Some(out) = &a.out_basis {
        formats::write_string(out, &format_basis_csv(&combined)).map_err(Failure::io)?;
    }
    if !feasible {
        return Ok(EXIT_INFEASIBLE);
    }
    if combined.certified_bound.is_none() {
        println!("combined projection failed verification");
        return Ok(EXIT_PRECONDITION);
    }
    Ok(EXIT_OK)
}

/// Accuracy just above `eps`: correct records with radius strictly larger.
fn accuracy_above(records: &[RobustnessRecord], eps: f64) -> f64 {
    let hits = records.iter().filter(|r| r.correct && r.l2_radius > eps).count();
    hits as f64 / records.len() as f64
}

/// Step-function curve over `{0} ∪ radii`: each radius contributes its value
/// and the value just past it, so the drops are explicit.
pub fn step_curve(records: &[RobustnessRecord], kappa: f64) -> opnorm_core::Result<Vec<(f64, f64)>> {
    let mut radii: Vec<f64> = records.iter().filter(|r| r.correct).map(|r| r.l2_radius).collect();
    radii.push(0.0);
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut points = Vec::with_capacity(2 * radii.len());
    for (eps, (e, acc)) in radii.iter().zip(accuracy_curve_translate(records, kappa, &radii)?) {
        points.push((e, acc));
        let after = accuracy_above(records, *eps);
        if after != acc {
            points.push((e, after));
        }
    }
    Ok(points)
}

pub fn cmd_translate(a: &TranslateArgs) -> CmdResult {
    let text = formats::read_to_string(&a.records).map_err(Failure::io)?;
    let records = formats::parse_records(&text).map_err(Failure::io)?;
    if records.is_empty() {
        return Err(Failure::io(anyhow!("{}: no records", a.records.display())));
    }
    let kappa = match (&a.cert, a.kappa) {
        (Some(path), _) => {
            let text = formats::read_to_string(path).map_err(Failure::io)?;
            let cert = CertificateJson::from_json(&text).map_err(Failure::io)?;
            if !cert.verified {
                return Err(Failure::precondition(anyhow!("refusing unverified certificate {}", path.display())));
            }
            if cert.mode == Mode::Inf1 {
                log::warn!("inf1 certificate: using sqrt(bound), valid when the certified matrix is the projection");
            }
            cert.kappa()
        }
        (None, Some(k)) => k,
        (None, None) => return Err(Failure::precondition(anyhow!("need --kappa or --cert"))),
    };
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Failure::precondition(anyhow!("kappa must be positive, got {kappa}")));
    }
    let curve = match &a.eps {
        Some(eps) => accuracy_curve_translate(&records, kappa, eps)?,
        None => step_curve(&records, kappa)?,
    };
    emit(a.out.as_deref(), &formats::format_curve(&curve))?;
    Ok(EXIT_OK)
}

pub fn cmd_bench(a: &BenchArgs) -> CmdResult {
    let grid = parse_grid(&a.grid).map_err(Failure::io)?;
    if a.trials == 0 {
        return Err(Failure::precondition(anyhow!("need at least one trial")));
    }
    if a.oracle {
        if let Some(&n) = grid.iter().find(|&&n| n > opnorm_core::oracle::ORACLE_MAX_N) {
            return Err(Failure::precondition(anyhow!(
                "--oracle needs n <= {}, grid has {n}",
                opnorm_core::oracle::ORACLE_MAX_N
            )));
        }
    }
    let cfg = BenchConfig {
        family: a.family,
        grid,
        trials: a.trials,
        seed: a.seed,
        certify: CertifyParams {
            delta: a.delta,
            max_iters: a.max_iters,
            stall_stop: !a.no_stall,
            ..CertifyParams::default()
        },
        oracle: a.oracle,
    };
    let rows = run_bench(&cfg).map_err(Failure::precondition)?;
    emit(a.out.as_deref(), &format_bench_csv(&rows, a.oracle))?;
    Ok(EXIT_OK)
}

pub fn cmd_generate(a: &GenerateArgs) -> CmdResult {
    if a.n == 0 {
        return Err(Failure::precondition(anyhow!("n must be positive")));
    }
    let mut rng = seeded_rng(a.seed);
    let matrix: SymmetricMatrix = match a.family {
        GenFamily::Psd => Family::Psd.generate(a.n, a.seed),
        GenFamily::Qp => Family::Qp.generate(a.n, a.seed),
        GenFamily::Identity => SymmetricMatrix::identity(a.n),
        GenFamily::Ones => SymmetricMatrix::ones(a.n),
        GenFamily::Projection => {
            if a.rank == 0 || a.rank > a.n {
                return Err(Failure::precondition(anyhow!("rank must satisfy 1 <= rank <= n")));
            }
            random_projection(a.n, a.rank, &mut rng)
        }
        GenFamily::Planted => {
            if a.rank == 0 || a.planted_sparsity == 0 || a.rank * a.planted_sparsity > a.n {
                return Err(Failure::precondition(anyhow!("planted instance needs rank·planted_sparsity <= n")));
            }
            let inst = planted_sparse(a.n, a.rank, a.planted_sparsity, a.noise, &mut rng);
            let text = formats::format_data_csv(inst.data.as_dense());
            formats::write_string(&a.out, &text).map_err(Failure::io)?;
            return Ok(EXIT_OK);
        }
    };
    let text = match a.format {
        MatrixFormat::Mtx => formats::format_matrix_market(&matrix),
        MatrixFormat::Csv => {
            let n = matrix.n();
            formats::format_dense_csv(&DenseMatrix::from_row_major(n, n, matrix.as_slice().to_vec())?)
        }
    };
    formats::write_string(&a.out, &text).map_err(Failure::io)?;
    Ok(EXIT_OK)
}
