use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opnorm_cli::formats::{self, CertificateJson};
use opnorm_core::SymmetricMatrix;
use tempfile::TempDir;

fn opnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opnorm"))
        .args(args)
        .env("OPNORM_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_mtx(dir: &TempDir, name: &str, m: &SymmetricMatrix) -> PathBuf {
    let p = path(dir, name);
    fs::write(&p, formats::format_matrix_market(m)).unwrap();
    p
}

fn read_cert(p: &Path) -> CertificateJson {
    CertificateJson::from_json(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn certify_identity_and_ones() {
    let dir = TempDir::new().unwrap();
    let id = write_mtx(&dir, "id8.mtx", &SymmetricMatrix::identity(8));
    let cert = path(&dir, "id.json");
    let out = opnorm(&["certify", s(&id), "--delta", "0.1", "--out", s(&cert)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let c = read_cert(&cert);
    assert!((c.bound - 8.0).abs() <= 1e-6 * 8.0);
    assert!(c.verified);
    assert!(stdout(&out).contains("bound 8"));

    let ones = write_mtx(&dir, "ones8.mtx", &SymmetricMatrix::ones(8));
    let cert = path(&dir, "ones.json");
    assert_eq!(code(&opnorm(&["certify", s(&ones), "--out", s(&cert)])), 0);
    let c = read_cert(&cert);
    assert!((c.bound - 64.0).abs() <= 1e-6 * 64.0);
    assert!(c.early_stopped);
    assert_eq!(c.stop_reason, "flat_vector");
    assert_eq!(c.iterations_used, 1);
}

#[test]
fn certify_error_codes() {
    let dir = TempDir::new().unwrap();
    let missing = path(&dir, "missing.mtx");
    assert_eq!(code(&opnorm(&["certify", s(&missing)])), 2);

    let garbage = path(&dir, "bad.mtx");
    fs::write(&garbage, "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 oops\n").unwrap();
    assert_eq!(code(&opnorm(&["certify", s(&garbage)])), 2);

    let neg = write_mtx(&dir, "neg.mtx", &SymmetricMatrix::from_diagonal(&[1.0, -1.0]));
    assert_eq!(code(&opnorm(&["certify", s(&neg)])), 3);

    let id = write_mtx(&dir, "id.mtx", &SymmetricMatrix::identity(3));
    assert_eq!(code(&opnorm(&["certify", s(&id), "--delta", "0.7"])), 3);
    assert_eq!(code(&opnorm(&["certify", s(&id), "--no-such-flag"])), 2);
}

#[test]
fn certificates_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "qp.mtx");
    let gen = opnorm(&["generate", "--family", "qp", "--n", "12", "--seed", "5", "--out", s(&m)]);
    assert_eq!(code(&gen), 0);
    let mut jsons = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = path(&dir, name);
        assert_eq!(code(&opnorm(&["certify", s(&m), "--seed", "3", "--out", s(&out)])), 0);
        let mut c = read_cert(&out);
        c.wall_time_ms = 0.0;
        jsons.push(c.to_json());
    }
    assert_eq!(jsons[0], jsons[1]);
}

#[test]
fn inf2_mode_and_oracle_agree() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "proj.mtx");
    assert_eq!(code(&opnorm(&["generate", "--family", "projection", "--n", "10", "--rank", "2", "--seed", "3", "--out", s(&p)])), 0);
    let cert = path(&dir, "cert.json");
    assert_eq!(code(&opnorm(&["certify", s(&p), "--mode", "inf2", "--out", s(&cert)])), 0);
    let c = read_cert(&cert);
    let kappa = c.kappa.expect("inf2 certificates carry kappa");

    let out = opnorm(&["oracle", s(&p), "--mode", "inf2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let value: f64 = text.lines().next().unwrap().strip_prefix("value ").unwrap().parse().unwrap();
    assert!(kappa >= value * (1.0 - 1e-9));
    assert!(value >= 2f64.sqrt() - 1e-9 && value <= 10f64.sqrt() + 1e-9);
    assert!(text.contains("argmax "));
}

#[test]
fn oracle_refuses_large_inputs() {
    let dir = TempDir::new().unwrap();
    let big = write_mtx(&dir, "big.mtx", &SymmetricMatrix::identity(25));
    assert_eq!(code(&opnorm(&["oracle", s(&big)])), 3);
}

#[test]
fn generated_files_round_trip() {
    let dir = TempDir::new().unwrap();
    for (fmt, name) in [("mtx", "m.mtx"), ("csv", "m.csv")] {
        let p = path(&dir, name);
        assert_eq!(code(&opnorm(&["generate", "--family", "psd", "--n", "9", "--seed", "1", "--format", fmt, "--out", s(&p)])), 0);
        let m = formats::read_symmetric(&p).unwrap();
        let again = path(&dir, &format!("again.{fmt}"));
        fs::write(&again, formats::format_matrix_market(&m)).unwrap();
        assert_eq!(formats::read_symmetric(&again).unwrap(), m);
        assert!((m.trace() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn translate_curves_and_gates() {
    let dir = TempDir::new().unwrap();
    let records = path(&dir, "records.csv");
    fs::write(&records, "correct,radius\n1,1.0\n1,1.0\n1,1.0\n").unwrap();
    let curve = path(&dir, "curve.csv");
    let out = opnorm(&["translate", s(&records), "--kappa", "55.42", "--out", s(&curve)]);
    assert_eq!(code(&out), 0);
    let points = formats::parse_curve(&fs::read_to_string(&curve).unwrap()).unwrap();
    assert_eq!(points.len(), 3);
    assert!((points[1].0 - 0.018044).abs() < 1e-6);
    assert_eq!((points[1].1, points[2].1), (1.0, 0.0));

    let empty = path(&dir, "empty.csv");
    fs::write(&empty, "correct,radius\n").unwrap();
    assert_eq!(code(&opnorm(&["translate", s(&empty), "--kappa", "2"])), 2);
    assert_eq!(code(&opnorm(&["translate", s(&records), "--kappa", "0"])), 3);
    assert_eq!(code(&opnorm(&["translate", s(&records), "--kappa", "-1"])), 3);
    assert_eq!(code(&opnorm(&["translate", s(&records)])), 3);

    let mut cert = CertificateJson {
        n: 1,
        bound: 4.0,
        mode: formats::Mode::Inf2,
        y: vec![4.0],
        iterations_used: 1,
        early_stopped: false,
        stop_reason: "max_iterations".into(),
        verified: false,
        margin: Some(-1.0),
        wall_time_ms: 0.0,
        kappa: Some(2.0),
    };
    let failed = path(&dir, "failed.json");
    fs::write(&failed, cert.to_json()).unwrap();
    assert_eq!(code(&opnorm(&["translate", s(&records), "--cert", s(&failed)])), 3);
    cert.verified = true;
    let good = path(&dir, "good.json");
    fs::write(&good, cert.to_json()).unwrap();
    let out = opnorm(&["translate", s(&records), "--cert", s(&good), "--eps", "0.5,1,1.5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "eps_inf,accuracy\n0.25,1\n0.5,1\n0.75,0\n");
}

#[test]
fn project_planted_full_rank_and_malformed() {
    let dir = TempDir::new().unwrap();
    let report = path(&dir, "report.json");
    let basis = path(&dir, "basis.csv");
    let out = opnorm(&[
        "project", "--synth", "planted", "--n", "50", "--k", "2", "--max-iters", "400", "--out", s(&report),
        "--out-basis", s(&basis),
    ]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["supports_recovered"], serde_json::Value::Bool(true));
    assert!(json["reconstruction_error"].as_f64().unwrap() <= 0.05);
    let b = formats::read_matrix(&basis).unwrap();
    assert_eq!((b.rows(), b.cols()), (50, 2));

    let data = path(&dir, "data.csv");
    let out = opnorm(&[
        "project", "--synth", "planted", "--n", "12", "--k", "12", "--planted-sparsity", "1", "--r-grid", "12",
        "--save-data", s(&data), "--out", s(&report),
    ]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let kappa = json["kappa"].as_f64().unwrap();
    assert!(kappa >= 12f64.sqrt() * (1.0 - 1e-9) && kappa <= 12f64.sqrt() * 1.01, "{kappa}");
    assert!(json["reconstruction_error"].as_f64().unwrap().abs() < 1e-10);

    // Data read back from disk gives the same projection rank.
    let out = opnorm(&["project", s(&data), "--k", "12", "--r-grid", "12"]);
    assert_eq!(code(&out), 0);

    let bad = path(&dir, "bad.csv");
    fs::write(&bad, "1,2,3\n4,5\n").unwrap();
    assert_eq!(code(&opnorm(&["project", s(&bad), "--k", "1"])), 2);
}

#[test]
fn project_reports_infeasible_budget() {
    let dir = TempDir::new().unwrap();
    let out = opnorm(&["project", "--synth", "planted", "--n", "20", "--k", "1", "--budget", "0.0", "--max-iters", "50"]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("no projection within reconstruction budget"));
    drop(dir);
}

#[test]
fn project_channels_certify_the_block_matrix() {
    let dir = TempDir::new().unwrap();
    let data = path(&dir, "data.csv");
    assert_eq!(code(&opnorm(&["generate", "--family", "planted", "--n", "30", "--rank", "3", "--seed", "2", "--out", s(&data)])), 0);
    let report = path(&dir, "report.json");
    let out = opnorm(&[
        "project", s(&data), "--channels", "3", "--k", "1", "--budget", "1", "--max-iters", "200", "--out", s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["channels"].as_array().unwrap().len(), 3);
    assert_eq!(json["rank"].as_u64(), Some(3));
    assert!(stdout(&out).contains("combined: kappa"));
}

#[test]
fn bench_with_oracle_column() {
    let out = opnorm(&["bench", "--family", "qp", "--grid", "8:10", "--trials", "2", "--oracle"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,wall_ms,bound,iterations,gap,trial,verified,oracle,ratio"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let ratio: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(ratio >= 1.0 - 1e-9);
    }
    assert_eq!(code(&opnorm(&["bench", "--grid", "30", "--oracle"])), 3);
    assert_eq!(code(&opnorm(&["bench", "--grid", "5:1"])), 2);
}

#[test]
fn bad_thread_setting_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_opnorm"))
        .args(["bench", "--grid", "4", "--trials", "1"])
        .env("OPNORM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
