//! Black-box tests of the `ose` binary: file formats, exit codes,
//! reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ose"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ose-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn gen_writes_valid_ose1() {
    let out = tmp("pi.ose");
    let result = ose(&[
        "gen", "--kind", "countsketch", "--m", "16", "--n", "64", "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let text = read(&out);
    let pi = ose_core::formats::parse_sketch(&text).unwrap();
    assert_eq!(pi.rows(), 16);
    assert_eq!(pi.cols(), 64);
    assert_eq!(pi.max_col_nnz(), 1);
    assert_eq!(pi.nnz(), 64);
    // resolved config echoed on stdout
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("\"seed\":1"));
}

#[test]
fn gen_gaussian_writes_ose1d() {
    let out = tmp("g.osed");
    let result = ose(&[
        "gen", "--kind", "gaussian", "--m", "6", "--n", "5", "--seed", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let dense = ose_core::formats::parse_dense(&read(&out)).unwrap();
    assert_eq!((dense.rows(), dense.cols()), (6, 5));
}

#[test]
fn runs_are_byte_identical() {
    let out1 = tmp("rep1.csv");
    let out2 = tmp("rep2.csv");
    for out in [&out1, &out2] {
        let pi = tmp("rep-pi.ose");
        let g = ose(&[
            "gen", "--kind", "countsketch", "--m", "8", "--n", "100", "--seed", "5", "--out",
            pi.to_str().unwrap(),
        ]);
        assert!(g.status.success());
        let c = ose(&[
            "check", "--sketch", pi.to_str().unwrap(), "--family", "dbeta", "--r", "1", "--d",
            "3", "--eps", "0.2", "--trials", "500", "--seed", "7", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(c.status.success());
    }
    // identical up to the embedded output path
    let normalize = |p: &Path| read(p).replace(p.file_name().unwrap().to_str().unwrap(), "OUT");
    assert_eq!(normalize(&out1), normalize(&out2));
}

#[test]
fn check_row_matches_schema() {
    let pi = tmp("schema-pi.ose");
    ose(&[
        "gen", "--kind", "osnap", "--m", "32", "--n", "200", "--s", "2", "--seed", "3", "--out",
        pi.to_str().unwrap(),
    ]);
    let out = tmp("schema.csv");
    let result = ose(&[
        "check", "--sketch", pi.to_str().unwrap(), "--family", "dbeta", "--r", "2", "--d", "4",
        "--eps", "1/8", "--trials", "200", "--seed", "11", "--out", out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let text = read(&out);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some(ose_core::formats::ESTIMATE_CSV_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 11);
    assert_eq!(row[0], "32"); // m
    assert_eq!(row[1], "200"); // n
    assert_eq!(row[3], "2"); // r
    assert_eq!(row[4], "0.125"); // eps parsed from the fraction
    let p_hat: f64 = row[7].parse().unwrap();
    assert!((0.0..=1.0).contains(&p_hat));
}

#[test]
fn parse_error_exits_one() {
    let result = ose(&["check", "--no-such-flag"]);
    assert_eq!(result.status.code(), Some(1));
    let err = String::from_utf8(result.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "one-line diagnostic, got {err:?}");
}

#[test]
fn infeasible_params_exit_two_without_output() {
    let pi = tmp("inf-pi.ose");
    ose(&[
        "gen", "--kind", "countsketch", "--m", "8", "--n", "16", "--seed", "1", "--out",
        pi.to_str().unwrap(),
    ]);
    let out = tmp("inf.csv");
    // d*r = 64 > n = 16
    let result = ose(&[
        "check", "--sketch", pi.to_str().unwrap(), "--family", "dbeta", "--r", "16", "--d",
        "4", "--eps", "0.2", "--trials", "100", "--seed", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(!out.exists(), "no partial output on failure");
}

#[test]
fn missing_input_exits_one() {
    let result = ose(&[
        "check", "--sketch", "/nonexistent/pi.ose", "--family", "dbeta", "--d", "2", "--eps",
        "0.2", "--out", tmp("never.csv").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn sweep_emits_csv_and_json_summary() {
    let out = tmp("sw.csv");
    let result = ose(&[
        "sweep", "--kind", "countsketch", "--s", "1", "--d", "2", "--eps", "0.2", "--delta",
        "0.2", "--m-grid", "6,12,24", "--trials", "300", "--family", "dbeta", "--r", "1",
        "--seed", "42", "--threads", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let csv = read(&out);
    assert!(csv.starts_with("# config "));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3);
    let json: serde_json::Value =
        serde_json::from_str(&read(&out.with_extension("json"))).unwrap();
    assert!(json["m_star"].is_array());
    assert!(json["fit"].is_object());
    assert_eq!(json["config"]["seed"], 42);
}

#[test]
fn demo_and_audit_run() {
    let demo_out = tmp("demo.csv");
    let result = ose(&[
        "demo", "--eps", "1/32", "--d", "4", "--m", "64", "--n", "64", "--trials", "200",
        "--seed", "4", "--out", demo_out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let text = read(&demo_out);
    assert!(text.contains(",0,0,0,")); // zero failures on the single copy

    let pi = tmp("audit-pi.ose");
    ose(&[
        "gen", "--kind", "hadamard", "--eps", "1/32", "--m", "8", "--n", "16", "--out",
        pi.to_str().unwrap(),
    ]);
    let audit_out = tmp("audit.txt");
    let result = ose(&[
        "audit", "--sketch", pi.to_str().unwrap(), "--eps", "1/32", "--out",
        audit_out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    assert!(read(&audit_out).contains("ell,theta,avg_heavy"));
}

#[test]
fn adversary_instance_round_trip() {
    let pi = tmp("inst-pi.ose");
    ose(&[
        "gen", "--kind", "osnap", "--m", "64", "--n", "256", "--s", "2", "--seed", "6", "--out",
        pi.to_str().unwrap(),
    ]);
    let inst = tmp("inst.oseinst");
    let cert1 = tmp("inst-cert1.txt");
    let r1 = ose(&[
        "adversary", "--sketch", pi.to_str().unwrap(), "--d", "32", "--eps", "1/32", "--seed",
        "9", "--out", cert1.to_str().unwrap(), "--inst-out", inst.to_str().unwrap(),
    ]);
    assert!(r1.status.success(), "{r1:?}");
    let stored = ose_core::formats::parse_instance(&read(&inst)).unwrap();
    assert_eq!(stored.d(), 32);
    assert_eq!(stored.n(), 256);

    // replaying the stored instance reproduces the run
    let cert2 = tmp("inst-cert2.txt");
    let r2 = ose(&[
        "adversary", "--sketch", pi.to_str().unwrap(), "--d", "32", "--eps", "1/32", "--seed",
        "9", "--out", cert2.to_str().unwrap(), "--inst", inst.to_str().unwrap(),
    ]);
    assert!(r2.status.success());
    let strip = |p: &Path| {
        read(p)
            .lines()
            .filter(|l| !l.starts_with("# config"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&cert1), strip(&cert2));

    // a mismatched instance is rejected
    let r3 = ose(&[
        "adversary", "--sketch", pi.to_str().unwrap(), "--d", "16", "--eps", "1/32", "--seed",
        "9", "--out", tmp("never2.txt").to_str().unwrap(), "--inst", inst.to_str().unwrap(),
    ]);
    assert_eq!(r3.status.code(), Some(1));
}

#[test]
fn adversary_writes_certificate_and_trace() {
    let pi = tmp("adv-pi.ose");
    ose(&[
        "gen", "--kind", "osnap", "--m", "64", "--n", "512", "--s", "2", "--seed", "3", "--out",
        pi.to_str().unwrap(),
    ]);
    let cert = tmp("adv-cert.txt");
    let trace = tmp("adv-trace.log");
    let result = ose(&[
        "adversary", "--sketch", pi.to_str().unwrap(), "--d", "48", "--eps", "1/32", "--eta",
        "3", "--seed", "7", "--out", cert.to_str().unwrap(), "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let text = read(&cert);
    assert!(text.contains("pairs_found:"));
    if text.contains("pairs_found: 0") {
        assert!(!text.contains("witness:"));
    } else {
        assert!(text.contains("witness:"));
        assert!(text.contains("anticonc_prob:"));
    }
    assert!(trace.exists());
}
