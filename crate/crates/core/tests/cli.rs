use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn fkm(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fkm")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn suite_path(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "suites", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn row<'a>(table: &'a str, prefix: &str) -> &'a str {
    table.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no row {prefix}"))
}

#[test]
fn table_rows() {
    let (code, out, _) = fkm(&["table"]);
    assert_eq!(code, 0);
    let r = row(&out, "(1, 6) ");
    assert!(r.contains("[7, 28]") && r.contains("B1:28") && r.contains("B6:7"), "{r}");
    let r = row(&out, "(2, 5) ");
    assert!(r.contains("[6, 12]") && r.contains("B2:12"), "{r}");
    let r = row(&out, "(5, 2) ");
    assert!(r.contains("[3, 3]") && r.contains("B6:3"), "{r}");
}

#[test]
fn classify_exit_codes() {
    let (code, _, err) = fkm(&["classify", "--m-plus", "4", "--m-minus", "3"]);
    assert_eq!(code, 3, "{err}");
    let (code, out, _) = fkm(&["classify", "--m-plus", "4", "--m-minus", "3", "--class", "definite"]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict: non-sos"));
    let (_, out, _) = fkm(&["classify", "--m-plus", "5", "--m-minus", "2"]);
    assert!(out.contains("verdict: sos") && out.contains("rank bounds: [3, 3] (unique)"));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(fkm(&["frobnicate"]).0, 3);
    assert_eq!(fkm(&["construct", "--m", "4", "--l", "4", "--class", "indefinite"]).0, 3);
    assert_eq!(fkm(&["witness", "3-4r", "--r", "2"]).0, 3);
    let (code, out, _) = fkm(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("rank-survey"));
}

#[test]
fn suite_certificates_pass() {
    let (code, out, _) = fkm(&["suite", &suite_path("certificates.toml")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("cases: 16/16 passed"));
    assert!(out.contains("SkewViolation"));
    assert!(out.contains("IndefiniteWitness"));
    let keys: Vec<&str> = out.lines().filter(|l| l.starts_with("case ")).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn suite_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[[case]]\nm = \"one\"\n").unwrap();
    let (code, _, err) = fkm(&["suite", bad.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(err.contains("parse error"));

    let wrong = dir.path().join("wrong.toml");
    fs::write(&wrong, "[[case]]\nm = 1\nl = 4\nconstruction = \"B2\"\nexpect = \"non-sos\"\nactions = [\"verify\"]\n")
        .unwrap();
    let (code, out, _) = fkm(&["suite", wrong.to_str().unwrap(), "--out", dir.path().join("rep").to_str().unwrap()]);
    assert_eq!(code, 2, "{out}");
    assert!(dir.path().join("rep/summary.txt").exists());
}

#[test]
fn suite_probe_is_advisory() {
    let (code, out, _) = fkm(&["suite", &suite_path("probe.toml")]);
    assert_eq!(code, 0);
    assert!(out.contains("stalled"));
}

#[test]
fn certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.txt");
    let (code, out, _) =
        fkm(&["extract-sos", "--m", "2", "--l", "6", "--construction", "B2", "--out", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("certificate rank: 6"));
    let (code, _, _) = fkm(&["verify-cert", "--cert", cert.to_str().unwrap()]);
    assert_eq!(code, 0);

    let text = fs::read_to_string(&cert).unwrap();
    let tampered: String = text.replacen("4 : ", "5 : ", 1);
    assert_ne!(tampered, text);
    fs::write(&cert, tampered).unwrap();
    let (code, out, _) = fkm(&["verify-cert", "--cert", cert.to_str().unwrap()]);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("residual is zero: FAILED"));
}

#[test]
fn infeasible_construction_exits_2() {
    let (code, out, _) = fkm(&["verify-feasible", "--m", "3", "--l", "12", "--construction", "B1"]);
    assert_eq!(code, 2);
    assert!(out.contains("[linear]"));
}

#[test]
fn external_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("b.txt");
    fs::write(&f, fkm_core::sdpcert::b1_matrix(3).to_string()).unwrap();
    let arg = format!("file:{}", f.display());
    let (code, out, _) = fkm(&["verify-feasible", "--m", "1", "--l", "3", "--construction", &arg]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("rank B: 4"));
}

#[test]
fn construct_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) =
        fkm(&["construct", "--m", "4", "--l", "8", "--class", "definite", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("P_0···P_m: -I"));
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.starts_with("m 4\nl 8\nclass definite\n"));
    let p4: fkm_core::exactmat::RationalMatrix =
        fs::read_to_string(dir.path().join("P4.txt")).unwrap().parse().unwrap();
    assert_eq!(p4.rows(), 16);
}

#[test]
fn witness_emits_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = fkm(&["witness", "4-3-definite", "--emit-matrices", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("contradiction re-verified: ok"));
    let forced: fkm_core::exactmat::RationalMatrix =
        fs::read_to_string(dir.path().join("B2_5_forced.txt")).unwrap().parse().unwrap();
    assert!(!forced.is_skew());
}

#[test]
fn reports_are_deterministic() {
    let a = fkm(&["form", "--m", "2", "--l", "4", "--samples", "50", "--seed", "7"]);
    let b = fkm(&["form", "--m", "2", "--l", "4", "--samples", "50", "--seed", "7"]);
    assert_eq!(a, b);
    assert!(a.1.contains("seed: 7"));
    let c = fkm(&["suite", &suite_path("certificates.toml")]);
    let d = fkm(&["suite", &suite_path("certificates.toml")]);
    assert_eq!(c.1, d.1);
}

#[test]
fn probe_never_fails_the_run() {
    let (code, out, _) = fkm(&["probe", "--m", "4", "--l", "8", "--class", "definite", "--iters", "200"]);
    assert_eq!(code, 0);
    assert!(out.contains("exact results take precedence"));
}

#[test]
fn quiet_and_timings() {
    let (code, out, err) = fkm(&["rank-survey", "--m", "1", "--l", "5", "--quiet", "--timings"]);
    assert_eq!(code, 0);
    assert_eq!(out, "status: ok\n");
    assert!(err.starts_with("time: "));
}
