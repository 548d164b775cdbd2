//! End-to-end checks of the command-line surface: exit codes, formats, and
//! byte-level reproducibility.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewherm"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn classify_standard_module() {
    let dir = std::env::temp_dir().join(format!("skewherm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("l.json");
    let module = skewherm::skewmod::SkewHermModule::standard_l(7, 8).unwrap();
    std::fs::write(&path, module.to_json()).unwrap();

    let (code, stdout, _) = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("p: 7 (split)"));
    assert!(stdout.contains("r = 0, s = 1"));

    let (code, stdout, _) = run(&["classify", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["schema"], 1);
    assert_eq!(parsed["case"], "split");
    assert_eq!(parsed["s"], 1);
    assert!(parsed["form_class"].is_null());
}

#[test]
fn classify_rejects_truncated_and_maximal_input() {
    let dir = std::env::temp_dir().join(format!("skewherm-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let bad = dir.join("truncated.json");
    std::fs::write(&bad, "{\"p\": 7, \"precision\": 8").unwrap();
    let (code, _, stderr) = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(!stderr.is_empty());

    // p = 5 is the maximal case and must be refused with the reason.
    let (code, _, stderr) = run(&["random", "--p", "5", "--r", "1", "--s", "0"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("maximal"));

    let missing = dir.join("does-not-exist.json");
    let (code, _, _) = run(&["classify", missing.to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn random_is_seed_deterministic_and_round_trips() {
    let (code1, out1, _) = run(&["random", "--p", "7", "--r", "2", "--s", "1", "--seed", "9"]);
    let (code2, out2, _) = run(&["random", "--p", "7", "--r", "2", "--s", "1", "--seed", "9"]);
    assert_eq!((code1, code2), (0, 0));
    assert_eq!(out1, out2, "same seed must give byte-identical output");
    let (_, out3, _) = run(&["random", "--p", "7", "--r", "2", "--s", "1", "--seed", "10"]);
    assert_ne!(out1, out3);

    // The emitted file classifies back to the requested invariant.
    let dir = std::env::temp_dir().join(format!("skewherm-cli-rt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.json");
    std::fs::write(&path, &out1).unwrap();
    let (code, stdout, _) = run(&["classify", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["r"], 2);
    assert_eq!(parsed["s"], 1);
}

#[test]
fn table_counts_agree_for_both_cases() {
    for p in ["7", "3"] {
        let (code, stdout, _) = run(&["table", "--p", p, "--n", "3", "--format", "json"]);
        assert_eq!(code, 0, "table failed for p = {p}");
        let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        let rows = parsed["rows"].as_array().unwrap();
        let found: Vec<u64> = rows.iter().map(|r| r["found"].as_u64().unwrap()).collect();
        assert_eq!(found, vec![2, 4, 5]);
    }
    let (code, _, _) = run(&["table", "--p", "5", "--n", "2"]);
    assert_eq!(code, 1);
}

#[test]
fn precision_env_var_is_honored_and_floored() {
    let out = bin()
        .args(["random", "--p", "3", "--r", "1", "--s", "0", "--seed", "4"])
        .env("HERMITE_PRECISION", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"precision\": 5"));

    let out = bin()
        .args(["random", "--p", "3", "--r", "1", "--s", "0"])
        .env("HERMITE_PRECISION", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "floor must be enforced");
}

#[test]
fn jordan_analyzes_and_compares_lattices() {
    use skewherm::hermlat::{ExtKind, HermLattice, QuadExt};
    let dir = std::env::temp_dir().join(format!("skewherm-cli-j-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ext = QuadExt::new(3, ExtKind::RamifiedPrime, 6).unwrap();
    let a = HermLattice::diagonal(ext, &[(1, 0), (1, 0)]).unwrap();
    let b = HermLattice::diagonal(ext, &[(1, 0), (2, 0)]).unwrap();
    let pa = dir.join("a.json");
    let pb = dir.join("b.json");
    std::fs::write(&pa, a.to_json()).unwrap();
    std::fs::write(&pb, b.to_json()).unwrap();

    let (code, stdout, _) = run(&["jordan", pa.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("scale 0 rank 2 normal"));

    let (code, stdout, _) = run(&[
        "jordan",
        pa.to_str().unwrap(),
        "--compare",
        pb.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("isometric: false"));

    let (code, stdout, _) = run(&[
        "jordan",
        pa.to_str().unwrap(),
        "--compare",
        pa.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("isometric: true"));
}

#[test]
fn orbits_reports_counts() {
    let (code, stdout, _) = run(&["orbits", "--r", "2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("m_2 = 2"));
    assert!(stdout.contains("double cosets 2"));
    let (code, _, _) = run(&["orbits", "--r", "5"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_jacobowitz_suite_passes() {
    let (code, stdout, _) = run(&["verify", "--suite", "jacobowitz", "--seed", "3"]);
    assert_eq!(code, 0, "verify output:\n{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("[pass]")).count() >= 3);
    let (code, _, _) = run(&["verify", "--suite", "bogus"]);
    assert_eq!(code, 1);
}
