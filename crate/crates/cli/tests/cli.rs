use std::path::{Path, PathBuf};
use std::process::Command;

fn apc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_apc"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn evaluate_exit_codes() {
    let out = tempfile::tempdir().unwrap();
    let s = scenarios();
    let ok = apc()
        .args(["evaluate", s.join("example1.json").to_str().unwrap(), "--pattern"])
        .arg(s.join("patterns/example1_qs.txt"))
        .arg("--out-dir")
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("satisfied       yes"));
    assert!(out.path().join("report.json").exists());
    assert!(out.path().join("members/seed.csv").exists());

    // A single satellite cannot cover Atlanta continuously.
    let one = out.path().join("one.txt");
    std::fs::write(&one, "0\n").unwrap();
    let bad = apc()
        .args(["evaluate", s.join("example1.json").to_str().unwrap(), "--pattern"])
        .arg(&one)
        .arg("--out-dir")
        .arg(out.path().join("bad"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("broken.json");
    std::fs::write(&f, "{ \"schema\": \"apc-scenario/1\",\n  \"length\": -5 }").unwrap();
    let r = apc().arg("solve").arg(&f).output().unwrap();
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("error:"));

    let missing = apc().args(["profile", "/nonexistent/scenario.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn quasi_symmetric_solve_and_track() {
    let out = tempfile::tempdir().unwrap();
    let s = scenarios().join("example1.json");
    let r = apc()
        .arg("solve")
        .arg(&s)
        .args(["--solver", "quasi-symmetric", "--out-dir"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let pattern = std::fs::read_to_string(out.path().join("patterns/seed.txt")).unwrap();
    assert_eq!(pattern.split_whitespace().count(), 22);

    let t = apc()
        .arg("track")
        .arg(&s)
        .arg("--out-dir")
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(t.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&t.stdout).contains("span 4680.0 deg"));
}
