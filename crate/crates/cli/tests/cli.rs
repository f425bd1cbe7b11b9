use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kinetic-ar"))
}

fn summary(dir: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            "--problem",
            "consistent_ic",
            "--nx",
            "24",
            "--nv",
            "24",
            "--t-final",
            "0.01",
            "--plots",
        ])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "moments.csv",
        "diagnostics.csv",
        "jfnk.csv",
        "summary.json",
        "moments.svg",
        "ranks.svg",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    assert!(!dir.path().join("timing.csv").exists());
    let s = summary(dir.path());
    assert_eq!(s["problem"]["nx"], 24);
    assert_eq!(s["final_time"], 0.01);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "problem = \"mixed_regime\"\nnx = 16\nnv = 16\ncfl = 2.0\nseed = 7\nt_final = 0.002\n",
    )
    .unwrap();
    let out = bin()
        .args(["run", "--cfl", "1.5", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(dir.path());
    assert_eq!(s["problem"]["tag"], "mixed_regime");
    assert_eq!(s["problem"]["config"]["cfl"], 1.5);
    assert_eq!(s["seed"], 7);
}

#[test]
fn spatial_study_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "study",
            "--axis",
            "spatial",
            "--levels",
            "8,16,32",
            "--reference",
            "64",
            "--t-final",
            "0.01",
        ])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert!(csv.starts_with("n,error,order,steps,mean_svd_rank\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("study.json").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let out = bin().args(["run", "--problem", "sod"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sod"));
    let out = bin()
        .args(["run", "--problem", "riemann", "--cfl", "-1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
