use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tkam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tkam")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn small(out: &Path) -> String {
    format!("[grids]\nn_r = 40\nn_theta = 32\nn_beta = 40\n[output]\ndirectory = \"{}\"\n", out.display())
}

#[test]
fn simulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = write_config(dir.path(), "run.toml", &small(&out));
    let sim = tkam(&["simulate", &config]);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    assert!(out.join("manifest.json").is_file());

    let report = tkam(&["report", out.to_str().unwrap()]);
    assert!(report.status.success());
    let text = String::from_utf8(report.stdout).unwrap();
    assert!(text.contains("tkam slope"), "{text}");
    for q in ["H9", "H12", "H15"] {
        assert!(text.contains(q), "{text}");
    }
}

#[test]
fn report_of_missing_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let r = tkam(&["report", dir.path().join("nowhere").to_str().unwrap()]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("not a run directory"));
}

#[test]
fn unknown_key_is_reported_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.toml", "[driver]\nl1 = 1\nwaist = 30.0\n");
    let r = tkam(&["simulate", &config]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("line 3") && err.contains("waist"), "{err}");
}

#[test]
fn off_lattice_gamma_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "g.toml", "[driver]\ngamma = \"1/2\"\n");
    let r = tkam(&["verify", &config]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("gamma"));
}

#[test]
fn override_replaces_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = write_config(dir.path(), "run.toml", &small(&out));
    let r = tkam(&["--threads", "2", "simulate", &config, "--override", "driver.l2=4"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["driver"]["l2"], 4);
    assert_eq!(manifest["threads"], 2);
}

#[test]
fn verify_default_passes_and_perturbed_is_expected_broken() {
    let dir = tempfile::tempdir().unwrap();
    let default = write_config(dir.path(), "default.toml", "");
    let ok = tkam(&["verify", &default]);
    let table = String::from_utf8_lossy(&ok.stdout);
    assert!(ok.status.success(), "{table}");
    assert!(!table.contains("FAIL"), "{table}");

    let perturbed = write_config(
        dir.path(),
        "perturbed.toml",
        "[perturbation]\nfraction = 0.1\nrelative_phase = \"in_phase\"\n",
    );
    let r = tkam(&["verify", &perturbed]);
    let table = String::from_utf8_lossy(&r.stdout);
    assert!(r.status.success(), "{table}");
    let symmetry = table.lines().find(|l| l.starts_with("driver symmetry")).unwrap();
    assert!(symmetry.contains("EXPECTED-BROKEN"), "{table}");
}
