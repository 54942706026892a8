use std::path::Path;
use std::process::{Command, Output};

fn foldquant(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foldquant"))
        .env_remove("FOLDQUANT_OUT")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn lloyd_rows(dir: &Path) -> usize {
    std::fs::read_to_string(dir.join("lloyd.csv")).unwrap().lines().count() - 1
}

#[test]
fn wasserstein_gaussians() {
    let dir = tempfile::tempdir().unwrap();
    let o = foldquant(dir.path(), &["wasserstein", "normal", "0", "1", "normal", "1", "2"]);
    assert!(o.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("wasserstein.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "wasserstein");
    let numeric = json["result"]["numeric"].as_f64().unwrap();
    assert!((numeric - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(foldquant(dir.path(), &["no-such-command"]).status.code(), Some(2));
    assert_eq!(foldquant(dir.path(), &["wasserstein", "normal", "0"]).status.code(), Some(2));
    assert_eq!(foldquant(dir.path(), &["--levels", "0", "lloyd"]).status.code(), Some(2));
    // No finite truncation covers this tail at such a small gain.
    let o = foldquant(dir.path(), &["--a-grid", "1e-6", "fold-pdf", "--base", "lognormal", "0", "30"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# small design\nlevels = 8\nlloyd-tol = 1e-8\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    assert!(foldquant(dir.path(), &["--config", cfg, "lloyd"]).status.success());
    assert_eq!(lloyd_rows(dir.path()), 8);

    assert!(foldquant(dir.path(), &["--config", cfg, "--levels", "4", "lloyd"]).status.success());
    assert_eq!(lloyd_rows(dir.path()), 4);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lloyd.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["levels"], 4);
    assert_eq!(json["config"]["lloyd_tol"], 1e-8);
}

#[test]
fn bad_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let o = foldquant(dir.path(), &["--config", cfg.to_str().unwrap(), "lloyd"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_foldquant"))
        .env("FOLDQUANT_OUT", dir.path())
        .args(["--levels", "4", "lloyd", "--base", "exp", "1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(lloyd_rows(dir.path()), 4);
}
