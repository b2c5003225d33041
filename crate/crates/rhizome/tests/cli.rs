use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rhizome::cartography::Cartography;
use rhizome::pipeline::RunConfig;

const ZONE: &str = "energy-information nexus";

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("energy-information-nexus")
}

fn rhizome(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhizome")).args(args).env_remove("RUST_LOG").output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn fixture_run_writes_the_cartography() {
    let tmp = tempfile::tempdir().unwrap();
    let out_path = tmp.path().join("carto.json");
    let dir = fixtures();
    let out = rhizome(&[
        "run",
        "--zone",
        ZONE,
        "--llm",
        "fixture",
        "--fixtures",
        dir.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let c: Cartography = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    c.cross_check().unwrap();
    assert_eq!(c.zone, ZONE);
    assert_eq!(c.config.abs_table.as_deref(), Some(dir.join("abs.csv").as_path()));
    // progress goes to stderr, one line per event
    assert!(stderr(&out).contains("run_completed"));
}

#[test]
fn config_file_with_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::fixture("some other zone", fixtures());
    cfg.seed = 3;
    let cfg_path = tmp.path().join("run.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out_path = tmp.path().join("carto.json");
    let out =
        rhizome(&["run", "--config", cfg_path.to_str().unwrap(), "--zone", ZONE, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let c: Cartography = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!((c.zone.as_str(), c.seed), (ZONE, 3));
}

#[test]
fn invalid_configs_exit_2() {
    let dir = fixtures();
    let dir = dir.to_str().unwrap();
    let out = rhizome(&["run", "--zone", ZONE, "--llm", "fixture", "--fixtures", dir, "--max-papers", "100000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("per_source_limit"), "{}", stderr(&out));

    let out = rhizome(&["run", "--zone", " ", "--llm", "fixture", "--fixtures", dir, "--k-fraction", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("zone") && err.contains("k_fraction"), "{err}");

    let out = rhizome(&["run", "--zone", ZONE, "--llm", "fixture"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--fixtures"));

    let out = rhizome(&["run", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_runs_exit_1() {
    // sources are present but no model replies were recorded
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("llm")).unwrap();
    let src = fixtures().join("sources");
    std::fs::create_dir(tmp.path().join("sources")).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), tmp.path().join("sources").join(entry.file_name())).unwrap();
    }
    let out_path = tmp.path().join("carto.json");
    let out = rhizome(&[
        "run",
        "--zone",
        ZONE,
        "--llm",
        "fixture",
        "--fixtures",
        tmp.path().to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("run_failed"));
    assert!(!out_path.exists());
}
