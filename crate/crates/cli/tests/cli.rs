use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lightfluid_cli::Manifest;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lightfluid"));
    c.env_remove("LIGHTFLUID_OUT");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const POINT: &str = r#"
experiment = "vapor_point"
[params]
temperature_K = 340.0
detuning_MHz = 50.0
intensity_W_per_m2 = 5.0
length_m = 0.005
"#;

#[test]
fn list_names_every_experiment() {
    let out = run(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["bogoliubov_scan", "gem_echo", "lg_vortex_ring", "ring_count", "vapor_point"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn no_arguments_prints_usage() {
    let out = run(&[]);
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr).to_string() + &String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn negative_temperature_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &POINT.replace("340.0", "-5.0"));
    let out_dir = dir.path().join("out");
    let out = run(&["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["field"], "temperature_K");
    assert_eq!(err["kind"], "config");
    let m = Manifest::read(&out_dir).unwrap();
    assert_eq!(m.status, "failed");
}

#[test]
fn unparsable_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "broken.toml", "experiment = \n");
    let out = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "parse");
}

fn result_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let m = Manifest::read(dir).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = m.files.iter().map(|f| (f.clone(), fs::read(dir.join(f)).unwrap())).collect();
    files.sort();
    files
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("gem_echo.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["run", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--seed", "3"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (result_files(&a), result_files(&b));
    assert!(fa.len() >= 3);
    assert_eq!(fa, fb);
    let m = Manifest::read(&a).unwrap();
    assert_eq!(m.seed, 3);
    // exactly one manifest, and every listed file exists
    let manifests = fs::read_dir(&a)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name() == "manifest.json")
        .count();
    assert_eq!(manifests, 1);
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "point.toml", POINT);
    let out = bin()
        .env("LIGHTFLUID_OUT", dir.path().join("root"))
        .args(["run", cfg.to_str().unwrap(), "--dat"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let run_dir = dir.path().join("root").join("point");
    assert!(run_dir.join("point.csv").exists());
    assert!(run_dir.join("point.dat").exists());
}

#[test]
fn sweep_runs_every_point_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("sweep");
    let cfg = config("vapor_sweep.toml");
    let out = run(&["sweep", cfg.to_str().unwrap(), "--out", root.to_str().unwrap(), "--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(root.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 10, "{summary}");
    assert!(lines[0].starts_with("point,detuning_MHz,intensity_W_per_m2,status"));
    assert!(lines[1..].iter().all(|l| l.contains(",ok,0,0,")), "{summary}");
    for i in 0..9 {
        assert!(root.join(format!("point_{i:04}/manifest.json")).exists());
    }

    // drop one sub-run; the rerun only recomputes that one
    let lost = fs::read(root.join("point_0004/point.csv")).unwrap();
    fs::remove_dir_all(root.join("point_0004")).unwrap();
    let out = run(&["sweep", cfg.to_str().unwrap(), "--out", root.to_str().unwrap()]);
    assert!(out.status.success());
    let summary = fs::read_to_string(root.join("summary.csv")).unwrap();
    let resumed = summary.lines().skip(1).filter(|l| l.contains(",ok,0,1,")).count();
    assert_eq!(resumed, 8, "{summary}");
    assert_eq!(fs::read(root.join("point_0004/point.csv")).unwrap(), lost);
}

#[test]
fn one_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "point.toml", POINT);
    let single = dir.path().join("single");
    let swept = dir.path().join("swept");
    assert!(run(&["run", cfg.to_str().unwrap(), "--out", single.to_str().unwrap()]).status.success());
    assert!(run(&["sweep", cfg.to_str().unwrap(), "--out", swept.to_str().unwrap()]).status.success());
    assert_eq!(result_files(&single), result_files(&swept.join("point_0000")));
}

#[test]
fn sweep_over_the_cap_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{POINT}\n[sweep]\nmax_points = 4\n[sweep.parameters]\ndetuning_MHz = [1.0, 2.0, 3.0]\nlength_m = [0.1, 0.2]\n");
    let cfg = write_config(dir.path(), "big.toml", &text);
    let out = run(&["sweep", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("6 points"));
}

#[test]
fn every_shipped_config_parses_and_validates() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let file = lightfluid_cli::RunFile::load(&path).unwrap();
        lightfluid_cli::Prepared::new(&file.experiment, &file.params).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= lightfluid_cli::CATALOG.len());
}
