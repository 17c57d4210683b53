use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, ErrorReport, Result};
use crate::experiments::Prepared;
use crate::output::Outputs;
use crate::sweep::SweepSpec;

pub const MANIFEST: &str = "manifest.json";
pub const EFFECTIVE_CONFIG: &str = "config.toml";

/// Top level of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            reason: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Overrides the seed of the file.
    pub seed: Option<u64>,
    pub strict: bool,
    /// Also write gnuplot `.dat` mirrors of every table.
    pub dat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    /// sha256 of the effective configuration (`config.toml`).
    pub config_sha256: String,
    pub seed: u64,
    pub started: String,
    pub finished: Option<String>,
    /// "running", "ok" or "failed".
    pub status: String,
    pub strict: bool,
    /// Paths relative to the run directory.
    pub files: Vec<String>,
    pub summary: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    /// Effective configuration, identical to `config.toml`.
    pub config: serde_json::Value,
    pub error: Option<ErrorReport>,
}

impl Manifest {
    pub fn new(experiment: &str, seed: u64, strict: bool) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            config_sha256: String::new(),
            seed,
            started: now(),
            finished: None,
            status: "running".to_string(),
            strict,
            files: Vec::new(),
            summary: BTreeMap::new(),
            warnings: Vec::new(),
            config: serde_json::Value::Null,
            error: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::io("serializing manifest", std::io::Error::other(e)))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    pub fn read(dir: &Path) -> Option<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn fail(&mut self, error: &CliError) {
        self.status = "failed".to_string();
        self.finished = Some(now());
        self.error = Some(error.report());
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Effective configuration as written to `config.toml`: experiment, seed and defaulted params.
pub fn effective_text(experiment: &str, seed: u64, params: &toml::Table) -> Result<String> {
    let file = RunFile {
        experiment: experiment.to_string(),
        seed: Some(seed),
        params: params.clone(),
        sweep: None,
    };
    toml::to_string(&file).map_err(|e| CliError::config("params", e.to_string()))
}

/// Result of a single run; the manifest is already on disk.
#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub error: Option<CliError>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, CliError::exit_code)
    }
}

/// Runs one experiment into `dir`. The manifest is written before the engine starts and again
/// when it ends, also on failure. Only a directory that cannot be created is returned as `Err`.
pub fn run(file: &RunFile, dir: &Path, opts: RunOptions) -> Result<RunReport> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let seed = opts.seed.or(file.seed).unwrap_or(0);
    let mut manifest = Manifest::new(&file.experiment, seed, opts.strict);
    let outcome = execute(file, dir, seed, opts, &mut manifest);
    match outcome {
        Ok(()) => {
            manifest.status = "ok".to_string();
            manifest.finished = Some(now());
            manifest.write(dir)?;
            Ok(RunReport {
                dir: dir.to_path_buf(),
                manifest,
                error: None,
            })
        }
        Err(e) => {
            manifest.fail(&e);
            manifest.write(dir)?;
            Ok(RunReport {
                dir: dir.to_path_buf(),
                manifest,
                error: Some(e),
            })
        }
    }
}

fn execute(file: &RunFile, dir: &Path, seed: u64, opts: RunOptions, manifest: &mut Manifest) -> Result<()> {
    let prepared = Prepared::new(&file.experiment, &file.params)?;
    let params = prepared.effective()?;
    let text = effective_text(prepared.name(), seed, &params)?;
    manifest.config_sha256 = sha256_hex(text.as_bytes());
    manifest.config = serde_json::to_value(&params).map_err(|e| CliError::config("params", e.to_string()))?;
    let config_path = dir.join(EFFECTIVE_CONFIG);
    fs::write(&config_path, &text).map_err(|e| CliError::io(format!("writing {}", config_path.display()), e))?;
    manifest.files.push(EFFECTIVE_CONFIG.to_string());
    manifest.write(dir)?;

    let mut out = Outputs::new(dir, opts.dat);
    let result = prepared.execute(&mut out, opts.strict);
    manifest.files.extend(out.files);
    manifest.summary = out.summary;
    manifest.warnings = out.warnings;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    const POINT: &str = r#"
experiment = "vapor_point"
[params]
temperature_K = 350.0
detuning_MHz = 0.0
intensity_W_per_m2 = 10.0
length_m = 0.01
doppler = false
"#;

    #[test]
    fn negative_temperature_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let mut file = RunFile::parse(POINT, "test").unwrap();
        file.params.insert("temperature_K".into(), toml::Value::Float(-3.0));
        let report = run(&file, dir.path(), RunOptions::default()).unwrap();
        assert_eq!(report.exit_code(), 2);
        let m = Manifest::read(dir.path()).unwrap();
        assert_eq!(m.status, "failed");
        assert_eq!(m.error.unwrap().field.as_deref(), Some("temperature_K"));
    }

    #[test]
    fn unknown_fields_and_experiments_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut file = RunFile::parse(POINT, "test").unwrap();
        file.params.insert("temprature_K".into(), toml::Value::Float(300.0));
        let report = run(&file, dir.path(), RunOptions::default()).unwrap();
        assert_eq!(report.manifest.error.as_ref().unwrap().field.as_deref(), Some("temprature_K"));
        file.experiment = "nope".into();
        assert_eq!(run(&file, dir.path(), RunOptions::default()).unwrap().exit_code(), 2);
        assert!(RunFile::parse("experiment = 1", "x").is_err());
    }

    #[test]
    fn manifest_lists_existing_files_and_hash() {
        let dir = tempfile::tempdir().unwrap();
        let file = RunFile::parse(POINT, "test").unwrap();
        let report = run(&file, dir.path(), RunOptions { seed: Some(7), ..Default::default() }).unwrap();
        assert_eq!(report.exit_code(), 0);
        let m = Manifest::read(dir.path()).unwrap();
        assert_eq!(m.seed, 7);
        assert!(m.files.contains(&"point.csv".to_string()));
        for f in &m.files {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let text = fs::read(dir.path().join(EFFECTIVE_CONFIG)).unwrap();
        assert_eq!(m.config_sha256, sha256_hex(&text));
        // the echoed config re-runs to the same hash
        let again = RunFile::parse(std::str::from_utf8(&text).unwrap(), "echo").unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let r2 = run(&again, dir2.path(), RunOptions::default()).unwrap();
        assert_eq!(r2.manifest.config_sha256, m.config_sha256);
    }
}
