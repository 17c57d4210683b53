use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::runner::{run, sha256_hex, Manifest, RunFile, RunOptions};

/// `[sweep]` table: every key of `parameters` maps a params field to a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_cap")]
    pub max_points: usize,
    #[serde(default)]
    pub parameters: toml::Table,
}

fn default_cap() -> usize {
    256
}

pub const SUMMARY: &str = "summary.csv";

/// Cartesian product of the sweep axes in key order, last key fastest.
pub fn expand(spec: &SweepSpec) -> Result<Vec<Vec<(String, toml::Value)>>> {
    let mut axes = Vec::with_capacity(spec.parameters.len());
    for (key, value) in &spec.parameters {
        match value {
            toml::Value::Array(values) if !values.is_empty() => axes.push((key.clone(), values.clone())),
            _ => {
                return Err(CliError::config(
                    format!("sweep.parameters.{key}"),
                    "must be a non-empty list of values",
                ))
            }
        }
    }
    let count = axes.iter().try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len()));
    match count {
        Some(n) if n <= spec.max_points => {}
        Some(n) => {
            return Err(CliError::config(
                "sweep.max_points",
                format!("grid expands to {n} points, above the cap of {}", spec.max_points),
            ))
        }
        None => return Err(CliError::config("sweep.max_points", "grid size overflows")),
    }
    let mut points: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
    for (key, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub values: Vec<(String, toml::Value)>,
    pub exit_code: i32,
    pub skipped: bool,
    pub manifest: Option<Manifest>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub points: Vec<PointResult>,
    pub exit_code: i32,
}

pub fn point_dir(root: &Path, index: usize) -> std::path::PathBuf {
    root.join(format!("point_{index:04}"))
}

fn csv_value(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs every grid point in its own sub-directory, at most `jobs` at a time. Points whose
/// manifest already reports success are not run again.
pub fn sweep(file: &RunFile, root: &Path, opts: RunOptions, jobs: usize) -> Result<SweepReport> {
    let spec = file.sweep.clone().unwrap_or(SweepSpec {
        max_points: default_cap(),
        parameters: toml::Table::new(),
    });
    let points = expand(&spec)?;
    fs::create_dir_all(root).map_err(|e| CliError::io(format!("creating {}", root.display()), e))?;
    let seed = opts.seed.or(file.seed).unwrap_or(0);
    let mut root_manifest = Manifest::new(&file.experiment, seed, opts.strict);
    let source = toml::to_string(file).map_err(|e| CliError::config("sweep", e.to_string()))?;
    root_manifest.config_sha256 = sha256_hex(source.as_bytes());
    root_manifest.config = serde_json::to_value(file).map_err(|e| CliError::config("sweep", e.to_string()))?;
    root_manifest.write(root)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::io("starting worker pool", std::io::Error::other(e)))?;
    let results: Vec<Result<PointResult>> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, values)| {
                let dir = point_dir(root, index);
                if let Some(m) = Manifest::read(&dir).filter(Manifest::is_ok) {
                    return Ok(PointResult {
                        index,
                        values: values.clone(),
                        exit_code: 0,
                        skipped: true,
                        manifest: Some(m),
                    });
                }
                let mut sub = RunFile {
                    experiment: file.experiment.clone(),
                    seed: Some(seed),
                    params: file.params.clone(),
                    sweep: None,
                };
                for (k, v) in values {
                    sub.params.insert(k.clone(), v.clone());
                }
                let report = run(&sub, &dir, opts)?;
                Ok(PointResult {
                    index,
                    values: values.clone(),
                    exit_code: report.exit_code(),
                    skipped: false,
                    manifest: Some(report.manifest),
                })
            })
            .collect()
    });
    let points: Vec<PointResult> = results.into_iter().collect::<Result<_>>()?;

    let keys: Vec<String> = spec.parameters.keys().cloned().collect();
    let metrics: BTreeSet<String> = points
        .iter()
        .filter_map(|p| p.manifest.as_ref())
        .flat_map(|m| m.summary.keys().cloned())
        .collect();
    let mut csv = String::new();
    let header: Vec<String> = ["point".to_string()]
        .into_iter()
        .chain(keys.iter().cloned())
        .chain(["status".to_string(), "exit_code".to_string(), "skipped".to_string()])
        .chain(metrics.iter().cloned())
        .collect();
    csv.push_str(&header.join(","));
    csv.push('\n');
    for p in &points {
        let mut row = vec![p.index.to_string()];
        row.extend(p.values.iter().map(|(_, v)| csv_value(v)));
        let status = p.manifest.as_ref().map_or("missing".to_string(), |m| m.status.clone());
        row.extend([status, p.exit_code.to_string(), (p.skipped as u8).to_string()]);
        for key in &metrics {
            let v = p.manifest.as_ref().and_then(|m| m.summary.get(key));
            row.push(v.map_or(String::new(), |v| format!("{v:.16e}")));
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let summary_path = root.join(SUMMARY);
    fs::write(&summary_path, csv).map_err(|e| CliError::io(format!("writing {}", summary_path.display()), e))?;

    let exit_code = points.iter().map(|p| p.exit_code).max().unwrap_or(0);
    root_manifest.files.push(SUMMARY.to_string());
    root_manifest
        .files
        .extend(points.iter().map(|p| format!("point_{:04}/manifest.json", p.index)));
    root_manifest.finished = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true));
    root_manifest.status = if exit_code == 0 { "ok" } else { "failed" }.to_string();
    root_manifest.write(root)?;
    Ok(SweepReport { points, exit_code })
}
