use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lightfluid::fluid::ComplexField;
use lightfluid::io::{write_field, write_raster, Table};

use crate::error::{CliError, Result};

/// Collects the files and scalar results of one run inside its output directory.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    dat: bool,
    pub files: Vec<String>,
    pub summary: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path, dat: bool) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            dat,
            files: Vec::new(),
            summary: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn record(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.dir).unwrap_or(path);
        self.files.push(rel.to_string_lossy().into_owned());
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(format!("{name}.csv"));
        table
            .save_csv(&path)
            .map_err(|e| CliError::engine(format!("writing {}", path.display()), e))?;
        self.record(&path);
        if self.dat {
            let path = self.dir.join(format!("{name}.dat"));
            table
                .save_dat(&path)
                .map_err(|e| CliError::engine(format!("writing {}", path.display()), e))?;
            self.record(&path);
        }
        Ok(())
    }

    pub fn field(&mut self, name: &str, field: &ComplexField) -> Result<()> {
        let path = self.dir.join(format!("{name}.bin"));
        let written = write_field(field, &path).map_err(|e| CliError::engine(format!("writing {}", path.display()), e))?;
        for p in &written {
            self.record(p);
        }
        Ok(())
    }

    pub fn raster(&mut self, name: &str, values: &[f64], like: &ComplexField, units: &str) -> Result<()> {
        let path = self.dir.join(format!("{name}.bin"));
        let written = write_raster(values, like, units, &path)
            .map_err(|e| CliError::engine(format!("writing {}", path.display()), e))?;
        for p in &written {
            self.record(p);
        }
        Ok(())
    }

    /// Records a scalar result; non-finite values are left out.
    pub fn set(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.summary.insert(key.to_string(), value);
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }
}
