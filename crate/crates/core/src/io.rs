//! Output formats: binary grids with a JSON sidecar, and plain CSV tables.
//!
//! A grid file holds 64-bit little-endian floats in row-major order, interleaved real and
//! imaginary parts for complex fields. The sidecar `<name>.json` sits next to `<name>.bin`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fluid::{ComplexField, Grid};
use crate::gem::GemHistory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    /// [ny, nx]
    pub shape: [usize; 2],
    pub dx: f64,
    pub dy: f64,
    pub k0: f64,
    pub n0: f64,
    pub z_or_t: f64,
    /// Units of the stored samples.
    pub units: String,
    /// 2 for interleaved complex samples, 1 for real rasters.
    pub channels: usize,
}

impl GridMeta {
    fn for_field(field: &ComplexField, units: &str, channels: usize) -> Self {
        GridMeta {
            shape: [field.grid.ny, field.grid.nx],
            dx: field.grid.dx,
            dy: field.grid.dy,
            k0: field.k0,
            n0: field.n0,
            z_or_t: field.z_or_t,
            units: units.to_string(),
            channels,
        }
    }
}

fn sidecar(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

fn write_samples(path: &Path, samples: impl Iterator<Item = f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for v in samples {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn write_meta(path: &Path, meta: &GridMeta) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, meta)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Writes `field` to `path` (conventionally `*.bin`) plus its sidecar; returns both paths.
pub fn write_field(field: &ComplexField, path: &Path) -> Result<[PathBuf; 2]> {
    write_samples(path, field.data.iter().flat_map(|c| [c.re, c.im]))?;
    let meta_path = sidecar(path);
    write_meta(&meta_path, &GridMeta::for_field(field, "V/m", 2))?;
    Ok([path.to_path_buf(), meta_path])
}

/// Writes a single-channel raster (density, phase) on the grid of `like`.
pub fn write_raster(values: &[f64], like: &ComplexField, units: &str, path: &Path) -> Result<[PathBuf; 2]> {
    if values.len() != like.grid.len() {
        return Err(Error::domain("raster length does not match the grid"));
    }
    write_samples(path, values.iter().copied())?;
    let meta_path = sidecar(path);
    write_meta(&meta_path, &GridMeta::for_field(like, units, 1))?;
    Ok([path.to_path_buf(), meta_path])
}

fn read_samples(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() != 8 * expected {
        return Err(Error::domain(format!(
            "{} holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            8 * expected
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn read_meta(path: &Path) -> Result<GridMeta> {
    Ok(serde_json::from_reader(BufReader::new(File::open(sidecar(path))?))?)
}

/// Reads a complex field written by [`write_field`].
pub fn read_field(path: &Path) -> Result<ComplexField> {
    let meta = read_meta(path)?;
    if meta.channels != 2 {
        return Err(Error::domain("sidecar does not describe a complex field"));
    }
    let grid = Grid::new(meta.shape[1], meta.shape[0], meta.dx, meta.dy)?;
    let raw = read_samples(path, 2 * grid.len())?;
    let mut field = ComplexField::zeros(grid, meta.k0, meta.n0);
    field.z_or_t = meta.z_or_t;
    for (d, c) in field.data.iter_mut().zip(raw.chunks_exact(2)) {
        *d = Complex64::new(c[0], c[1]);
    }
    Ok(field)
}

/// Reads a raster written by [`write_raster`].
pub fn read_raster(path: &Path) -> Result<(GridMeta, Vec<f64>)> {
    let meta = read_meta(path)?;
    if meta.channels != 1 {
        return Err(Error::domain("sidecar does not describe a real raster"));
    }
    let values = read_samples(path, meta.shape[0] * meta.shape[1])?;
    Ok((meta, values))
}

/// A numeric table with a header line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma-separated, 17 significant digits; NaN written as `nan`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| fmt_value(*v)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Whitespace-separated with a `#` header, readable by gnuplot.
    pub fn write_dat<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.header.join(" "))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| fmt_value(*v)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<PathBuf> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(path.to_path_buf())
    }

    pub fn save_dat(&self, path: &Path) -> Result<PathBuf> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_dat(&mut out)?;
        out.flush()?;
        Ok(path.to_path_buf())
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Output field time series: t, Re E, Im E, |E|².
pub fn gem_series(history: &GemHistory) -> Table {
    let mut table = Table::new(&["t", "re_e_out", "im_e_out", "abs_e_out_sq"]);
    for (t, e) in history.t.iter().zip(&history.output) {
        table.push(vec![*t, e.re, e.im, e.norm_sqr()]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_bit_exact() {
        let grid = Grid::new(4, 2, 1e-6, 2e-6).unwrap();
        let mut f = ComplexField::from_fn(grid, 8e6, 1.0, |x, y| Complex64::new(x * 1e6, -y / 3e-6));
        f.z_or_t = 0.25;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let written = write_field(&f, &path).unwrap();
        assert!(written[1].ends_with("f.json"));
        let back = read_field(&path).unwrap();
        assert_eq!(back, f);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 8 * 16);
    }

    #[test]
    fn raster_length_is_checked() {
        let grid = Grid::square(4, 1.0).unwrap();
        let f = ComplexField::zeros(grid, 1.0, 1.0);
        let dir = tempfile::tempdir().unwrap();
        assert!(write_raster(&[0.0; 3], &f, "1", &dir.path().join("r.bin")).is_err());
        write_raster(&[1.5; 16], &f, "V^2/m^2", &dir.path().join("r.bin")).unwrap();
        let (meta, v) = read_raster(&dir.path().join("r.bin")).unwrap();
        assert_eq!(meta.channels, 1);
        assert_eq!(v, vec![1.5; 16]);
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![0.1, f64::NAN]);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, "a,b\n1.0000000000000001e-1,nan\n");
        let parsed: f64 = s.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed, 0.1);
    }
}
