use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{linear_fit, parabolic_offset, radial_profile, KerrFluid};
use crate::error::{Error, Result};
use crate::fluid::{ComplexField, Grid, MediumSpec, NlsePropagator};

/// Dispersive shock from a large density hump on a uniform background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockConfig {
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    #[serde(default = "one")]
    pub n0: f64,
    #[serde(rename = "chi3_m2_per_V2")]
    pub chi3: f64,
    #[serde(rename = "background_amplitude_V_per_m")]
    pub background: f64,
    /// Peak density excess of the hump relative to the background.
    pub perturbation: f64,
    #[serde(rename = "perturbation_waist_xi")]
    pub waist: f64,
    /// 1 or 2.
    pub dimension: usize,
    pub grid_points: usize,
    #[serde(rename = "cell_xi", default = "half")]
    pub cell: f64,
    #[serde(rename = "length_nl")]
    pub length: f64,
    #[serde(rename = "dz_nl", default = "default_dz")]
    pub dz: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_dz() -> f64 {
    0.02
}
fn default_snapshots() -> usize {
    12
}

impl ShockConfig {
    pub fn validate(&self) -> Result<()> {
        KerrFluid::new(self.wavelength, self.n0, self.chi3, self.background)?;
        if self.dimension != 1 && self.dimension != 2 {
            return Err(Error::config("dimension", "must be 1 or 2"));
        }
        if !(self.perturbation >= 0.0) || !self.perturbation.is_finite() {
            return Err(Error::config("perturbation", "must be finite and non-negative"));
        }
        if !(self.waist > 0.0) || !(self.cell > 0.0) {
            return Err(Error::config("perturbation_waist_xi", "waist and cell must be positive"));
        }
        if !(self.length > 0.0) || !(self.dz > 0.0) {
            return Err(Error::config("length_nl", "length and step must be positive"));
        }
        if self.snapshots < 2 {
            return Err(Error::config("snapshots", "need at least two snapshots"));
        }
        Grid::line(self.grid_points, 1.0)?;
        Ok(())
    }
}

/// Radius of one tracked feature per snapshot; `None` once it is lost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTrack {
    pub name: String,
    pub z: Vec<f64>,
    pub radius: Vec<f64>,
    /// Fitted a in r ∝ z^a; reported, not asserted.
    pub exponent: Option<f64>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockResult {
    pub healing_length: f64,
    pub nonlinear_length: f64,
    /// point1 (slope onset), point2 (maximum), point3 (first minimum behind the maximum).
    pub features: Vec<FeatureTrack>,
    /// ρ(0)/ρ₀ − 1 at the last snapshot.
    pub central_contrast: f64,
    /// rms of ρ/ρ₀ − 1 ahead of the front at the last snapshot.
    pub noise_floor: f64,
    /// (r, ρ/ρ₀) at the last snapshot.
    pub final_profile: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
    pub final_field: ComplexField,
}

#[derive(Debug, Clone, Copy)]
struct Features {
    point1: Option<f64>,
    point2: Option<f64>,
    point3: Option<f64>,
}

fn features(rho: &[f64], dr: f64, rho0: f64) -> Features {
    let none = Features {
        point1: None,
        point2: None,
        point3: None,
    };
    let n = rho.len();
    if n < 5 {
        return none;
    }
    let slope: Vec<f64> = (1..n - 1).map(|i| (rho[i + 1] - rho[i - 1]) / (2.0 * dr)).collect();
    let max_slope = slope.iter().map(|s| s.abs()).fold(0.0, f64::max);
    if !(max_slope > 1e-9 * rho0 / dr) {
        return none;
    }
    let point1 = slope
        .iter()
        .rposition(|s| s.abs() > 0.1 * max_slope)
        .map(|i| (i + 1) as f64 * dr);
    let m = (1..n - 1).max_by(|&a, &b| rho[a].total_cmp(&rho[b])).unwrap_or(0);
    let point2 = (m > 0).then(|| (m as f64 + parabolic_offset(rho[m - 1], rho[m], rho[m + 1])) * dr);
    let point3 = (1..m)
        .rev()
        .find(|&i| rho[i] < rho[i - 1] && rho[i] <= rho[i + 1])
        .map(|i| (i as f64 + parabolic_offset(rho[i - 1], rho[i], rho[i + 1])) * dr);
    Features { point1, point2, point3 }
}

fn profile(field: &ComplexField, dr: f64) -> Vec<f64> {
    let g = field.grid;
    let rho = field.density();
    if g.is_1d() {
        let c = g.nx / 2;
        (0..c).map(|i| 0.5 * (rho[c + i] + rho[c - i])).collect()
    } else {
        radial_profile(&rho, &g, dr, g.nx / 2)
    }
}

fn power_law(z: &[f64], r: &[f64]) -> Option<f64> {
    let (lz, lr): (Vec<f64>, Vec<f64>) = z
        .iter()
        .zip(r)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    if lz.len() < 3 {
        return None;
    }
    linear_fit(&lz, &lr).map(|(_, b)| b)
}

/// Propagates the hump and tracks the three shock features over `snapshots` planes.
pub fn shockwave_run(config: &ShockConfig) -> Result<ShockResult> {
    config.validate()?;
    let fluid = KerrFluid::new(config.wavelength, config.n0, config.chi3, config.background)?;
    let xi = fluid.healing_length();
    let z_nl = fluid.nonlinear_length();
    let dx = config.cell * xi;
    let grid = if config.dimension == 1 {
        Grid::line(config.grid_points, dx)?
    } else {
        Grid::square(config.grid_points, dx)?
    };
    let rho0 = fluid.field_sq;
    let w = config.waist * xi;
    let a = config.perturbation;
    let mut field = ComplexField::from_fn(grid, fluid.k0, fluid.n0, |x, y| {
        Complex64::new((rho0 * (1.0 + a * (-(x * x + y * y) / (w * w)).exp())).sqrt(), 0.0)
    });
    let steps = (config.length / config.dz).round().max(1.0) as usize;
    let dz = config.length * z_nl / steps as f64;
    let every = (steps / config.snapshots).max(1);
    let medium = MediumSpec::kerr(config.chi3, config.length * z_nl);
    let mut prop = NlsePropagator::new(grid, fluid.k0, fluid.n0, &medium, dz, None)?;

    let names = ["point1", "point2", "point3"];
    let mut tracks: Vec<FeatureTrack> = names
        .iter()
        .map(|n| FeatureTrack {
            name: n.to_string(),
            z: Vec::new(),
            radius: Vec::new(),
            exponent: None,
            truncated: false,
        })
        .collect();
    let mut warnings = Vec::new();
    let edge = 0.5 * grid.extent_x() - 5.0 * xi;
    let mut front_hit_edge = false;
    prop.run_observed(&mut field, steps, every, |f| {
        if f.z_or_t == 0.0 {
            return Ok(());
        }
        let rho = profile(f, dx);
        let feats = features(&rho, dx, rho0);
        for (track, value) in tracks.iter_mut().zip([feats.point1, feats.point2, feats.point3]) {
            match value {
                Some(r) if !track.truncated => {
                    track.z.push(f.z_or_t);
                    track.radius.push(r);
                }
                None if !track.z.is_empty() => track.truncated = true,
                _ => {}
            }
        }
        if feats.point1.is_some_and(|r| r > edge) {
            front_hit_edge = true;
        }
        Ok(())
    })?;
    if front_hit_edge {
        warnings.push("shock front reached the window edge; late features wrap around".to_string());
    }
    for t in &mut tracks {
        t.exponent = power_law(&t.z, &t.radius);
        if t.truncated {
            warnings.push(format!("{} lost before the last snapshot", t.name));
        }
    }

    let rho = profile(&field, dx);
    let rel: Vec<f64> = rho.iter().map(|r| r / rho0).collect();
    let central_contrast = rel[0] - 1.0;
    let ahead_from = tracks[0]
        .radius
        .last()
        .map_or(rel.len(), |r| ((r + 5.0 * xi) / dx).ceil() as usize);
    let ahead_to = (edge / dx) as usize;
    let noise_floor = if ahead_from + 2 < ahead_to {
        let s = &rel[ahead_from..ahead_to];
        (s.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() / s.len() as f64).sqrt()
    } else {
        warnings.push("no quiet region ahead of the front for the noise floor".to_string());
        f64::NAN
    };
    Ok(ShockResult {
        healing_length: xi,
        nonlinear_length: z_nl,
        features: tracks,
        central_contrast,
        noise_floor,
        final_profile: rel.iter().enumerate().map(|(i, &v)| (i as f64 * dx, v)).collect(),
        warnings,
        final_field: field,
    })
}

impl ShockResult {
    pub fn feature(&self, name: &str) -> Option<&FeatureTrack> {
        self.features.iter().find(|f| f.name == name)
    }
}
