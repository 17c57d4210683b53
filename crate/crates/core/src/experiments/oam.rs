use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fluid::{
    detect_vortices, split_step_ddgpe, square_loop, winding_number, ComplexField, DriveSpec, Grid, MediumSpec,
    NlsePropagator, Vortex,
};

/// How the four-pump pattern is evolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OamMode {
    /// Paraxial propagation to a fixed plane.
    Nlse {
        #[serde(rename = "chi3_m2_per_V2")]
        chi3: f64,
        #[serde(rename = "length_m")]
        length: f64,
        #[serde(rename = "dz_m")]
        dz: f64,
    },
    /// Driven-dissipative evolution towards a quasi-steady pattern; the spots act as the pump P.
    Ddgpe {
        #[serde(rename = "mass_kg")]
        mass: f64,
        #[serde(rename = "loss_rate_per_s")]
        loss_rate: f64,
        #[serde(rename = "interaction_J_m2")]
        interaction: f64,
        #[serde(rename = "dt_s")]
        dt: f64,
        steps: usize,
    },
}

impl OamMode {
    fn validate(&self) -> Result<()> {
        match *self {
            OamMode::Nlse { length, dz, chi3 } => {
                if !(length > 0.0) || !(dz > 0.0) || !chi3.is_finite() {
                    return Err(Error::config("length_m", "length and step must be positive"));
                }
            }
            OamMode::Ddgpe { mass, dt, steps, .. } => {
                if !(mass > 0.0) || !(dt > 0.0) || steps == 0 {
                    return Err(Error::config("mass_kg", "mass, dt and steps must be positive"));
                }
            }
        }
        Ok(())
    }

    fn evolve(&self, grid: Grid, k0: f64, n0: f64, pump: Vec<Complex64>) -> Result<ComplexField> {
        match *self {
            OamMode::Nlse { chi3, length, dz } => {
                let steps = (length / dz).round().max(1.0) as usize;
                let medium = MediumSpec::kerr(chi3, length);
                let mut prop = NlsePropagator::new(grid, k0, n0, &medium, length / steps as f64, None)?;
                let mut field = ComplexField::zeros(grid, k0, n0);
                field.data = pump;
                prop.run(&mut field, steps)?;
                Ok(field)
            }
            OamMode::Ddgpe {
                mass,
                loss_rate,
                interaction,
                dt,
                steps,
            } => {
                let drive = DriveSpec {
                    pump,
                    loss_rate,
                    potential: None,
                    interaction,
                    mass,
                    pump_rise_time: None,
                };
                split_step_ddgpe(ComplexField::zeros(grid, k0, n0), &drive, dt, steps)
            }
        }
    }
}

/// Four tilted pumps on a square of circumradius R, each aimed at the centre and rotated by φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OamConfig {
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    #[serde(default = "one")]
    pub n0: f64,
    /// Spot amplitude (V/m in NLSE mode, pump units in ddGPE mode).
    pub pump_amplitude: f64,
    #[serde(rename = "pump_waist_m")]
    pub waist: f64,
    #[serde(rename = "pump_distance_m")]
    pub distance: f64,
    #[serde(rename = "k_inplane_per_m")]
    pub k_inplane: f64,
    #[serde(rename = "tilt_rad")]
    pub tilt: f64,
    /// Spots are set to zero beyond this radius from their centre.
    #[serde(rename = "cut_radius_m")]
    pub cut_radius: f64,
    #[serde(rename = "core_radius_m")]
    pub core_radius: f64,
    pub grid_points: usize,
    #[serde(rename = "cell_m")]
    pub cell: f64,
    #[serde(flatten)]
    pub mode: OamMode,
}

fn one() -> f64 {
    1.0
}

impl OamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !(self.n0 > 0.0) {
            return Err(Error::config("wavelength_m", "wavelength and n0 must be positive"));
        }
        if !(self.waist > 0.0) || !(self.distance > 0.0) || !(self.cut_radius > 0.0) {
            return Err(Error::config("pump_distance_m", "distance, waist and cut radius must be positive"));
        }
        if !(self.k_inplane >= 0.0) || !self.tilt.is_finite() {
            return Err(Error::config("k_inplane_per_m", "need a finite tilt and non-negative |k|"));
        }
        if !(self.core_radius > 0.0) {
            return Err(Error::config("core_radius_m", "must be positive"));
        }
        let grid = Grid::square(self.grid_points, self.cell)?;
        if self.distance + self.cut_radius > 0.5 * grid.extent_x() {
            return Err(Error::config("pump_distance_m", "pumps do not fit inside the window"));
        }
        if self.k_inplane > 0.5 * PI / self.cell {
            return Err(Error::config("k_inplane_per_m", "in-plane wavevector is not resolved by the grid"));
        }
        self.mode.validate()
    }

    /// L/ħ = R|k|sin φ per photon.
    pub fn angular_momentum(&self) -> f64 {
        self.distance * self.k_inplane * self.tilt.sin()
    }

    /// Sum of the four spots on `grid`.
    pub fn pump_map(&self, grid: &Grid) -> Vec<Complex64> {
        let r = self.distance;
        let centres = [(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)];
        let (s, c) = self.tilt.sin_cos();
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for &(cx, cy) in &centres {
            // inward unit vector rotated by −φ
            let (ux, uy) = (-cx / r, -cy / r);
            let (kx, ky) = (self.k_inplane * (ux * c + uy * s), self.k_inplane * (-ux * s + uy * c));
            for j in 0..grid.ny {
                let dy = grid.y(j) - cy;
                for i in 0..grid.nx {
                    let dx = grid.x(i) - cx;
                    let d2 = dx * dx + dy * dy;
                    if d2 > self.cut_radius * self.cut_radius {
                        continue;
                    }
                    let amp = self.pump_amplitude * (-d2 / (self.waist * self.waist)).exp();
                    out[grid.index(i, j)] += Complex64::from_polar(amp, kx * dx + ky * dy);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OamResult {
    pub angular_momentum: f64,
    /// Vortices inside the core region.
    pub vortices: Vec<Vortex>,
    pub net_charge: i64,
    pub positive: usize,
    pub negative: usize,
    /// Vortices within two cells of the core edge, left out of the census.
    pub edge_excluded: usize,
    pub field: ComplexField,
}

pub fn oam_injection(config: &OamConfig) -> Result<OamResult> {
    config.validate()?;
    let grid = Grid::square(config.grid_points, config.cell)?;
    let k0 = 2.0 * PI * config.n0 / config.wavelength;
    let pump = config.pump_map(&grid);
    let field = config.mode.evolve(grid, k0, config.n0, pump)?;
    Ok(census(field, config.core_radius, config.cell, config.angular_momentum()))
}

fn census(field: ComplexField, core_radius: f64, cell: f64, angular_momentum: f64) -> OamResult {
    let margin = 2.0 * cell;
    let all = detect_vortices(&field, core_radius + margin);
    let (vortices, excluded): (Vec<Vortex>, Vec<Vortex>) =
        all.into_iter().partition(|v| v.x.hypot(v.y) <= core_radius - margin);
    OamResult {
        angular_momentum,
        net_charge: vortices.iter().map(|v| v.charge).sum(),
        positive: vortices.iter().filter(|v| v.charge > 0).count(),
        negative: vortices.iter().filter(|v| v.charge < 0).count(),
        edge_excluded: excluded.len(),
        vortices,
        field,
    }
}

/// Laguerre-Gauss pump of charge m. A weak coherent Gaussian background, when present, lifts
/// the m-fold degeneracy of the core into a ring of unit vortices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgPumpConfig {
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    #[serde(default = "one")]
    pub n0: f64,
    pub charge: i64,
    pub pump_amplitude: f64,
    #[serde(rename = "pump_waist_m")]
    pub waist: f64,
    /// Background amplitude relative to the pump amplitude.
    #[serde(default)]
    pub background: f64,
    #[serde(rename = "core_radius_m")]
    pub core_radius: f64,
    pub grid_points: usize,
    #[serde(rename = "cell_m")]
    pub cell: f64,
    #[serde(flatten)]
    pub mode: OamMode,
}

impl LgPumpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !(self.n0 > 0.0) {
            return Err(Error::config("wavelength_m", "wavelength and n0 must be positive"));
        }
        if !(self.waist > 0.0) || !self.pump_amplitude.is_finite() {
            return Err(Error::config("pump_waist_m", "need a positive waist and finite amplitude"));
        }
        if !(self.background >= 0.0) {
            return Err(Error::config("background", "must be non-negative"));
        }
        if !(self.core_radius > 0.0) {
            return Err(Error::config("core_radius_m", "must be positive"));
        }
        let grid = Grid::square(self.grid_points, self.cell)?;
        if self.core_radius + 2.0 * self.cell > 0.5 * grid.extent_x() {
            return Err(Error::config("core_radius_m", "core region does not fit inside the window"));
        }
        self.mode.validate()
    }

    /// A(√2r/w)^|m| e^{−r²/w²} e^{imθ}, scaled to peak amplitude A on its ring, plus the
    /// background A·b·e^{−r²/w²}.
    pub fn pump_map(&self, grid: &Grid) -> Vec<Complex64> {
        let m = self.charge.unsigned_abs() as i32;
        let peak = (m as f64).powf(0.5 * m as f64) * (-0.5 * m as f64).exp();
        let mut out = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = (grid.x(i), grid.y(j));
                let r2 = x * x + y * y;
                let envelope = self.pump_amplitude * (-r2 / (self.waist * self.waist)).exp();
                let radial = (2.0 * r2).sqrt() / self.waist;
                out.push(envelope * (Complex64::from_polar(radial.powi(m) / peak, self.charge as f64 * y.atan2(x)) + self.background));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgResult {
    /// Plaquette census inside the core region; angular momentum per photon is the charge.
    pub census: OamResult,
    /// Winding around the square of half-side core_radius.
    pub boundary_winding: i64,
}

pub fn lg_vortex_ring(config: &LgPumpConfig) -> Result<LgResult> {
    config.validate()?;
    let grid = Grid::square(config.grid_points, config.cell)?;
    let k0 = 2.0 * PI * config.n0 / config.wavelength;
    let field = config.mode.evolve(grid, k0, config.n0, config.pump_map(&grid))?;
    let phase: Vec<f64> = field.data.iter().map(|z| z.arg()).collect();
    let half = (config.core_radius / config.cell).round() as usize;
    let centre = config.grid_points / 2;
    let boundary_winding = winding_number(&phase, &grid, &square_loop(centre, centre, half), Some(&field.density()))?;
    Ok(LgResult {
        census: census(field, config.core_radius, config.cell, config.charge as f64),
        boundary_winding,
    })
}
