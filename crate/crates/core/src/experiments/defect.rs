use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fluid::{drag_force, ComplexField, Fft2, Grid, MediumSpec, NlsePropagator};

/// Plane-wave flow past a Gaussian index defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectConfig {
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    #[serde(default = "one")]
    pub n0: f64,
    #[serde(rename = "chi3_m2_per_V2")]
    pub chi3: f64,
    #[serde(rename = "amplitude_V_per_m")]
    pub amplitude: f64,
    /// Transverse flow velocity k_flow/k₀ (rad); rounded to the nearest grid wavevector.
    #[serde(rename = "flow_velocity_rad")]
    pub flow_velocity: f64,
    /// Peak index change of the defect; negative is repulsive.
    pub defect_delta_n: f64,
    /// 1/e radius of the Gaussian defect.
    #[serde(rename = "defect_radius_m")]
    pub defect_radius: f64,
    pub grid_points: usize,
    #[serde(rename = "cell_m")]
    pub cell: f64,
    #[serde(rename = "length_m")]
    pub length: f64,
    #[serde(rename = "phase_step_rad", default = "default_phase_step")]
    pub phase_step: f64,
}

fn one() -> f64 {
    1.0
}
fn default_phase_step() -> f64 {
    0.05
}

impl DefectConfig {
    pub fn k0(&self) -> f64 {
        2.0 * PI * self.n0 / self.wavelength
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !(self.n0 > 0.0) {
            return Err(Error::config("wavelength_m", "wavelength and n0 must be positive"));
        }
        if !(self.chi3 <= 0.0) || !(self.amplitude > 0.0) {
            return Err(Error::config("chi3_m2_per_V2", "need a defocusing or zero χ³ and a positive amplitude"));
        }
        let grid = Grid::square(self.grid_points, self.cell)?;
        if 2.0 * self.defect_radius < 4.0 * self.cell {
            return Err(Error::config("defect_radius_m", "defect diameter must span at least four cells"));
        }
        if !(self.length > 0.0) || !(self.phase_step > 0.0 && self.phase_step <= 0.1) {
            return Err(Error::config("length_m", "length must be positive and phase_step_rad in (0, 0.1]"));
        }
        if self.flow_velocity * self.k0() > 0.5 * PI / grid.dx {
            return Err(Error::config("flow_velocity_rad", "flow wavevector is not resolved by the grid"));
        }
        Ok(())
    }

    /// gn = −k₀χ³|E|²/2n₀² (1/m).
    pub fn interaction(&self) -> f64 {
        -self.k0() * self.chi3 * self.amplitude * self.amplitude / (2.0 * self.n0 * self.n0)
    }

    pub fn sound_speed(&self) -> f64 {
        (self.interaction() / self.k0()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectResult {
    /// Flow velocity actually used (on the grid lattice).
    pub flow_velocity: f64,
    pub sound_speed: f64,
    /// (max − min)/(max + min) of the density in the upstream window.
    pub fringe_contrast: f64,
    /// (x_min, x_max, |y| max) of the upstream window (m).
    pub fringe_window: (f64, f64, f64),
    /// Fraction of the output power on the elastic ring |k| = k_flow, pump spot excluded.
    pub ring_power: f64,
    /// Drag force −∫ρ∇V over the total power, with V = −k₀δn/n₀.
    pub drag: [f64; 2],
    /// Half-angle of the downstream wake from the flow axis (rad); only for v > c_s.
    pub cone_half_angle: Option<f64>,
    pub field: ComplexField,
}

fn defect_map(grid: &Grid, dn: f64, r: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            out.push(dn * (-(x * x + y * y) / (r * r)).exp());
        }
    }
    out
}

// Angle of the ray (from +x, downstream) carrying the most density disturbance.
fn wake_angle(rho: &[f64], grid: &Grid, rho0: f64, r_in: f64, r_out: f64) -> Option<f64> {
    let bins = 90;
    let mut sum = vec![0.0; bins];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            let r = x.hypot(y);
            if x <= 0.0 || r < r_in || r > r_out {
                continue;
            }
            let theta = y.abs().atan2(x);
            let b = ((theta / (0.5 * PI)) * bins as f64) as usize;
            if b < bins {
                // normalize by the annulus length so every ray is weighted alike
                sum[b] += (rho[grid.index(i, j)] - rho0).abs() / r;
            }
        }
    }
    let m = (0..bins).max_by(|&a, &b| sum[a].total_cmp(&sum[b]))?;
    (sum[m] > 0.0).then(|| (m as f64 + 0.5) * 0.5 * PI / bins as f64)
}

pub fn defect_scattering(config: &DefectConfig) -> Result<DefectResult> {
    config.validate()?;
    let grid = Grid::square(config.grid_points, config.cell)?;
    let k0 = config.k0();
    let dk = 2.0 * PI / grid.extent_x();
    let k_flow = (config.flow_velocity * k0 / dk).round() * dk;
    let delta_n = defect_map(&grid, config.defect_delta_n, config.defect_radius);
    let potential: Vec<f64> = delta_n.iter().map(|d| -k0 * d / config.n0).collect();
    let gn = config.interaction();
    let rate = gn.max(0.1 * k0 * config.defect_delta_n.abs() / config.n0);
    let steps = ((config.length * rate / config.phase_step).ceil() as usize).max(10);
    let medium = MediumSpec {
        chi3: config.chi3,
        chi5: None,
        delta_n: Some(delta_n),
        absorption: 0.0,
        length: config.length,
    };
    let mut prop = NlsePropagator::new(grid, k0, config.n0, &medium, config.length / steps as f64, None)?;
    let mut field = ComplexField::from_fn(grid, k0, config.n0, |x, _| Complex64::from_polar(config.amplitude, k_flow * x));
    prop.run(&mut field, steps)?;

    let rho = field.density();
    let r = config.defect_radius;
    let window = (-6.0 * r, -2.0 * r, r);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            if x >= window.0 && x <= window.1 && y.abs() <= window.2 {
                let v = rho[grid.index(i, j)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let fringe_contrast = if hi + lo > 0.0 { (hi - lo) / (hi + lo) } else { 0.0 };

    let mut spectrum = field.data.clone();
    Fft2::new(&grid).forward(&mut spectrum);
    let (kx, ky) = (grid.kx(), grid.ky());
    let band = 3.0 * dk;
    let spot = band;
    let mut ring = 0.0;
    let mut total = 0.0;
    for (j, &qy) in ky.iter().enumerate() {
        for (i, &qx) in kx.iter().enumerate() {
            let p = spectrum[grid.index(i, j)].norm_sqr();
            total += p;
            let on_ring = (qx.hypot(qy) - k_flow.abs()).abs() <= band;
            let in_spot = (qx - k_flow).hypot(qy) <= spot;
            if on_ring && !in_spot {
                ring += p;
            }
        }
    }
    let ring_power = if total > 0.0 { ring / total } else { 0.0 };

    let power = field.power();
    let f = drag_force(&rho, &potential, &grid)?;
    let drag = if power > 0.0 { [f[0] / power, f[1] / power] } else { [0.0, 0.0] };
    let v = k_flow / k0;
    let cs = config.sound_speed();
    let cone_half_angle = (cs > 0.0 && v > cs)
        .then(|| wake_angle(&rho, &grid, config.amplitude.powi(2), 4.0 * r, 0.4 * grid.extent_x()))
        .flatten();
    Ok(DefectResult {
        flow_velocity: v,
        sound_speed: cs,
        fringe_contrast,
        fringe_window: window,
        ring_power,
        drag,
        cone_half_angle,
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(amplitude: f64) -> DefectConfig {
        DefectConfig {
            wavelength: 780e-9,
            n0: 1.0,
            chi3: -2e-14,
            amplitude,
            flow_velocity: 0.0122,
            defect_delta_n: -2e-4,
            defect_radius: 20e-6,
            grid_points: 128,
            cell: 5e-6,
            length: 0.02,
            phase_step: 0.05,
        }
    }

    #[test]
    fn small_defect_is_refused() {
        let mut c = config(1e3);
        c.defect_radius = 5e-6;
        assert!(matches!(c.validate(), Err(Error::Config { .. })));
    }

    #[test]
    fn linear_flow_shows_fringes() {
        let r = defect_scattering(&config(1e3)).unwrap();
        assert!(r.fringe_contrast > 0.2, "{}", r.fringe_contrast);
        assert!(r.ring_power > 0.0);
        assert!(r.fringe_contrast >= 0.0 && r.ring_power >= 0.0);
    }
}
