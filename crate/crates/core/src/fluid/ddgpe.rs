use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::nlse::{AbsorbingBoundary, MAX_PHASE_PER_STEP};
use super::{ComplexField, Fft2, Grid};
use crate::constants::HBAR;
use crate::error::{Error, Result};

/// Drive and dissipation for
/// iħ∂_tψ = (−ħ²∇²/2m* + V − iħγ_LP/2 + g|ψ|²)ψ + P.
///
/// The pump is written in the frame rotating at the pump frequency, so P is slowly varying and
/// a pump detuning enters as a uniform offset in V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Pump map P(r⊥) (J × field units), row-major on the grid.
    pub pump: Vec<Complex64>,
    /// Polariton loss rate γ_LP (1/s).
    pub loss_rate: f64,
    /// External potential V(r⊥) (J); uniform zero when absent.
    #[serde(default)]
    pub potential: Option<Vec<f64>>,
    /// Contact interaction g (J·m²).
    pub interaction: f64,
    /// Effective mass m* (kg).
    pub mass: f64,
    /// Pump switched on as 1 − exp(−t/τ) when given.
    #[serde(default)]
    pub pump_rise_time: Option<f64>,
}

impl DriveSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.loss_rate >= 0.0) {
            return Err(Error::config("loss_rate", "must be non-negative"));
        }
        if !(self.mass > 0.0) {
            return Err(Error::config("mass", "must be positive"));
        }
        if self.pump.len() != grid.len() {
            return Err(Error::config("pump", "map does not match the grid shape"));
        }
        if self.potential.as_ref().is_some_and(|v| v.len() != grid.len()) {
            return Err(Error::config("potential", "map does not match the grid shape"));
        }
        if self.pump_rise_time.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::config("pump_rise_time", "must be positive"));
        }
        Ok(())
    }

    fn pump_scale(&self, t: f64) -> f64 {
        self.pump_rise_time.map_or(1.0, |tau| 1.0 - (-t / tau).exp())
    }
}

// (e^{z} − 1)/z, accurate near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Strang split-step integrator for the driven-dissipative GPE.
///
/// The real-space substep treats ψ' = aψ + b exactly for frozen a; the density inside a is
/// taken at the midpoint of a predictor step.
#[derive(Debug)]
pub struct DdgpePropagator {
    grid: Grid,
    fft: Fft2,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    drive: DriveSpec,
    mask: Option<Vec<f64>>,
    steps_taken: usize,
}

impl DdgpePropagator {
    pub fn new(grid: Grid, drive: DriveSpec, dt: f64, boundary: Option<AbsorbingBoundary>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::config("dt", "step must be positive"));
        }
        drive.validate(&grid)?;
        let norm = 1.0 / grid.len() as f64;
        let rate = HBAR / (2.0 * drive.mass);
        let k2 = grid.k_squared();
        let half = k2.iter().map(|q| Complex64::from_polar(norm, -rate * q * dt / 2.0)).collect();
        let full = k2.iter().map(|q| Complex64::from_polar(norm, -rate * q * dt)).collect();
        let mask = boundary.map(|b| b.mask(&grid, dt)).transpose()?;
        Ok(DdgpePropagator {
            grid,
            fft: Fft2::new(&grid),
            dt,
            half,
            full,
            drive,
            mask,
            steps_taken: 0,
        })
    }

    fn real_space_step(&mut self, data: &mut [Complex64], t_mid: f64) -> Result<()> {
        let h = self.dt;
        let d = &self.drive;
        let pump_scale = d.pump_scale(t_mid);
        let mut max_phase: f64 = 0.0;
        for (idx, psi) in data.iter_mut().enumerate() {
            let v = d.potential.as_ref().map_or(0.0, |p| p[idx]);
            let b = Complex64::new(0.0, -1.0) * d.pump[idx] * pump_scale / HBAR;
            let advance = |rho: f64| {
                let a = Complex64::new(-0.5 * d.loss_rate, -(v + d.interaction * rho) / HBAR);
                let z = a * h;
                z.exp() * *psi + b * h * phi1(z)
            };
            let rho0 = psi.norm_sqr();
            let predicted = advance(rho0);
            let rho_mid = 0.5 * (rho0 + predicted.norm_sqr());
            max_phase = max_phase.max((d.interaction * rho_mid * h / HBAR).abs());
            *psi = advance(rho_mid);
            if let Some(m) = &self.mask {
                *psi *= m[idx];
            }
        }
        if max_phase > MAX_PHASE_PER_STEP {
            return Err(Error::StepSize {
                phase: max_phase,
                limit: MAX_PHASE_PER_STEP,
            });
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Blowup {
                step: self.steps_taken,
            });
        }
        Ok(())
    }

    pub fn run(&mut self, field: &mut ComplexField, steps: usize) -> Result<()> {
        if field.grid != self.grid {
            return Err(Error::domain("field grid differs from the propagator grid"));
        }
        if steps == 0 {
            return Ok(());
        }
        let t0 = field.z_or_t;
        let data = &mut field.data;
        self.fft.forward(data);
        for (x, m) in data.iter_mut().zip(&self.half) {
            *x *= m;
        }
        for i in 0..steps {
            self.fft.inverse_unnormalized(data);
            self.steps_taken += 1;
            self.real_space_step(data, t0 + (i as f64 + 0.5) * self.dt)?;
            self.fft.forward(data);
            let kinetic = if i + 1 == steps { &self.half } else { &self.full };
            for (x, m) in data.iter_mut().zip(kinetic) {
                *x *= m;
            }
        }
        self.fft.inverse_unnormalized(data);
        field.z_or_t += steps as f64 * self.dt;
        Ok(())
    }
}

/// Advances the driven-dissipative GPE by `steps` steps of size `dt`.
pub fn split_step_ddgpe(mut field: ComplexField, drive: &DriveSpec, dt: f64, steps: usize) -> Result<ComplexField> {
    field.check_finite()?;
    let mut prop = DdgpePropagator::new(field.grid, drive.clone(), dt, None)?;
    prop.run(&mut field, steps)?;
    Ok(field)
}

/// Max-norm of the stationary residual (H − iħγ/2)ψ + P, relative to max|P| (or to max|Hψ|
/// without pump).
pub fn ddgpe_residual(field: &ComplexField, drive: &DriveSpec) -> Result<f64> {
    drive.validate(&field.grid)?;
    let grid = field.grid;
    let mut lap = field.data.clone();
    let mut fft = Fft2::new(&grid);
    fft.forward(&mut lap);
    for (x, q) in lap.iter_mut().zip(grid.k_squared()) {
        *x *= HBAR * HBAR * q / (2.0 * drive.mass);
    }
    fft.inverse(&mut lap);
    let scale_t = drive.pump_scale(field.z_or_t);
    let mut worst: f64 = 0.0;
    let mut reference: f64 = 0.0;
    for (idx, psi) in field.data.iter().enumerate() {
        let v = drive.potential.as_ref().map_or(0.0, |p| p[idx]);
        let h_psi = lap[idx]
            + (Complex64::new(v + drive.interaction * psi.norm_sqr(), -0.5 * HBAR * drive.loss_rate)) * psi;
        let p = drive.pump[idx] * scale_t;
        worst = worst.max((h_psi + p).norm());
        reference = reference.max(if drive.pump.iter().any(|p| p.norm() > 0.0) {
            p.norm()
        } else {
            h_psi.norm()
        });
    }
    Ok(if reference > 0.0 { worst / reference } else { worst })
}
