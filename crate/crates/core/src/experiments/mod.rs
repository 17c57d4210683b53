//! End-to-end protocols on the fluid engine: Bogoliubov probe scan, ring counting, shock
//! tracking, angular-momentum injection and defect scattering.

mod defect;
mod oam;
mod probe;
mod rings;
mod shock;

pub use defect::{defect_scattering, DefectConfig, DefectResult};
pub use oam::{lg_vortex_ring, oam_injection, LgPumpConfig, LgResult, OamConfig, OamMode, OamResult};
pub use probe::{bogoliubov_probe_scan, probe_perturbation, ProbeRow, ProbeScanConfig, ProbeScanResult, Splitting};
pub use rings::{count_rings, ring_count_n2, RingConfig, RingFrame, RingResult};
pub use shock::{shockwave_run, FeatureTrack, ShockConfig, ShockResult};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dispersion::BogoliubovParams;
use crate::error::{Error, Result};
use crate::fluid::Grid;

/// Scales of a defocusing Kerr fluid of light with uniform background |E₀|².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrFluid {
    pub k0: f64,
    pub n0: f64,
    pub chi3: f64,
    pub field_sq: f64,
}

impl KerrFluid {
    pub fn new(wavelength: f64, n0: f64, chi3: f64, amplitude: f64) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(Error::config("wavelength_m", "must be positive"));
        }
        if !(n0 > 0.0) {
            return Err(Error::config("n0", "must be positive"));
        }
        if !(chi3 < 0.0) {
            return Err(Error::config("chi3_m2_per_V2", "a fluid of light needs a defocusing (negative) χ³"));
        }
        if !(amplitude > 0.0) {
            return Err(Error::config("pump_amplitude_V_per_m", "must be positive"));
        }
        Ok(KerrFluid {
            k0: 2.0 * PI * n0 / wavelength,
            n0,
            chi3,
            field_sq: amplitude * amplitude,
        })
    }

    pub fn params(&self) -> BogoliubovParams {
        BogoliubovParams::Optical {
            k0: self.k0,
            chi3: self.chi3,
            field_sq: self.field_sq,
            n0: self.n0,
        }
    }

    /// gn = −k₀χ³|E₀|²/2n₀² (1/m).
    pub fn interaction(&self) -> f64 {
        -self.k0 * self.chi3 * self.field_sq / (2.0 * self.n0 * self.n0)
    }

    pub fn sound_speed(&self) -> f64 {
        (self.interaction() / self.k0).sqrt()
    }

    pub fn healing_length(&self) -> f64 {
        1.0 / (self.k0 * self.sound_speed())
    }

    /// Nonlinear length 1/gn = k₀ξ².
    pub fn nonlinear_length(&self) -> f64 {
        1.0 / self.interaction()
    }

    pub fn amplitude(&self) -> f64 {
        self.field_sq.sqrt()
    }
}

/// Weighted centroid along x of `weights` restricted to cells where `keep(x, y)` holds.
pub(crate) fn centroid_x(weights: &[f64], grid: &Grid, keep: impl Fn(f64, f64) -> bool) -> Option<f64> {
    let mut sum = 0.0;
    let mut moment = 0.0;
    for j in 0..grid.ny {
        let y = grid.y(j);
        for i in 0..grid.nx {
            let x = grid.x(i);
            if keep(x, y) {
                let w = weights[grid.index(i, j)];
                sum += w;
                moment += w * x;
            }
        }
    }
    (sum > 0.0).then(|| moment / sum)
}

/// Azimuthally averaged profile in bins of width `dr` around the grid centre.
pub(crate) fn radial_profile(values: &[f64], grid: &Grid, dr: f64, bins: usize) -> Vec<f64> {
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for j in 0..grid.ny {
        let y = grid.y(j);
        for i in 0..grid.nx {
            let r = grid.x(i).hypot(y);
            let b = (r / dr + 0.5) as usize;
            if b < bins {
                sum[b] += values[grid.index(i, j)];
                count[b] += 1;
            }
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect()
}

/// Vertex offset of the parabola through (−1, a), (0, b), (1, c), clamped to ±½.
pub(crate) fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let denom = a - 2.0 * b + c;
    if denom == 0.0 || !denom.is_finite() {
        0.0
    } else {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    }
}

/// Least-squares line y = a + b·x; returns (a, b).
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fluid_scales_are_consistent() {
        let f = KerrFluid::new(780e-9, 1.0, -2e-14, 1e5).unwrap();
        assert!((f.nonlinear_length() - f.k0 * f.healing_length().powi(2)).abs() < 1e-12 * f.nonlinear_length());
        let p = f.params();
        assert!((p.sound_speed().unwrap() - f.sound_speed()).abs() < 1e-15);
        assert!(KerrFluid::new(780e-9, 1.0, 2e-14, 1e5).is_err());
    }

    #[test]
    fn fit_and_refinement_helpers() {
        let (a, b) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
        // parabola with vertex at 0.25
        let f = |x: f64| -(x - 0.25) * (x - 0.25);
        assert!((parabolic_offset(f(-1.0), f(0.0), f(1.0)) - 0.25).abs() < 1e-14);
    }
}
