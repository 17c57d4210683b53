use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexField, Fft2, Grid};
use crate::error::{Error, Result};

/// Largest nonlinear phase (rad) a single real-space step may imprint.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

/// Nonlinear medium for the paraxial NLSE
/// i∂_zE = −(1/2k₀)∇⊥²E − (δn k₀/n₀)E − (k₀χ³/2n₀²)|E|²E − (k₀χ⁵/2n₀²)|E|⁴E − i(α/2)E.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    /// m²/V²; negative is defocusing.
    pub chi3: f64,
    /// m⁴/V⁴.
    #[serde(default)]
    pub chi5: Option<f64>,
    /// Linear index perturbation δn(r⊥), row-major on the propagation grid.
    #[serde(default)]
    pub delta_n: Option<Vec<f64>>,
    /// Intensity absorption coefficient α (1/m).
    #[serde(default)]
    pub absorption: f64,
    /// Medium length (m).
    pub length: f64,
}

impl MediumSpec {
    pub fn kerr(chi3: f64, length: f64) -> Self {
        MediumSpec {
            chi3,
            chi5: None,
            delta_n: None,
            absorption: 0.0,
            length,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.absorption >= 0.0) {
            return Err(Error::config("absorption", "must be non-negative"));
        }
        if !(self.length >= 0.0) {
            return Err(Error::config("length", "must be non-negative"));
        }
        if let Some(dn) = &self.delta_n {
            if dn.len() != grid.len() {
                return Err(Error::config(
                    "delta_n",
                    format!("map has {} samples, grid has {}", dn.len(), grid.len()),
                ));
            }
        }
        if !self.chi3.is_finite() || self.chi5.is_some_and(|c| !c.is_finite()) {
            return Err(Error::config("chi3", "nonlinear coefficients must be finite"));
        }
        Ok(())
    }

    /// Nonlinear index change χ³|E|²/(2n₀) produced by |E|² in this model.
    pub fn index_change(&self, field_sq: f64, n0: f64) -> f64 {
        self.chi3 * field_sq / (2.0 * n0)
    }
}

/// Super-Gaussian absorbing layer at the grid edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingBoundary {
    /// Fraction of each half-width occupied by the absorbing band.
    pub width_fraction: f64,
    /// Peak damping rate (1/m or 1/s) at the grid edge.
    pub strength: f64,
}

impl AbsorbingBoundary {
    /// Per-step multiplicative mask exp(−strength·h·(1 − W(x)W(y))).
    pub(crate) fn mask(&self, grid: &Grid, h: f64) -> Result<Vec<f64>> {
        if !(self.width_fraction > 0.0 && self.width_fraction < 1.0) || !(self.strength >= 0.0) {
            return Err(Error::config(
                "absorbing_boundary",
                "width_fraction must lie in (0, 1) and strength must be non-negative",
            ));
        }
        let window = |r: f64, half: f64| {
            let r0 = (1.0 - self.width_fraction) * half;
            (-(r / r0).powi(16)).exp()
        };
        let wx: Vec<f64> = (0..grid.nx).map(|i| window(grid.x(i), grid.extent_x() / 2.0)).collect();
        let wy: Vec<f64> = if grid.is_1d() {
            vec![1.0]
        } else {
            (0..grid.ny).map(|j| window(grid.y(j), grid.extent_y() / 2.0)).collect()
        };
        let mut out = Vec::with_capacity(grid.len());
        for &b in &wy {
            for &a in &wx {
                out.push((-self.strength * h * (1.0 - a * b)).exp());
            }
        }
        Ok(out)
    }
}

/// Strang split-step integrator for the paraxial NLSE.
///
/// Kinetic half-steps are merged between consecutive steps, so a run of n steps costs n + 1
/// forward/inverse transform pairs.
#[derive(Debug)]
pub struct NlsePropagator {
    grid: Grid,
    fft: Fft2,
    dz: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    linear_phase: Option<Vec<f64>>,
    mask: Option<Vec<f64>>,
    chi3_rate: f64,
    chi5_rate: f64,
    absorption: f64,
    steps_taken: usize,
}

impl NlsePropagator {
    pub fn new(
        grid: Grid,
        k0: f64,
        n0: f64,
        medium: &MediumSpec,
        dz: f64,
        boundary: Option<AbsorbingBoundary>,
    ) -> Result<Self> {
        if !(dz > 0.0) {
            return Err(Error::config("dz", "step must be positive"));
        }
        if !(k0 > 0.0) || !(n0 > 0.0) {
            return Err(Error::config("k0", "carrier wavenumber and index must be positive"));
        }
        medium.validate(&grid)?;
        let norm = 1.0 / grid.len() as f64;
        let k2 = grid.k_squared();
        let half = k2
            .iter()
            .map(|q| Complex64::from_polar(norm, -q * dz / (4.0 * k0)))
            .collect();
        let full = k2
            .iter()
            .map(|q| Complex64::from_polar(norm, -q * dz / (2.0 * k0)))
            .collect();
        let linear_phase = medium
            .delta_n
            .as_ref()
            .map(|dn| dn.iter().map(|d| d * k0 / n0 * dz).collect());
        let mask = boundary.map(|b| b.mask(&grid, dz)).transpose()?;
        Ok(NlsePropagator {
            grid,
            fft: Fft2::new(&grid),
            dz,
            half,
            full,
            linear_phase,
            mask,
            chi3_rate: k0 * medium.chi3 / (2.0 * n0 * n0),
            chi5_rate: k0 * medium.chi5.unwrap_or(0.0) / (2.0 * n0 * n0),
            absorption: medium.absorption,
            steps_taken: 0,
        })
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    // Exact solution of ∂_zE = i(lin + a₃|E|² + a₅|E|⁴)E − (α/2)E over one step.
    fn real_space_step(&mut self, data: &mut [Complex64]) -> Result<()> {
        let h = self.dz;
        let a = self.absorption;
        let (int1, int2) = if a > 0.0 {
            ((1.0 - (-a * h).exp()) / a, (1.0 - (-2.0 * a * h).exp()) / (2.0 * a))
        } else {
            (h, h)
        };
        let decay = (-0.5 * a * h).exp();
        let c3 = self.chi3_rate * int1;
        let c5 = self.chi5_rate * int2;
        let mut max_phase: f64 = 0.0;
        for (idx, e) in data.iter_mut().enumerate() {
            let rho = e.norm_sqr();
            let nl = c3 * rho + c5 * rho * rho;
            max_phase = max_phase.max(nl.abs());
            let lin = self.linear_phase.as_ref().map_or(0.0, |p| p[idx]);
            let amp = self.mask.as_ref().map_or(decay, |m| decay * m[idx]);
            *e *= Complex64::from_polar(amp, lin + nl);
        }
        if max_phase > MAX_PHASE_PER_STEP {
            return Err(Error::StepSize {
                phase: max_phase,
                limit: MAX_PHASE_PER_STEP,
            });
        }
        if max_phase.is_nan() || data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Blowup {
                step: self.steps_taken,
            });
        }
        Ok(())
    }

    fn multiply(data: &mut [Complex64], by: &[Complex64]) {
        for (d, m) in data.iter_mut().zip(by) {
            *d *= m;
        }
    }

    /// Advances `field` by `steps` steps of size dz.
    pub fn run(&mut self, field: &mut ComplexField, steps: usize) -> Result<()> {
        if field.grid != self.grid {
            return Err(Error::domain("field grid differs from the propagator grid"));
        }
        if steps == 0 {
            return Ok(());
        }
        let data = &mut field.data;
        self.fft.forward(data);
        Self::multiply(data, &self.half);
        for i in 0..steps {
            self.fft.inverse_unnormalized(data);
            self.steps_taken += 1;
            self.real_space_step(data)?;
            self.fft.forward(data);
            let kinetic = if i + 1 == steps { &self.half } else { &self.full };
            Self::multiply(data, kinetic);
        }
        self.fft.inverse_unnormalized(data);
        field.z_or_t += steps as f64 * self.dz;
        Ok(())
    }

    /// Runs `steps` steps, calling `observe` on the starting field and then every `every` steps
    /// (and at the end).
    pub fn run_observed(
        &mut self,
        field: &mut ComplexField,
        steps: usize,
        every: usize,
        mut observe: impl FnMut(&ComplexField) -> Result<()>,
    ) -> Result<()> {
        let every = every.max(1);
        observe(field)?;
        let mut done = 0;
        while done < steps {
            let chunk = every.min(steps - done);
            self.run(field, chunk)?;
            done += chunk;
            observe(field)?;
        }
        Ok(())
    }
}

/// Propagates `field` through `steps` NLSE steps of size `dz`.
pub fn split_step_nlse(mut field: ComplexField, medium: &MediumSpec, dz: f64, steps: usize) -> Result<ComplexField> {
    field.check_finite()?;
    let mut prop = NlsePropagator::new(field.grid, field.k0, field.n0, medium, dz, None)?;
    prop.run(&mut field, steps)?;
    Ok(field)
}

/// Exact free-space (Fresnel) propagation over `z` in the paraxial approximation.
pub fn fresnel_propagate(field: &ComplexField, z: f64) -> ComplexField {
    let mut out = field.clone();
    let mut fft = Fft2::new(&field.grid);
    fft.forward(&mut out.data);
    for (d, q) in out.data.iter_mut().zip(field.grid.k_squared()) {
        *d *= Complex64::from_polar(1.0, -q * z / (2.0 * field.k0));
    }
    fft.inverse(&mut out.data);
    out.z_or_t += z;
    out
}
