use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{centroid_x, KerrFluid};
use crate::error::{Error, Result};
use crate::fluid::{ComplexField, Fft2, Grid, MediumSpec, NlsePropagator};

/// Pump-probe measurement of the Bogoliubov branch. Lengths are in healing lengths ξ and
/// propagation in nonlinear lengths z_NL = k₀ξ², both fixed by the pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeScanConfig {
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    #[serde(default = "one")]
    pub n0: f64,
    #[serde(rename = "chi3_m2_per_V2")]
    pub chi3: f64,
    #[serde(rename = "pump_amplitude_V_per_m")]
    pub pump_amplitude: f64,
    /// Gaussian pump waist; a plane-wave pump when absent.
    #[serde(rename = "pump_waist_xi", default)]
    pub pump_waist: Option<f64>,
    /// Probe amplitude relative to the pump, at most 0.05.
    pub probe_fraction: f64,
    #[serde(rename = "probe_waist_xi")]
    pub probe_waist: f64,
    /// Ratio of the probe waist along y to the waist along x.
    #[serde(default = "three")]
    pub probe_aspect: f64,
    #[serde(rename = "k_perp_inv_xi")]
    pub k_perp: Vec<f64>,
    /// Start of the k⊥ > 0 packets along x.
    #[serde(rename = "start_xi", default = "default_start")]
    pub start: f64,
    #[serde(rename = "length_nl")]
    pub length: f64,
    #[serde(rename = "dz_nl", default = "default_dz")]
    pub dz: f64,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(rename = "cell_xi", default = "half")]
    pub cell: f64,
}

fn one() -> f64 {
    1.0
}
fn three() -> f64 {
    3.0
}
fn half() -> f64 {
    0.5
}
fn default_start() -> f64 {
    -70.0
}
fn default_dz() -> f64 {
    0.025
}
fn default_points() -> usize {
    512
}

impl ProbeScanConfig {
    pub fn validate(&self) -> Result<()> {
        KerrFluid::new(self.wavelength, self.n0, self.chi3, self.pump_amplitude)?;
        if !(self.probe_fraction >= 0.0 && self.probe_fraction <= 0.05) {
            return Err(Error::config("probe_fraction", "must lie in [0, 0.05] to stay in the Bogoliubov regime"));
        }
        if !self.k_perp.contains(&0.0) {
            return Err(Error::config("k_perp_inv_xi", "the scan must include k⊥ = 0"));
        }
        if self.k_perp.iter().any(|&k| !(k >= 0.0) || !k.is_finite()) {
            return Err(Error::config("k_perp_inv_xi", "wavevectors must be finite and non-negative"));
        }
        if !(self.probe_waist > 0.0) || !(self.probe_aspect > 0.0) {
            return Err(Error::config("probe_waist_xi", "must be positive"));
        }
        if self.pump_waist.is_some_and(|w| !(w > 0.0)) {
            return Err(Error::config("pump_waist_xi", "must be positive"));
        }
        if !(self.length > 0.0) || !(self.dz > 0.0) {
            return Err(Error::config("length_nl", "length and step must be positive"));
        }
        if !(self.cell > 0.0) || self.cell > 1.0 {
            return Err(Error::config("cell_xi", "the grid must resolve ξ (cell ≤ 1 ξ)"));
        }
        let k_nyquist = std::f64::consts::PI / self.cell;
        if let Some(k) = self.k_perp.iter().find(|&&k| k > 0.5 * k_nyquist) {
            return Err(Error::config("k_perp_inv_xi", format!("{k}/ξ is above half the grid Nyquist limit")));
        }
        Grid::square(self.grid_points, 1.0)?;
        Ok(())
    }

    pub fn fluid(&self) -> Result<KerrFluid> {
        KerrFluid::new(self.wavelength, self.n0, self.chi3, self.pump_amplitude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    /// k⊥ (1/m).
    pub k_perp: f64,
    pub k_perp_xi: f64,
    /// Centroid displacement over the medium divided by its length.
    pub group_velocity: f64,
    pub analytic: f64,
    pub relative_error: f64,
    /// Output centroid (m).
    pub centroid_out: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    pub left_speed: f64,
    pub right_speed: f64,
    pub sound_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeScanResult {
    pub sound_speed: f64,
    pub healing_length: f64,
    pub nonlinear_length: f64,
    pub medium_length: f64,
    pub rows: Vec<ProbeRow>,
    /// (k⊥, Ω_B measured, Ω_B analytic), all in 1/m, with Ω_B(0) = 0.
    pub dispersion: Vec<(f64, f64, f64)>,
    pub splitting: Option<Splitting>,
    /// max |E_ref − E₀e^{−i gn L}| / E₀ for the pump-only run.
    pub reference_residual: f64,
    /// Differential field δE at the exit for the largest k⊥.
    pub snapshot: ComplexField,
}

struct Setup {
    fluid: KerrFluid,
    grid: Grid,
    xi: f64,
    dz: f64,
    steps: usize,
    medium: MediumSpec,
}

impl Setup {
    fn new(c: &ProbeScanConfig) -> Result<Self> {
        c.validate()?;
        let fluid = c.fluid()?;
        let xi = fluid.healing_length();
        let z_nl = fluid.nonlinear_length();
        let grid = Grid::square(c.grid_points, c.cell * xi)?;
        let steps = (c.length / c.dz).round().max(1.0) as usize;
        let dz = c.length * z_nl / steps as f64;
        Ok(Setup {
            fluid,
            grid,
            xi,
            dz,
            steps,
            medium: MediumSpec::kerr(c.chi3, c.length * z_nl),
        })
    }

    fn pump(&self, c: &ProbeScanConfig) -> ComplexField {
        let a = self.fluid.amplitude();
        let w = c.pump_waist.map(|w| w * self.xi);
        ComplexField::from_fn(self.grid, self.fluid.k0, self.fluid.n0, |x, y| {
            let env = w.map_or(1.0, |w| (-(x * x + y * y) / (w * w)).exp());
            Complex64::new(a * env, 0.0)
        })
    }

    fn propagate(&self, mut field: ComplexField) -> Result<ComplexField> {
        let mut prop = NlsePropagator::new(self.grid, self.fluid.k0, self.fluid.n0, &self.medium, self.dz, None)?;
        prop.run(&mut field, self.steps)?;
        Ok(field)
    }

    fn start(&self, c: &ProbeScanConfig, k: f64) -> f64 {
        if k == 0.0 {
            0.0
        } else {
            c.start * self.xi
        }
    }

    // Pure Bogoliubov quasi-particle u e^{ikx} + v e^{−ikx} for k > 0, a density bump for k = 0.
    fn probed(&self, c: &ProbeScanConfig, k_xi: f64, fraction: f64) -> Result<ComplexField> {
        let k = k_xi / self.xi;
        let gn = self.fluid.interaction();
        let eps = k * k / (2.0 * self.fluid.k0);
        let omega = self.fluid.params().spectrum(k)?;
        let v = if k == 0.0 { 0.0 } else { -gn / (eps + gn + omega) };
        let amp = fraction * self.fluid.amplitude();
        let (wx, wy) = (c.probe_waist * self.xi, c.probe_waist * c.probe_aspect * self.xi);
        let x0 = self.start(c, k);
        let mut field = self.pump(c);
        for j in 0..self.grid.ny {
            let y = self.grid.y(j);
            for i in 0..self.grid.nx {
                let x = self.grid.x(i);
                let env = (-((x - x0) / wx).powi(2) - (y / wy).powi(2)).exp() * amp;
                let carrier = Complex64::from_polar(1.0, k * x) + v * Complex64::from_polar(1.0, -k * x);
                field.data[self.grid.index(i, j)] += env * carrier;
            }
        }
        Ok(field)
    }
}

// ∫δρ dy along x. Sound packets are mostly phase near k⊥ = 0, so |δE|² would also weight the
// phase plateau left between them; integrating over y keeps only the k_y = 0 part, which
// splits like a 1D bump.
fn projected_density_change(delta: &ComplexField, reference: &ComplexField) -> Vec<f64> {
    let g = delta.grid;
    let mut out = vec![0.0; g.nx];
    for j in 0..g.ny {
        for (i, o) in out.iter_mut().enumerate() {
            let n = g.index(i, j);
            *o += (delta.data[n] + reference.data[n]).norm_sqr() - reference.data[n].norm_sqr();
        }
    }
    out
}

// Centroid along x of the right-moving Bogoliubov packet in δE. The field is projected on
// k_y = 0 and each k_x > 0 component is mapped to its quasi-particle amplitude
// b = u δψ_k − v δψ*_{−k}, which drops the counter-propagating partner and the static phase
// left behind by the envelope. The centroid is taken within `window` of the peak of |b|², since
// the cut at k_x = 0 leaves a slowly decaying tail across the box.
fn forward_packet_centroid(
    delta: &ComplexField,
    reference: &ComplexField,
    fluid: &KerrFluid,
    window: f64,
) -> Result<Option<f64>> {
    let g = delta.grid;
    let line = Grid::line(g.nx, g.dx)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); g.nx];
    for j in 0..g.ny {
        for (i, p) in psi.iter_mut().enumerate() {
            let n = g.index(i, j);
            let r = reference.data[n];
            if r.norm() > 0.0 {
                *p += delta.data[n] * r.conj() / (r.norm() * fluid.amplitude());
            }
        }
    }
    let mut fft = Fft2::new(&line);
    fft.forward(&mut psi);
    let params = fluid.params();
    let gn = fluid.interaction();
    let kx = line.kx();
    let mut b = vec![Complex64::new(0.0, 0.0); g.nx];
    for (m, &q) in kx.iter().enumerate() {
        if q <= 0.0 {
            continue;
        }
        let eps = params.free_energy(q);
        let omega = params.spectrum(q)?;
        let u = (0.5 * (eps + gn) / omega + 0.5).sqrt();
        let v = -(0.5 * (eps + gn) / omega - 0.5).max(0.0).sqrt();
        let mirror = (g.nx - m) % g.nx;
        b[m] = u * psi[m] - v * psi[mirror].conj();
    }
    fft.inverse(&mut b);
    let weights: Vec<f64> = b.iter().map(|c| c.norm_sqr()).collect();
    let peak = (0..g.nx).max_by(|&a, &c| weights[a].total_cmp(&weights[c])).map(|i| line.x(i));
    Ok(peak.and_then(|p| centroid_x(&weights, &line, |x, _| (x - p).abs() < window)))
}

/// Differential field (pump + probe) − (pump only) at the exit face.
pub fn probe_perturbation(config: &ProbeScanConfig, k_perp_xi: f64, fraction: f64) -> Result<ComplexField> {
    let setup = Setup::new(config)?;
    let reference = setup.propagate(setup.pump(config))?;
    let mut out = setup.propagate(setup.probed(config, k_perp_xi, fraction)?)?;
    for (d, r) in out.data.iter_mut().zip(&reference.data) {
        *d -= r;
    }
    Ok(out)
}

/// Measures v_g(k⊥) from the centroid drift of the differential field and integrates it into
/// Ω_B(k⊥) with Ω_B(0) = 0.
pub fn bogoliubov_probe_scan(config: &ProbeScanConfig) -> Result<ProbeScanResult> {
    let setup = Setup::new(config)?;
    if config.probe_fraction == 0.0 {
        return Err(Error::config("probe_fraction", "a scan needs a nonzero probe"));
    }
    let fluid = setup.fluid;
    let params = fluid.params();
    let length = setup.dz * setup.steps as f64;
    let reference = setup.propagate(setup.pump(config))?;
    let reference_residual = if config.pump_waist.is_none() {
        let expect = Complex64::from_polar(fluid.amplitude(), -fluid.interaction() * length);
        reference.data.iter().map(|e| (e - expect).norm()).fold(0.0, f64::max) / fluid.amplitude()
    } else {
        f64::NAN
    };

    let mut ks: Vec<f64> = config.k_perp.clone();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let half_extent = 0.5 * setup.grid.extent_x();
    let margin = 2.0 * config.probe_waist * setup.xi;
    let mut rows = Vec::with_capacity(ks.len());
    let mut splitting = None;
    let mut snapshot = None;
    for &k_xi in &ks {
        let k = k_xi / setup.xi;
        let mut delta = setup.propagate(setup.probed(config, k_xi, config.probe_fraction)?)?;
        for (d, r) in delta.data.iter_mut().zip(&reference.data) {
            *d -= r;
        }
        let x0 = setup.start(config, k);
        let check = |x: f64| -> Result<f64> {
            if x.abs() > half_extent - margin {
                return Err(Error::Measurement(format!(
                    "probe packet at k⊥ = {k_xi}/ξ left the tracking window (x = {x:.3e} m)"
                )));
            }
            Ok(x)
        };
        let (v_g, centroid_out) = if k == 0.0 {
            let profile = projected_density_change(&delta, &reference);
            let half = |keep: &dyn Fn(f64) -> bool| {
                let (mut sum, mut moment) = (0.0, 0.0);
                for (i, p) in profile.iter().enumerate() {
                    let x = setup.grid.x(i);
                    if keep(x) {
                        sum += p * p;
                        moment += p * p * x;
                    }
                }
                (sum > 0.0).then(|| moment / sum)
            };
            let right = half(&|x| x > x0).ok_or_else(|| Error::Measurement("empty right-moving packet".into()))?;
            let left = half(&|x| x < x0).ok_or_else(|| Error::Measurement("empty left-moving packet".into()))?;
            let (right, left) = (check(right)?, check(left)?);
            splitting = Some(Splitting {
                left_speed: (x0 - left) / length,
                right_speed: (right - x0) / length,
                sound_speed: fluid.sound_speed(),
            });
            (0.5 * (right - left) / length, 0.5 * (right + left))
        } else {
            let c = forward_packet_centroid(&delta, &reference, &fluid, 3.0 * config.probe_waist * setup.xi)?
                .ok_or_else(|| Error::Measurement("empty probe packet".into()))?;
            let c = check(c)?;
            ((c - x0) / length, c)
        };
        let analytic = params.group_velocity(k)?;
        rows.push(ProbeRow {
            k_perp: k,
            k_perp_xi: k_xi,
            group_velocity: v_g,
            analytic,
            relative_error: (v_g - analytic) / analytic,
            centroid_out,
        });
        snapshot = Some(delta);
    }

    let mut dispersion = Vec::with_capacity(rows.len());
    let mut omega = 0.0;
    for (i, r) in rows.iter().enumerate() {
        if i > 0 {
            let p = &rows[i - 1];
            omega += 0.5 * (r.group_velocity + p.group_velocity) * (r.k_perp - p.k_perp);
        }
        dispersion.push((r.k_perp, omega, params.spectrum(r.k_perp)?));
    }

    Ok(ProbeScanResult {
        sound_speed: fluid.sound_speed(),
        healing_length: setup.xi,
        nonlinear_length: fluid.nonlinear_length(),
        medium_length: length,
        rows,
        dispersion,
        splitting,
        reference_residual,
        snapshot: snapshot.expect("k⊥ list is non-empty"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_config() -> ProbeScanConfig {
        ProbeScanConfig {
            wavelength: 780e-9,
            n0: 1.0,
            chi3: -2e-14,
            pump_amplitude: 1e5,
            pump_waist: None,
            probe_fraction: 0.02,
            probe_waist: 6.0,
            probe_aspect: 2.0,
            k_perp: vec![0.0, 1.0],
            start: -30.0,
            length: 15.0,
            dz: 0.05,
            grid_points: 128,
            cell: 1.0,
        }
    }

    #[test]
    fn small_scan_tracks_the_branch() {
        let r = bogoliubov_probe_scan(&small_config()).unwrap();
        assert!(r.reference_residual < 1e-9, "{}", r.reference_residual);
        let s = r.splitting.unwrap();
        assert!((s.left_speed / s.sound_speed - 1.0).abs() < 0.05, "{s:?}");
        assert!((s.right_speed / s.sound_speed - 1.0).abs() < 0.05, "{s:?}");
        let row = r.rows[1];
        assert!(row.relative_error.abs() < 0.1, "{row:?}");
        assert_eq!(r.dispersion[0].1, 0.0);
    }

    #[test]
    fn zero_probe_leaves_no_residual() {
        let d = probe_perturbation(&small_config(), 1.0, 0.0).unwrap();
        assert_eq!(d.power(), 0.0);
    }

    #[test]
    fn scan_needs_zero_wavevector() {
        let mut c = small_config();
        c.k_perp = vec![1.0];
        assert!(matches!(c.validate(), Err(Error::Config { .. })));
        c.k_perp = vec![0.0];
        c.probe_fraction = 0.2;
        assert!(c.validate().is_err());
    }
}
