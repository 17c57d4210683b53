use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use lightfluid::atomic::{
    doppler_averaged_chi, doppler_linewidth, saturated_chi, saturation_parameter, two_level_steady_state, AtomSpec,
    VaporState,
};
use lightfluid::constants::{ELEMENTARY_CHARGE, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use lightfluid::dispersion::{
    cavity_dispersion, landau_critical_velocity, polariton_branches, strong_coupling_check, CavitySpec,
    DispersionCurve,
};
use lightfluid::eit::{group_velocity, probe_susceptibility, three_level_steady_state, ThreeLevelSpec};
use lightfluid::experiments::{
    bogoliubov_probe_scan, defect_scattering, lg_vortex_ring, oam_injection, ring_count_n2, shockwave_run,
    DefectConfig, KerrFluid, LgPumpConfig, OamConfig, OamResult, ProbeScanConfig, RingConfig, ShockConfig,
};
use lightfluid::gem::{gradient_schedule, multi_pulse_run, GaussianPulse, GemConfig};
use lightfluid::io::{gem_series, Table};

use crate::error::{CliError, Result};
use crate::output::Outputs;

pub struct ExperimentInfo {
    pub name: &'static str,
    pub about: &'static str,
    /// Example configuration documenting the schema.
    pub example: &'static str,
}

pub const CATALOG: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "vapor_spectrum",
        about: "Doppler-broadened saturated susceptibility and transmission of a rubidium cell vs detuning",
        example: "configs/vapor_spectrum.toml",
    },
    ExperimentInfo {
        name: "vapor_point",
        about: "Two-level vapor response at one detuning and intensity (sweep target)",
        example: "configs/vapor_point.toml",
    },
    ExperimentInfo {
        name: "eit_window",
        about: "Probe susceptibility of a Λ system and the group index at two-photon resonance",
        example: "configs/eit_window.toml",
    },
    ExperimentInfo {
        name: "bogoliubov_curve",
        about: "Analytic Bogoliubov branch of a photon fluid and its Landau critical velocity",
        example: "configs/bogoliubov_curve.toml",
    },
    ExperimentInfo {
        name: "polariton_dispersion",
        about: "Lower and upper polariton branches with Hopfield coefficients",
        example: "configs/polariton_dispersion.toml",
    },
    ExperimentInfo {
        name: "bogoliubov_scan",
        about: "Pump-probe measurement of the Bogoliubov dispersion from wavepacket drift",
        example: "configs/bogoliubov_scan.toml",
    },
    ExperimentInfo {
        name: "ring_count",
        about: "Self-phase-modulation ring counting and n2 estimate over an intensity sweep",
        example: "configs/ring_count.toml",
    },
    ExperimentInfo {
        name: "shockwave",
        about: "Dispersive shock of a density hump with tracked front features (1D or 2D)",
        example: "configs/shockwave.toml",
    },
    ExperimentInfo {
        name: "oam_injection",
        about: "Vortex census after four tilted pumps inject orbital angular momentum",
        example: "configs/oam_injection.toml",
    },
    ExperimentInfo {
        name: "lg_vortex_ring",
        about: "Ring of same-sign vortices from a Laguerre-Gauss pump of charge m",
        example: "configs/lg_vortex_ring.toml",
    },
    ExperimentInfo {
        name: "defect_scattering",
        about: "Flow past an index defect: upstream fringes, scattered ring power and drag",
        example: "configs/defect_scattering.toml",
    },
    ExperimentInfo {
        name: "gem_echo",
        about: "Gradient echo memory: storage and recall of one or more Gaussian pulses",
        example: "configs/gem_echo.toml",
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    #[default]
    Rb87D2,
    Rb85D1,
}

impl Line {
    pub fn atom(self) -> AtomSpec {
        match self {
            Line::Rb87D2 => AtomSpec::rubidium87_d2(),
            Line::Rb85D1 => AtomSpec::rubidium85_d1(),
        }
    }
}

fn yes() -> bool {
    true
}

fn mhz(v: f64) -> f64 {
    2.0 * PI * 1e6 * v
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(CliError::config("temperature_K", format!("must be a positive temperature, got {t}")));
    }
    Ok(())
}

fn check_scan(min: f64, max: f64, points: usize) -> Result<()> {
    if !min.is_finite() || !max.is_finite() || !(max > min) {
        return Err(CliError::config("detuning_max_MHz", "need detuning_min_MHz < detuning_max_MHz"));
    }
    if points < 3 {
        return Err(CliError::config("points", "need at least 3 points"));
    }
    Ok(())
}

fn scan(min: f64, max: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| min + (max - min) * i as f64 / (points - 1) as f64)
}

fn field_sq(intensity: f64) -> f64 {
    2.0 * intensity / (EPSILON_0 * SPEED_OF_LIGHT)
}

fn engine<T>(context: &str, r: lightfluid::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::engine(context, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaporSpectrumConfig {
    #[serde(default)]
    pub line: Line,
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
    #[serde(rename = "detuning_min_MHz")]
    pub detuning_min: f64,
    #[serde(rename = "detuning_max_MHz")]
    pub detuning_max: f64,
    pub points: usize,
    #[serde(rename = "intensity_W_per_m2", default)]
    pub intensity: f64,
    #[serde(rename = "length_m")]
    pub length: f64,
    #[serde(default = "yes")]
    pub doppler: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaporPointConfig {
    #[serde(default)]
    pub line: Line,
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
    #[serde(rename = "detuning_MHz")]
    pub detuning: f64,
    #[serde(rename = "intensity_W_per_m2")]
    pub intensity: f64,
    #[serde(rename = "length_m")]
    pub length: f64,
    #[serde(default = "yes")]
    pub doppler: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EitWindowConfig {
    #[serde(default)]
    pub line: Line,
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
    #[serde(rename = "control_rabi_MHz")]
    pub control_rabi: f64,
    #[serde(rename = "probe_rabi_MHz", default = "default_probe_rabi")]
    pub probe_rabi: f64,
    #[serde(rename = "control_detuning_MHz", default)]
    pub control_detuning: f64,
    /// Ground-coherence decay rate γ₀ (1/s).
    #[serde(rename = "ground_decay_per_s", default)]
    pub ground_decay: f64,
    /// Fraction of the excited-state decay going to |g⟩.
    #[serde(default = "half")]
    pub branching: f64,
    #[serde(rename = "detuning_min_MHz")]
    pub detuning_min: f64,
    #[serde(rename = "detuning_max_MHz")]
    pub detuning_max: f64,
    pub points: usize,
    #[serde(rename = "length_m")]
    pub length: f64,
}

fn default_probe_rabi() -> f64 {
    0.01
}
fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovCurveConfig {
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    #[serde(default = "one")]
    pub n0: f64,
    #[serde(rename = "chi3_m2_per_V2")]
    pub chi3: f64,
    #[serde(rename = "amplitude_V_per_m")]
    pub amplitude: f64,
    #[serde(rename = "k_max_inv_xi")]
    pub k_max: f64,
    pub points: usize,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonConfig {
    pub cavity_index: f64,
    #[serde(default = "one_u32")]
    pub cavity_mode: u32,
    /// Photon energy at k⊥ = 0; sets the cavity length.
    #[serde(rename = "cavity_energy_meV")]
    pub cavity_energy: f64,
    #[serde(rename = "exciton_energy_meV")]
    pub exciton_energy: f64,
    /// Half the splitting at zero detuning.
    #[serde(rename = "rabi_meV")]
    pub rabi: f64,
    #[serde(rename = "photon_linewidth_meV", default)]
    pub photon_linewidth: f64,
    #[serde(rename = "exciton_linewidth_meV", default)]
    pub exciton_linewidth: f64,
    #[serde(rename = "k_max_per_m")]
    pub k_max: f64,
    pub points: usize,
}

fn one_u32() -> u32 {
    1
}

/// meV → rad/s
fn mev(v: f64) -> f64 {
    v * 1e-3 * ELEMENTARY_CHARGE / HBAR
}

fn to_mev(w: f64) -> f64 {
    w * HBAR / (1e-3 * ELEMENTARY_CHARGE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GemEchoConfig {
    /// Single-atom coupling g (rad/s).
    #[serde(rename = "coupling_per_s")]
    pub coupling: f64,
    #[serde(rename = "control_rabi_MHz")]
    pub control_rabi: f64,
    #[serde(rename = "detuning_MHz")]
    pub detuning: f64,
    #[serde(rename = "excited_linewidth_MHz")]
    pub excited_linewidth: f64,
    pub optical_depth: f64,
    #[serde(rename = "ground_decay_per_s", default)]
    pub ground_decay: f64,
    #[serde(rename = "length_m")]
    pub length: f64,
    /// Gradient-broadened bandwidth |η|L/2π.
    #[serde(rename = "broadening_MHz")]
    pub broadening: f64,
    #[serde(rename = "t_flip_us")]
    pub t_flip: f64,
    pub z_points: usize,
    pub t_points: usize,
    #[serde(rename = "t_start_us")]
    pub t_start: f64,
    #[serde(rename = "t_end_us")]
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    #[serde(rename = "pulse_fwhm_us")]
    pub pulse_fwhm: f64,
    #[serde(rename = "pulse_centers_us", default = "default_centers")]
    pub pulse_centers: Vec<f64>,
}

fn one_usize() -> usize {
    1
}
fn default_centers() -> Vec<f64> {
    vec![0.0]
}

impl GemEchoConfig {
    pub fn engine_config(&self, strict: bool) -> Result<GemConfig> {
        if !(self.length > 0.0) {
            return Err(CliError::config("length_m", "must be positive"));
        }
        let eta = 2.0 * PI * 1e6 * self.broadening / self.length;
        let schedule = gradient_schedule(self.t_flip * 1e-6, eta).map_err(|_| CliError::config("t_flip_us", "must be positive"))?;
        let config = GemConfig {
            coupling: self.coupling,
            control_rabi: mhz(self.control_rabi),
            detuning: mhz(self.detuning),
            excited_linewidth: mhz(self.excited_linewidth),
            optical_depth: self.optical_depth,
            ground_decay: self.ground_decay,
            length: self.length,
            schedule,
            z_points: self.z_points,
            t_points: self.t_points,
            t_start: self.t_start * 1e-6,
            t_end: self.t_end * 1e-6,
            record_every: self.record_every,
            strict,
        };
        config.validate().map_err(|e| CliError::engine("gem_echo", e))?;
        Ok(config)
    }

    pub fn pulses(&self) -> Result<Vec<GaussianPulse>> {
        if self.pulse_centers.is_empty() {
            return Err(CliError::config("pulse_centers_us", "need at least one pulse"));
        }
        if !(self.pulse_fwhm > 0.0) {
            return Err(CliError::config("pulse_fwhm_us", "must be positive"));
        }
        Ok(self
            .pulse_centers
            .iter()
            .map(|&c| GaussianPulse {
                center: c * 1e-6,
                fwhm: self.pulse_fwhm * 1e-6,
                amplitude: 1.0,
            })
            .collect())
    }
}

/// A parsed and validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    VaporSpectrum(VaporSpectrumConfig),
    VaporPoint(VaporPointConfig),
    EitWindow(EitWindowConfig),
    BogoliubovCurve(BogoliubovCurveConfig),
    Polariton(PolaritonConfig),
    BogoliubovScan(ProbeScanConfig),
    RingCount(RingConfig),
    Shockwave(ShockConfig),
    Oam(OamConfig),
    LgRing(LgPumpConfig),
    Defect(DefectConfig),
    GemEcho(GemEchoConfig),
}

// First backquoted name in a serde message such as "missing field `temperature_K`".
fn quoted_field(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

fn to_table<T: Serialize>(value: &T) -> Result<toml::Table> {
    match toml::Value::try_from(value) {
        Ok(toml::Value::Table(t)) => Ok(t),
        Ok(_) => Err(CliError::config("params", "configuration does not serialize to a table")),
        Err(e) => Err(CliError::config("params", e.to_string())),
    }
}

fn parse<T: DeserializeOwned + Serialize>(params: &toml::Table) -> Result<T> {
    let value: T = toml::Value::Table(params.clone()).try_into().map_err(|e: toml::de::Error| {
        let message = e.message().to_string();
        CliError::config(quoted_field(&message).unwrap_or_else(|| "params".to_string()), message)
    })?;
    let effective = to_table(&value)?;
    if let Some(key) = params.keys().find(|k| !effective.contains_key(*k)) {
        return Err(CliError::config(key.clone(), "unknown field"));
    }
    Ok(value)
}

fn validated<T>(r: lightfluid::Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        lightfluid::Error::Config { field, reason } => CliError::Config { field, reason },
        other => CliError::config("params", other.to_string()),
    })
}

impl Prepared {
    /// Parses `params` for experiment `name` and checks it before anything runs.
    pub fn new(name: &str, params: &toml::Table) -> Result<Self> {
        let prepared = match name {
            "vapor_spectrum" => {
                let c: VaporSpectrumConfig = parse(params)?;
                check_temperature(c.temperature)?;
                check_scan(c.detuning_min, c.detuning_max, c.points)?;
                if !(c.intensity >= 0.0) || !(c.length >= 0.0) {
                    return Err(CliError::config("intensity_W_per_m2", "intensity and length must be non-negative"));
                }
                Prepared::VaporSpectrum(c)
            }
            "vapor_point" => {
                let c: VaporPointConfig = parse(params)?;
                check_temperature(c.temperature)?;
                if !c.detuning.is_finite() {
                    return Err(CliError::config("detuning_MHz", "must be finite"));
                }
                if !(c.intensity >= 0.0) || !(c.length >= 0.0) {
                    return Err(CliError::config("intensity_W_per_m2", "intensity and length must be non-negative"));
                }
                Prepared::VaporPoint(c)
            }
            "eit_window" => {
                let c: EitWindowConfig = parse(params)?;
                check_temperature(c.temperature)?;
                check_scan(c.detuning_min, c.detuning_max, c.points)?;
                if !(c.branching >= 0.0 && c.branching <= 1.0) {
                    return Err(CliError::config("branching", "must lie in [0, 1]"));
                }
                if c.probe_rabi == 0.0 || !c.probe_rabi.is_finite() {
                    return Err(CliError::config("probe_rabi_MHz", "must be nonzero"));
                }
                if !(c.ground_decay >= 0.0) || !(c.length >= 0.0) {
                    return Err(CliError::config("ground_decay_per_s", "decay and length must be non-negative"));
                }
                Prepared::EitWindow(c)
            }
            "bogoliubov_curve" => {
                let c: BogoliubovCurveConfig = parse(params)?;
                validated(KerrFluid::new(c.wavelength, c.n0, c.chi3, c.amplitude))?;
                if !(c.k_max > 0.0) || c.points < 2 {
                    return Err(CliError::config("k_max_inv_xi", "need a positive range and at least 2 points"));
                }
                Prepared::BogoliubovCurve(c)
            }
            "polariton_dispersion" => {
                let c: PolaritonConfig = parse(params)?;
                if !(c.cavity_index > 0.0) || c.cavity_mode == 0 || !(c.cavity_energy > 0.0) {
                    return Err(CliError::config("cavity_energy_meV", "need a positive index, energy and mode >= 1"));
                }
                if !(c.rabi >= 0.0) || !(c.photon_linewidth >= 0.0) || !(c.exciton_linewidth >= 0.0) {
                    return Err(CliError::config("rabi_meV", "Rabi energy and linewidths must be non-negative"));
                }
                if !(c.k_max > 0.0) || c.points < 2 {
                    return Err(CliError::config("k_max_per_m", "need a positive range and at least 2 points"));
                }
                Prepared::Polariton(c)
            }
            "bogoliubov_scan" => {
                let c: ProbeScanConfig = parse(params)?;
                validated(c.validate())?;
                if c.probe_fraction == 0.0 {
                    return Err(CliError::config("probe_fraction", "a scan needs a nonzero probe"));
                }
                Prepared::BogoliubovScan(c)
            }
            "ring_count" => {
                let c: RingConfig = parse(params)?;
                validated(c.validate())?;
                Prepared::RingCount(c)
            }
            "shockwave" => {
                let c: ShockConfig = parse(params)?;
                validated(c.validate())?;
                Prepared::Shockwave(c)
            }
            "oam_injection" => {
                let c: OamConfig = parse(params)?;
                validated(c.validate())?;
                Prepared::Oam(c)
            }
            "lg_vortex_ring" => {
                let c: LgPumpConfig = parse(params)?;
                validated(c.validate())?;
                Prepared::LgRing(c)
            }
            "defect_scattering" => {
                let c: DefectConfig = parse(params)?;
                validated(c.validate())?;
                Prepared::Defect(c)
            }
            "gem_echo" => {
                let c: GemEchoConfig = parse(params)?;
                c.engine_config(false)?;
                c.pulses()?;
                Prepared::GemEcho(c)
            }
            other => return Err(CliError::UnknownExperiment(other.to_string())),
        };
        Ok(prepared)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Prepared::VaporSpectrum(_) => "vapor_spectrum",
            Prepared::VaporPoint(_) => "vapor_point",
            Prepared::EitWindow(_) => "eit_window",
            Prepared::BogoliubovCurve(_) => "bogoliubov_curve",
            Prepared::Polariton(_) => "polariton_dispersion",
            Prepared::BogoliubovScan(_) => "bogoliubov_scan",
            Prepared::RingCount(_) => "ring_count",
            Prepared::Shockwave(_) => "shockwave",
            Prepared::Oam(_) => "oam_injection",
            Prepared::LgRing(_) => "lg_vortex_ring",
            Prepared::Defect(_) => "defect_scattering",
            Prepared::GemEcho(_) => "gem_echo",
        }
    }

    /// The configuration with every default filled in.
    pub fn effective(&self) -> Result<toml::Table> {
        match self {
            Prepared::VaporSpectrum(c) => to_table(c),
            Prepared::VaporPoint(c) => to_table(c),
            Prepared::EitWindow(c) => to_table(c),
            Prepared::BogoliubovCurve(c) => to_table(c),
            Prepared::Polariton(c) => to_table(c),
            Prepared::BogoliubovScan(c) => to_table(c),
            Prepared::RingCount(c) => to_table(c),
            Prepared::Shockwave(c) => to_table(c),
            Prepared::Oam(c) => to_table(c),
            Prepared::LgRing(c) => to_table(c),
            Prepared::Defect(c) => to_table(c),
            Prepared::GemEcho(c) => to_table(c),
        }
    }

    pub fn execute(&self, out: &mut Outputs, strict: bool) -> Result<()> {
        match self {
            Prepared::VaporSpectrum(c) => vapor_spectrum(c, out),
            Prepared::VaporPoint(c) => vapor_point(c, out),
            Prepared::EitWindow(c) => eit_window(c, out),
            Prepared::BogoliubovCurve(c) => bogoliubov_curve(c, out),
            Prepared::Polariton(c) => polariton(c, out),
            Prepared::BogoliubovScan(c) => bogoliubov_scan(c, out),
            Prepared::RingCount(c) => ring_count(c, out),
            Prepared::Shockwave(c) => shockwave(c, out),
            Prepared::Oam(c) => oam(c, out),
            Prepared::LgRing(c) => lg_ring(c, out),
            Prepared::Defect(c) => defect(c, out),
            Prepared::GemEcho(c) => gem_echo(c, out, strict),
        }?;
        if strict && !out.warnings.is_empty() {
            return Err(CliError::Strict(out.warnings.join("; ")));
        }
        Ok(())
    }
}

fn vapor_chi(atom: &AtomSpec, density: f64, temperature: f64, detuning: f64, fsq: f64, doppler: bool) -> Result<Complex64> {
    let chi = if doppler {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let bare = |d: f64| saturated_chi(atom, density, d, fsq).unwrap_or(nan);
        engine("Doppler average", doppler_averaged_chi(bare, temperature, atom, detuning))?
    } else {
        engine("susceptibility", saturated_chi(atom, density, detuning, fsq))?
    };
    if !chi.re.is_finite() || !chi.im.is_finite() {
        return Err(CliError::engine(
            "susceptibility",
            lightfluid::Error::Numerical {
                message: format!("non-finite susceptibility at detuning {detuning:.6e} rad/s"),
                residual: f64::NAN,
            },
        ));
    }
    Ok(chi)
}

fn vapor_spectrum(c: &VaporSpectrumConfig, out: &mut Outputs) -> Result<()> {
    let atom = c.line.atom();
    let vapor = engine("vapor state", VaporState::rubidium(c.temperature, Some(&atom)))?;
    let k = atom.wavenumber();
    let fsq = field_sq(c.intensity);
    let mut table = Table::new(&["detuning_MHz", "re_chi", "im_chi", "index", "alpha_per_m", "transmission"]);
    let mut min_t = f64::INFINITY;
    for det in scan(c.detuning_min, c.detuning_max, c.points) {
        let chi = vapor_chi(&atom, vapor.density, c.temperature, mhz(det), fsq, c.doppler)?;
        // absorption is the magnitude of Im χ whatever its sign convention
        let alpha = k * chi.im.abs();
        let t = (-alpha * c.length).exp();
        min_t = min_t.min(t);
        table.push(vec![det, chi.re, chi.im, (1.0 + chi.re).max(0.0).sqrt(), alpha, t]);
    }
    out.table("spectrum", &table)?;
    out.set("density_per_m3", vapor.density);
    out.set(
        "doppler_width_MHz",
        engine("Doppler width", doppler_linewidth(c.temperature, atom.mass, atom.wavelength))? * 1e-6,
    );
    out.set("saturation_parameter", saturation_parameter(&atom, fsq));
    out.set("min_transmission", min_t);
    Ok(())
}

fn vapor_point(c: &VaporPointConfig, out: &mut Outputs) -> Result<()> {
    let atom = c.line.atom();
    let vapor = engine("vapor state", VaporState::rubidium(c.temperature, Some(&atom)))?;
    let fsq = field_sq(c.intensity);
    let chi = vapor_chi(&atom, vapor.density, c.temperature, mhz(c.detuning), fsq, c.doppler)?;
    let alpha = atom.wavenumber() * chi.im.abs();
    let rabi = atom.dipole_moment * fsq.sqrt() / HBAR;
    let state = engine("two-level steady state", two_level_steady_state(mhz(c.detuning), rabi, atom.linewidth))?;
    let s = saturation_parameter(&atom, fsq);
    let t = (-alpha * c.length).exp();
    let mut table = Table::new(&[
        "detuning_MHz",
        "intensity_W_per_m2",
        "re_chi",
        "im_chi",
        "alpha_per_m",
        "transmission",
        "saturation_parameter",
        "excited_population",
    ]);
    table.push(vec![c.detuning, c.intensity, chi.re, chi.im, alpha, t, s, state.excited_population()]);
    out.table("point", &table)?;
    out.set("re_chi", chi.re);
    out.set("im_chi", chi.im);
    out.set("transmission", t);
    out.set("saturation_parameter", s);
    out.set("excited_population", state.excited_population());
    Ok(())
}

fn eit_window(c: &EitWindowConfig, out: &mut Outputs) -> Result<()> {
    let atom = c.line.atom();
    let vapor = engine("vapor state", VaporState::rubidium(c.temperature, Some(&atom)))?;
    let mut spec = ThreeLevelSpec::with_linewidth(atom.linewidth, c.branching);
    spec.probe_rabi = mhz(c.probe_rabi);
    spec.control_rabi = mhz(c.control_rabi);
    spec.control_detuning = mhz(c.control_detuning);
    spec.ground_decay = c.ground_decay;
    spec.density = vapor.density;
    spec.dipole_moment = atom.dipole_moment;
    let k = atom.wavenumber();
    let carrier0 = SPEED_OF_LIGHT * k;
    let mut table = Table::new(&["probe_detuning_MHz", "re_chi", "im_chi", "index", "transmission"]);
    let (mut omega, mut index) = (Vec::with_capacity(c.points), Vec::with_capacity(c.points));
    for det in scan(c.detuning_min, c.detuning_max, c.points) {
        spec.probe_detuning = mhz(det);
        let state = engine("three-level steady state", three_level_steady_state(&spec))?;
        let chi = engine(
            "probe susceptibility",
            probe_susceptibility(&state, spec.density, spec.dipole_moment, spec.probe_rabi),
        )?;
        let n = (1.0 + chi.re).max(0.0).sqrt();
        table.push(vec![det, chi.re, chi.im, n, (-k * chi.im.abs() * c.length).exp()]);
        omega.push(carrier0 + spec.probe_detuning);
        index.push(n);
    }
    out.table("eit", &table)?;
    out.set("density_per_m3", vapor.density);
    match group_velocity(&omega, &index, carrier0 + spec.control_detuning) {
        Ok(g) => {
            out.set("group_index", g.group_index);
            out.set("group_velocity_m_per_s", g.group_velocity);
        }
        Err(e) => out.warn(format!("group index not evaluated: {e}")),
    }
    spec.probe_detuning = spec.control_detuning;
    let state = engine("three-level steady state", three_level_steady_state(&spec))?;
    let chi = engine(
        "probe susceptibility",
        probe_susceptibility(&state, spec.density, spec.dipole_moment, spec.probe_rabi),
    )?;
    out.set("transmission_two_photon", (-k * chi.im.abs() * c.length).exp());
    Ok(())
}

fn bogoliubov_curve(c: &BogoliubovCurveConfig, out: &mut Outputs) -> Result<()> {
    let fluid = engine("fluid", KerrFluid::new(c.wavelength, c.n0, c.chi3, c.amplitude))?;
    let xi = fluid.healing_length();
    let params = fluid.params();
    let ks: Vec<f64> = (1..=c.points).map(|i| c.k_max / xi * i as f64 / c.points as f64).collect();
    let curve = engine("Bogoliubov curve", DispersionCurve::bogoliubov(&params, &ks))?;
    let mut table = Table::new(&["k_per_m", "k_xi", "omega_per_m", "free_per_m", "group_velocity"]);
    for (&k, &w) in curve.k.iter().zip(&curve.value) {
        let vg = engine("group velocity", params.group_velocity(k))?;
        table.push(vec![k, k * xi, w, params.free_energy(k), vg]);
    }
    out.table("bogoliubov", &table)?;
    let landau = engine("Landau velocity", landau_critical_velocity(&curve))?;
    out.set("sound_speed", fluid.sound_speed());
    out.set("healing_length_m", xi);
    out.set("nonlinear_length_m", fluid.nonlinear_length());
    out.set("landau_critical_velocity", landau.critical_velocity);
    Ok(())
}

fn polariton(c: &PolaritonConfig, out: &mut Outputs) -> Result<()> {
    let omega0 = mev(c.cavity_energy);
    // ω_C(0) = c·pπ/(n_c² L)
    let length = SPEED_OF_LIGHT * c.cavity_mode as f64 * PI / (c.cavity_index * c.cavity_index * omega0);
    let spec = CavitySpec {
        index: c.cavity_index,
        length,
        mode: c.cavity_mode,
        photon_linewidth: mev(c.photon_linewidth),
        exciton_linewidth: mev(c.exciton_linewidth),
        quality_factor: None,
    };
    let ks: Vec<f64> = (0..c.points).map(|i| c.k_max * i as f64 / (c.points - 1) as f64).collect();
    let cavity = ks
        .iter()
        .map(|&k| cavity_dispersion(&spec, k).map(|m| m.omega))
        .collect::<lightfluid::Result<Vec<f64>>>();
    let cavity = engine("cavity dispersion", cavity)?;
    let exciton = vec![mev(c.exciton_energy); ks.len()];
    let b = engine("polariton branches", polariton_branches(&ks, &cavity, &exciton, mev(c.rabi)))?;
    let mut table = Table::new(&["k_per_m", "cavity_meV", "exciton_meV", "lower_meV", "upper_meV", "hopfield_x", "hopfield_c"]);
    for i in 0..ks.len() {
        table.push(vec![
            ks[i],
            to_mev(b.cavity[i]),
            to_mev(b.exciton[i]),
            to_mev(b.lower[i]),
            to_mev(b.upper[i]),
            b.hopfield_x[i],
            b.hopfield_c[i],
        ]);
    }
    out.table("polaritons", &table)?;
    out.set("cavity_length_m", length);
    out.set("effective_mass_kg", spec.effective_mass());
    out.set("lower_k0_meV", to_mev(b.lower[0]));
    out.set("upper_k0_meV", to_mev(b.upper[0]));
    let strong = engine(
        "strong coupling",
        strong_coupling_check(mev(c.rabi), spec.photon_linewidth, spec.exciton_linewidth),
    )?;
    out.set("strong_coupling", if strong { 1.0 } else { 0.0 });
    Ok(())
}

fn bogoliubov_scan(c: &ProbeScanConfig, out: &mut Outputs) -> Result<()> {
    let r = engine("probe scan", bogoliubov_probe_scan(c))?;
    let mut vg = Table::new(&["k_perp_per_m", "k_perp_xi", "group_velocity", "analytic", "relative_error", "centroid_out_m"]);
    for row in &r.rows {
        vg.push(vec![
            row.k_perp,
            row.k_perp_xi,
            row.group_velocity,
            row.analytic,
            row.relative_error,
            row.centroid_out,
        ]);
    }
    out.table("group_velocity", &vg)?;
    let mut disp = Table::new(&["k_perp_per_m", "omega_measured_per_m", "omega_analytic_per_m"]);
    for &(k, m, a) in &r.dispersion {
        disp.push(vec![k, m, a]);
    }
    out.table("dispersion", &disp)?;
    out.field("probe_delta", &r.snapshot)?;
    out.set("sound_speed", r.sound_speed);
    out.set("healing_length_m", r.healing_length);
    out.set("nonlinear_length_m", r.nonlinear_length);
    out.set("reference_residual", r.reference_residual);
    if let Some(s) = r.splitting {
        out.set("split_left_speed", s.left_speed);
        out.set("split_right_speed", s.right_speed);
    }
    let worst = r
        .rows
        .iter()
        .filter(|row| row.k_perp_xi >= 0.5 && row.k_perp_xi <= 3.0)
        .map(|row| row.relative_error.abs())
        .fold(f64::NAN, f64::max);
    out.set("max_relative_error_mid_k", worst);
    Ok(())
}

fn ring_count(c: &RingConfig, out: &mut Outputs) -> Result<()> {
    let r = engine("ring count", ring_count_n2(c))?;
    let mut frames = Table::new(&[
        "intensity_W_per_m2",
        "delta_n_configured",
        "on_axis_turns",
        "rings",
        "delta_n_estimate",
        "flagged",
    ]);
    for f in &r.frames {
        frames.push(vec![
            f.intensity,
            f.delta_n_configured,
            f.on_axis_turns,
            f.rings as f64,
            f.delta_n_estimate,
            if f.flagged { 1.0 } else { 0.0 },
        ]);
        if f.flagged {
            out.warn(format!("ambiguous ring count at I = {:.4e} W/m²", f.intensity));
        }
    }
    out.table("rings", &frames)?;
    let mut far = Table::new(&["k_per_m", "intensity"]);
    for &(k, v) in &r.far_field {
        far.push(vec![k, v]);
    }
    out.table("far_field", &far)?;
    out.set("rayleigh_length_m", r.rayleigh_length);
    out.set("fit_slope_rings_per_W_m2", r.fit_slope);
    out.set("fit_intercept", r.fit_intercept);
    out.set("n2_estimate", r.n2_estimate);
    out.set("n2_configured", r.n2_configured);
    Ok(())
}

fn shockwave(c: &ShockConfig, out: &mut Outputs) -> Result<()> {
    let r = engine("shockwave", shockwave_run(c))?;
    let mut tracks = Table::new(&["feature", "z_m", "radius_m"]);
    for (id, f) in r.features.iter().enumerate() {
        for (z, rad) in f.z.iter().zip(&f.radius) {
            tracks.push(vec![(id + 1) as f64, *z, *rad]);
        }
        if let Some(a) = f.exponent {
            out.set(&format!("{}_exponent", f.name), a);
        }
    }
    out.table("features", &tracks)?;
    let mut profile = Table::new(&["r_m", "density_ratio"]);
    for &(rad, v) in &r.final_profile {
        profile.push(vec![rad, v]);
    }
    out.table("profile", &profile)?;
    out.field("final_field", &r.final_field)?;
    out.set("healing_length_m", r.healing_length);
    out.set("nonlinear_length_m", r.nonlinear_length);
    out.set("central_contrast", r.central_contrast);
    out.set("noise_floor", r.noise_floor);
    for w in &r.warnings {
        out.warn(w.clone());
    }
    Ok(())
}

fn oam(c: &OamConfig, out: &mut Outputs) -> Result<()> {
    let r = engine("OAM injection", oam_injection(c))?;
    vortex_census(&r, out)
}

fn lg_ring(c: &LgPumpConfig, out: &mut Outputs) -> Result<()> {
    let r = engine("Laguerre-Gauss pump", lg_vortex_ring(c))?;
    out.set("boundary_winding", r.boundary_winding as f64);
    if r.boundary_winding != r.census.net_charge {
        out.warn(format!(
            "census finds net charge {} but the core boundary winds {} times",
            r.census.net_charge, r.boundary_winding
        ));
    }
    vortex_census(&r.census, out)
}

fn vortex_census(r: &OamResult, out: &mut Outputs) -> Result<()> {
    let mut table = Table::new(&["x_m", "y_m", "charge"]);
    for v in &r.vortices {
        table.push(vec![v.x, v.y, v.charge as f64]);
    }
    out.table("vortices", &table)?;
    out.field("field", &r.field)?;
    out.set("angular_momentum_per_photon", r.angular_momentum);
    out.set("net_charge", r.net_charge as f64);
    out.set("positive", r.positive as f64);
    out.set("negative", r.negative as f64);
    out.set("edge_excluded", r.edge_excluded as f64);
    if r.edge_excluded > 0 {
        out.warn(format!("{} vortices near the core edge left out of the census", r.edge_excluded));
    }
    Ok(())
}

fn defect(c: &DefectConfig, out: &mut Outputs) -> Result<()> {
    let r = engine("defect scattering", defect_scattering(c))?;
    let mut table = Table::new(&["flow_velocity", "sound_speed", "fringe_contrast", "ring_power", "drag_x", "drag_y", "cone_half_angle"]);
    table.push(vec![
        r.flow_velocity,
        r.sound_speed,
        r.fringe_contrast,
        r.ring_power,
        r.drag[0],
        r.drag[1],
        r.cone_half_angle.unwrap_or(f64::NAN),
    ]);
    out.table("defect", &table)?;
    out.field("field", &r.field)?;
    out.raster("density", &r.field.density(), &r.field, "V^2/m^2")?;
    out.set("flow_velocity", r.flow_velocity);
    out.set("sound_speed", r.sound_speed);
    out.set("fringe_contrast", r.fringe_contrast);
    out.set("ring_power", r.ring_power);
    out.set("drag_x", r.drag[0]);
    if let Some(a) = r.cone_half_angle {
        out.set("cone_half_angle", a);
    }
    Ok(())
}

fn gem_echo(c: &GemEchoConfig, out: &mut Outputs, strict: bool) -> Result<()> {
    let config = c.engine_config(strict)?;
    let pulses = c.pulses()?;
    let (history, report) = engine("gradient echo", multi_pulse_run(&config, &pulses))?;
    out.table("output", &gem_series(&history))?;
    let mut table = Table::new(&[
        "pulse",
        "center_s",
        "input_energy",
        "transmitted_energy",
        "echo_energy",
        "echo_peak_time_s",
        "efficiency",
    ]);
    for (i, (p, r)) in pulses.iter().zip(&report.pulses).enumerate() {
        table.push(vec![
            i as f64,
            p.center,
            r.input_energy,
            r.transmitted_energy,
            r.echo_energy,
            r.echo_peak_time,
            r.efficiency,
        ]);
        for w in &r.warnings {
            out.warn(format!("pulse {i}: {w}"));
        }
    }
    out.table("echoes", &table)?;
    out.set("efficiency", report.pulses[0].efficiency);
    out.set("echo_peak_time_s", report.pulses[0].echo_peak_time);
    out.set("kappa", config.kappa());
    out.set("density", config.density());
    out.set("adiabatic_ok", if config.adiabatic_ok() { 1.0 } else { 0.0 });
    if pulses.len() > 1 {
        out.set("recall_lifo", if report.recall_kind == "LIFO" { 1.0 } else { 0.0 });
    }
    for a in &report.ambiguities {
        out.warn(a.clone());
    }
    Ok(())
}
