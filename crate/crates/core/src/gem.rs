//! Gradient echo memory in a Λ ensemble after adiabatic elimination of the excited state.
//!
//! In the retarded frame with P = Nβσ_gs and β = gΩ/Δ:
//!
//! ∂_t P = [−γ + iη(t)z] P − iκ E,   ∂_z E = −i P,
//!
//! where κ = Nβ² sets the optical depth of the gradient-broadened line, OD = 2πκ/|η|.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Piecewise-constant gradient η(t): `initial` until the first switch, then each switch value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSchedule {
    pub initial: f64,
    /// (time, new η) pairs with strictly increasing times.
    #[serde(default)]
    pub switches: Vec<(f64, f64)>,
}

impl GradientSchedule {
    pub fn constant(eta: f64) -> Self {
        GradientSchedule {
            initial: eta,
            switches: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.initial.is_finite() || self.switches.iter().any(|&(t, e)| !t.is_finite() || !e.is_finite()) {
            return Err(Error::config("schedule", "times and gradients must be finite"));
        }
        if self.switches.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::config("schedule", "segments overlap: switch times must strictly increase"));
        }
        Ok(())
    }

    pub fn eta(&self, t: f64) -> f64 {
        self.switches
            .iter()
            .take_while(|&&(ts, _)| ts <= t)
            .last()
            .map_or(self.initial, |&(_, e)| e)
    }

    pub fn max_abs(&self) -> f64 {
        self.switches.iter().map(|s| s.1.abs()).fold(self.initial.abs(), f64::max)
    }

    pub fn first_switch(&self) -> Option<f64> {
        self.switches.first().map(|s| s.0)
    }
}

/// η = +η₀ before `t_flip`, −η₀ after.
pub fn gradient_schedule(t_flip: f64, eta0: f64) -> Result<GradientSchedule> {
    if !(t_flip > 0.0) {
        return Err(Error::config("t_flip", "must be positive"));
    }
    let s = GradientSchedule {
        initial: eta0,
        switches: vec![(t_flip, -eta0)],
    };
    s.validate()?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GemConfig {
    /// Single-atom coupling g (rad/s per field unit).
    pub coupling: f64,
    /// Control Rabi frequency Ω (rad/s).
    pub control_rabi: f64,
    /// One-photon detuning Δ (rad/s).
    pub detuning: f64,
    /// Excited-state linewidth Γ (rad/s), only used for the adiabatic-elimination flag.
    pub excited_linewidth: f64,
    /// Optical depth of the broadened line at the largest programmed |η|.
    pub optical_depth: f64,
    /// Ground-coherence decay γ (1/s).
    pub ground_decay: f64,
    /// Medium length L (m); the medium spans [−L/2, L/2].
    pub length: f64,
    pub schedule: GradientSchedule,
    pub z_points: usize,
    pub t_points: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Store every n-th time step in the history.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Turn the bandwidth warning into an error.
    #[serde(default)]
    pub strict: bool,
}

fn default_record_every() -> usize {
    1
}

impl GemConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if !(self.length > 0.0) {
            return Err(Error::config("length", "must be positive"));
        }
        if self.detuning == 0.0 {
            return Err(Error::config("detuning", "adiabatic elimination needs Δ ≠ 0"));
        }
        if self.coupling == 0.0 || self.control_rabi == 0.0 {
            return Err(Error::config("coupling", "g and Ω must be nonzero"));
        }
        if !(self.optical_depth >= 0.0) {
            return Err(Error::config("optical_depth", "must be non-negative"));
        }
        if !(self.ground_decay >= 0.0) {
            return Err(Error::config("ground_decay", "must be non-negative"));
        }
        if self.z_points < 3 {
            return Err(Error::config("z_points", "need at least three points"));
        }
        if self.t_points < 2 || !(self.t_end > self.t_start) {
            return Err(Error::config("t_points", "need at least two times on an increasing axis"));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        if self.optical_depth > 0.0 && self.schedule.max_abs() == 0.0 {
            return Err(Error::config("schedule", "a nonzero optical depth needs a nonzero gradient"));
        }
        // A discrete z grid rephases every 2π/(η dz); the run must end before that.
        let revival = self.schedule.max_abs() * self.dz() * (self.t_end - self.t_start);
        if revival >= 2.0 * PI {
            return Err(Error::config(
                "z_points",
                format!("grid revival inside the run (η·dz·T = {revival:.3} ≥ 2π); refine z"),
            ));
        }
        Ok(())
    }

    pub fn dz(&self) -> f64 {
        self.length / (self.z_points - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.t_points - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.t_points).map(|n| self.t_start + n as f64 * self.dt()).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.z_points).map(|j| -0.5 * self.length + j as f64 * self.dz()).collect()
    }

    /// κ = Nβ² (1/(m·s)).
    pub fn kappa(&self) -> f64 {
        self.optical_depth * self.schedule.max_abs() / (2.0 * PI)
    }

    /// β = gΩ/Δ.
    pub fn beta(&self) -> f64 {
        self.coupling * self.control_rabi / self.detuning
    }

    /// Atom density N implied by the optical depth.
    pub fn density(&self) -> f64 {
        self.kappa() / (self.beta() * self.beta())
    }

    /// |Δ| ≥ 10Γ.
    pub fn adiabatic_ok(&self) -> bool {
        self.detuning.abs() >= 10.0 * self.excited_linewidth
    }

    /// Width |η|L/2π (Hz) of the gradient-broadened line.
    pub fn broadened_width(&self) -> f64 {
        self.schedule.max_abs() * self.length / (2.0 * PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    /// Peak time (s).
    pub center: f64,
    /// Intensity FWHM (s).
    pub fwhm: f64,
    pub amplitude: f64,
}

impl GaussianPulse {
    pub fn sample(&self, t: f64) -> Complex64 {
        let x = (t - self.center) / self.fwhm;
        Complex64::new(self.amplitude * (-2.0 * std::f64::consts::LN_2 * x * x).exp(), 0.0)
    }

    pub fn sample_on(&self, times: &[f64]) -> Vec<Complex64> {
        times.iter().map(|&t| self.sample(t)).collect()
    }
}

/// Recorded field and coherence on the (z, t) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GemHistory {
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    /// Ê(z, t) per recorded time.
    pub field: Vec<Vec<Complex64>>,
    /// σ_gs(z, t) per recorded time.
    pub coherence: Vec<Vec<Complex64>>,
    /// Nβ, so that P = Nβσ_gs.
    pub polarization_scale: f64,
    /// Ê at the exit face for every time step.
    pub output: Vec<Complex64>,
    pub eta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoReport {
    pub input_energy: f64,
    pub transmitted_energy: f64,
    pub echo_energy: f64,
    pub echo_peak_time: f64,
    pub efficiency: f64,
    pub transmitted_window: (f64, f64),
    pub echo_window: (f64, f64),
    pub adiabatic_ok: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        (z.exp() - 1.0) / z
    }
}

// (e^z − 1 − z)/z²
fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        0.5 + z / 6.0 + z * z / 24.0
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

fn trapezoid(samples: &[Complex64], dt: f64, from: usize, to: usize) -> f64 {
    if to <= from + 1 {
        return 0.0;
    }
    let e: Vec<f64> = samples[from..to].iter().map(|c| c.norm_sqr()).collect();
    dt * (e.iter().sum::<f64>() - 0.5 * (e[0] + e[e.len() - 1]))
}

fn field_along(p: &[Complex64], input: Complex64, dz: f64, out: &mut [Complex64]) {
    out[0] = input;
    for j in 1..p.len() {
        out[j] = out[j - 1] - Complex64::i() * 0.5 * dz * (p[j - 1] + p[j]);
    }
}

/// Peak of |E|² in [from, to) with parabolic sub-grid refinement.
fn refined_peak(output: &[Complex64], times: &[f64], from: usize, to: usize) -> f64 {
    let e: Vec<f64> = output.iter().map(|c| c.norm_sqr()).collect();
    let Some(m) = (from..to).max_by(|&a, &b| e[a].total_cmp(&e[b])) else {
        return f64::NAN;
    };
    if m == 0 || m + 1 >= e.len() {
        return times[m];
    }
    let denom = e[m - 1] - 2.0 * e[m] + e[m + 1];
    let shift = if denom < 0.0 { 0.5 * (e[m - 1] - e[m + 1]) / denom } else { 0.0 };
    times[m] + shift.clamp(-0.5, 0.5) * (times[1] - times[0])
}

/// Rough FWHM bandwidth (Hz) from the rms spectral width of a sampled pulse.
pub fn pulse_bandwidth(samples: &[Complex64], dt: f64) -> f64 {
    let norm: f64 = samples.iter().map(|c| c.norm_sqr()).sum();
    if norm == 0.0 {
        return 0.0;
    }
    let mut d2 = 0.0;
    let mut mean = 0.0;
    for w in samples.windows(2) {
        let d = (w[1] - w[0]) / dt;
        let mid = 0.5 * (w[0] + w[1]);
        d2 += d.norm_sqr();
        mean += (mid.conj() * d).im;
    }
    let mean = mean / norm;
    let var = (d2 / norm - mean * mean).max(0.0);
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * var.sqrt() / (2.0 * PI)
}

fn time_index(times: &[f64], t: f64) -> usize {
    times.partition_point(|&x| x < t).min(times.len())
}

/// Integrates the memory equations for an input Ê_in sampled on `config.times()`.
///
/// The field is integrated along z by the trapezoid rule at each time; the coherence advances
/// with a second-order exponential integrator that treats −γ + iηz exactly.
pub fn gem_propagate(config: &GemConfig, input: &[Complex64]) -> Result<(GemHistory, EchoReport)> {
    config.validate()?;
    if input.len() != config.t_points {
        return Err(Error::config("input", format!(
            "expected {} samples, got {}",
            config.t_points,
            input.len()
        )));
    }
    let mut warnings = Vec::new();
    let dt = config.dt();
    let bandwidth = pulse_bandwidth(input, dt);
    if bandwidth > config.broadened_width() {
        let msg = format!(
            "input bandwidth {bandwidth:.4e} Hz exceeds the broadened line {:.4e} Hz",
            config.broadened_width()
        );
        if config.strict {
            return Err(Error::config("input", msg));
        }
        warnings.push(msg);
    }
    if !config.adiabatic_ok() {
        warnings.push("|Δ| < 10Γ: adiabatic elimination is questionable".to_string());
    }

    let times = config.times();
    let z = config.positions();
    let nz = z.len();
    let dz = config.dz();
    let kappa = config.kappa();
    let scale = config.density() * config.beta();
    let minus_i = Complex64::new(0.0, -1.0);

    let mut p = vec![Complex64::new(0.0, 0.0); nz];
    let mut e = vec![Complex64::new(0.0, 0.0); nz];
    let mut e_pred = vec![Complex64::new(0.0, 0.0); nz];
    let mut p_pred = vec![Complex64::new(0.0, 0.0); nz];
    field_along(&p, input[0], dz, &mut e);

    let mut history = GemHistory {
        z: z.clone(),
        t: Vec::new(),
        field: Vec::new(),
        coherence: Vec::new(),
        polarization_scale: scale,
        output: Vec::with_capacity(times.len()),
        eta: Vec::with_capacity(times.len()),
    };
    let record = |h: &mut GemHistory, n: usize, e: &[Complex64], p: &[Complex64]| {
        if n.is_multiple_of(config.record_every) || n + 1 == times.len() {
            h.t.push(times[n]);
            h.field.push(e.to_vec());
            h.coherence.push(p.iter().map(|x| if scale != 0.0 { x / scale } else { *x }).collect());
        }
    };
    history.output.push(e[nz - 1]);
    history.eta.push(config.schedule.eta(times[0]));
    record(&mut history, 0, &e, &p);

    for n in 0..times.len() - 1 {
        let eta = config.schedule.eta(times[n] + 0.5 * dt);
        for j in 0..nz {
            let a = Complex64::new(-config.ground_decay, eta * z[j]) * dt;
            let s0 = minus_i * kappa * e[j];
            p_pred[j] = a.exp() * p[j] + dt * phi1(a) * s0;
        }
        field_along(&p_pred, input[n + 1], dz, &mut e_pred);
        for j in 0..nz {
            let a = Complex64::new(-config.ground_decay, eta * z[j]) * dt;
            let s0 = minus_i * kappa * e[j];
            let s1 = minus_i * kappa * e_pred[j];
            p[j] = a.exp() * p[j] + dt * (phi1(a) * s0 + phi2(a) * (s1 - s0));
        }
        field_along(&p, input[n + 1], dz, &mut e);
        if p.iter().chain(e.iter()).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Blowup { step: n + 1 });
        }
        history.output.push(e[nz - 1]);
        history.eta.push(config.schedule.eta(times[n + 1]));
        record(&mut history, n + 1, &e, &p);
    }

    let split = config.schedule.first_switch().unwrap_or(0.5 * (config.t_start + config.t_end));
    let report = echo_report(
        &history.output,
        input,
        &times,
        (config.t_start, split),
        (split, config.t_end),
        config.adiabatic_ok(),
        warnings,
    );
    Ok((history, report))
}

fn echo_report(
    output: &[Complex64],
    input: &[Complex64],
    times: &[f64],
    transmitted_window: (f64, f64),
    echo_window: (f64, f64),
    adiabatic_ok: bool,
    warnings: Vec<String>,
) -> EchoReport {
    let dt = times[1] - times[0];
    let (t0, t1) = (time_index(times, transmitted_window.0), time_index(times, transmitted_window.1));
    let (e0, e1) = (time_index(times, echo_window.0), time_index(times, echo_window.1 + 0.5 * dt));
    let input_energy = trapezoid(input, dt, t0, t1.max(t0 + 1).min(times.len()));
    let transmitted_energy = trapezoid(output, dt, t0, t1.min(times.len()));
    let echo_energy = trapezoid(output, dt, e0, e1.min(times.len()));
    EchoReport {
        input_energy,
        transmitted_energy,
        echo_energy,
        echo_peak_time: refined_peak(output, times, e0, e1.min(times.len())),
        efficiency: if input_energy > 0.0 { echo_energy / input_energy } else { 0.0 },
        transmitted_window,
        echo_window,
        adiabatic_ok,
        warnings,
    }
}

/// |ψ(k, t)| on a zero-padded k grid with its centroid, ψ = P(k) − kÊ(k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSpacePolariton {
    /// Ascending wavenumbers (1/m).
    pub k: Vec<f64>,
    pub t: Vec<f64>,
    pub magnitude: Vec<Vec<f64>>,
    /// Centroid of |ψ|² in k per recorded time.
    pub centroid: Vec<f64>,
}

impl KSpacePolariton {
    /// Least-squares slope dk/dt of the centroid over [t_from, t_to].
    pub fn drift_rate(&self, t_from: f64, t_to: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .t
            .iter()
            .zip(&self.centroid)
            .filter(|(&t, c)| t >= t_from && t <= t_to && c.is_finite())
            .map(|(&t, &c)| (t, c))
            .collect();
        if pts.len() < 2 {
            return Err(Error::Measurement("fewer than two centroid samples in the interval".into()));
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let mc = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mc)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        Ok(sxy / sxx)
    }
}

/// Spatial Fourier transform of the stored history with `pad`-fold zero padding.
pub fn kspace_polariton(history: &GemHistory, pad: usize) -> KSpacePolariton {
    let nz = history.z.len();
    let n = (nz * pad.max(1)).next_power_of_two();
    let dz = history.z[1] - history.z[0];
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let raw_k: Vec<f64> = crate::fluid::fft_wavenumbers(n, dz);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_k[a].total_cmp(&raw_k[b]));
    let k: Vec<f64> = order.iter().map(|&i| raw_k[i]).collect();

    let mut magnitude = Vec::with_capacity(history.t.len());
    let mut centroid = Vec::with_capacity(history.t.len());
    let mut pbuf = vec![Complex64::new(0.0, 0.0); n];
    let mut ebuf = vec![Complex64::new(0.0, 0.0); n];
    for (field, coh) in history.field.iter().zip(&history.coherence) {
        pbuf.fill(Complex64::new(0.0, 0.0));
        ebuf.fill(Complex64::new(0.0, 0.0));
        for j in 0..nz {
            pbuf[j] = coh[j] * history.polarization_scale * dz;
            ebuf[j] = field[j] * dz;
        }
        fft.process(&mut pbuf);
        fft.process(&mut ebuf);
        let mags: Vec<f64> = order.iter().map(|&i| (pbuf[i] - raw_k[i] * ebuf[i]).norm()).collect();
        let w: f64 = mags.iter().map(|m| m * m).sum();
        centroid.push(if w > 0.0 {
            mags.iter().zip(&k).map(|(m, q)| m * m * q).sum::<f64>() / w
        } else {
            f64::NAN
        });
        magnitude.push(mags);
    }
    KSpacePolariton {
        k,
        t: history.t.clone(),
        magnitude,
        centroid,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPulseReport {
    pub pulses: Vec<EchoReport>,
    /// Pulse indices in the order their echoes leave the medium.
    pub recall_order: Vec<usize>,
    /// "FIFO", "LIFO" or "mixed"; reported, not asserted.
    pub recall_kind: String,
    /// Notes on windows that overlap a neighbour's.
    pub ambiguities: Vec<String>,
}

/// Stores the sum of several pulses and splits input and echo energy into per-pulse windows.
///
/// Echo windows are centred on 2T − t_i for a flip at T, with half-width 3 FWHM.
pub fn multi_pulse_run(config: &GemConfig, pulses: &[GaussianPulse]) -> Result<(GemHistory, MultiPulseReport)> {
    if pulses.is_empty() {
        return Err(Error::config("pulses", "need at least one pulse"));
    }
    let flip = config
        .schedule
        .first_switch()
        .ok_or_else(|| Error::config("schedule", "multi-pulse recall needs a gradient flip"))?;
    let times = config.times();
    let mut input = vec![Complex64::new(0.0, 0.0); times.len()];
    for p in pulses {
        for (x, &t) in input.iter_mut().zip(&times) {
            *x += p.sample(t);
        }
    }
    let (history, combined) = gem_propagate(config, &input)?;
    let mut ambiguities = Vec::new();
    let mut reports = Vec::with_capacity(pulses.len());
    for (i, p) in pulses.iter().enumerate() {
        let half = 3.0 * p.fwhm;
        for (j, q) in pulses.iter().enumerate().skip(i + 1) {
            if (p.center - q.center).abs() < half + 3.0 * q.fwhm {
                ambiguities.push(format!("windows of pulses {i} and {j} overlap"));
            }
        }
        let echo_at = 2.0 * flip - p.center;
        let own: Vec<Complex64> = times.iter().map(|&t| p.sample(t)).collect();
        reports.push(echo_report(
            &history.output,
            &own,
            &times,
            (p.center - half, p.center + half),
            (echo_at - half, echo_at + half),
            combined.adiabatic_ok,
            combined.warnings.clone(),
        ));
    }
    let mut recall_order: Vec<usize> = (0..pulses.len()).collect();
    recall_order.sort_by(|&a, &b| reports[a].echo_peak_time.total_cmp(&reports[b].echo_peak_time));
    let mut input_order: Vec<usize> = (0..pulses.len()).collect();
    input_order.sort_by(|&a, &b| pulses[a].center.total_cmp(&pulses[b].center));
    let reversed: Vec<usize> = input_order.iter().rev().cloned().collect();
    let recall_kind = if recall_order == input_order {
        "FIFO"
    } else if recall_order == reversed {
        "LIFO"
    } else {
        "mixed"
    };
    Ok((
        history,
        MultiPulseReport {
            pulses: reports,
            recall_order,
            recall_kind: recall_kind.to_string(),
            ambiguities,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA: f64 = 2.0 * PI * 2e6 / 0.1;

    fn config(od: f64, gamma: f64, t_flip: f64) -> GemConfig {
        GemConfig {
            coupling: 1e4,
            control_rabi: 2.0 * PI * 5e6,
            detuning: 2.0 * PI * 1e9,
            excited_linewidth: 2.0 * PI * 6e6,
            optical_depth: od,
            ground_decay: gamma,
            length: 0.1,
            schedule: gradient_schedule(t_flip, ETA).unwrap(),
            z_points: 201,
            t_points: 1601,
            t_start: -4e-6,
            t_end: 12e-6,
            record_every: 10,
            strict: false,
        }
    }

    fn pulse() -> GaussianPulse {
        GaussianPulse {
            center: 0.0,
            fwhm: 1e-6,
            amplitude: 1.0,
        }
    }

    #[test]
    fn no_medium_transmits_everything() {
        let c = config(0.0, 0.0, 4e-6);
        let input = pulse().sample_on(&c.times());
        let (h, r) = gem_propagate(&c, &input).unwrap();
        assert_eq!(h.output, input);
        assert!(r.efficiency < 1e-12);
        assert!((r.transmitted_energy / r.input_energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn echo_appears_at_twice_the_flip_time() {
        let c = config(3.0, 0.0, 4e-6);
        let (_, r) = gem_propagate(&c, &pulse().sample_on(&c.times())).unwrap();
        assert!((r.echo_peak_time - 8e-6).abs() <= c.dt(), "{}", r.echo_peak_time);
        assert!(r.efficiency > 0.5 && r.efficiency <= 1.0, "{}", r.efficiency);
        assert!(r.transmitted_energy + r.echo_energy <= r.input_energy * (1.0 + 1e-9));
    }

    #[test]
    fn schedule_rejects_overlap() {
        let s = GradientSchedule {
            initial: 1.0,
            switches: vec![(2.0, -1.0), (1.0, 1.0)],
        };
        assert!(s.validate().is_err());
        assert!(gradient_schedule(0.0, 1.0).is_err());
        let s = gradient_schedule(1.0, 3.0).unwrap();
        assert_eq!(s.eta(0.5), 3.0);
        assert_eq!(s.eta(1.5), -3.0);
    }

    #[test]
    fn coarse_z_grid_is_refused() {
        let mut c = config(3.0, 0.0, 4e-6);
        c.z_points = 11;
        assert!(matches!(c.validate(), Err(Error::Config { .. })));
    }

    #[test]
    fn strict_mode_rejects_wide_pulses() {
        let mut c = config(3.0, 0.0, 4e-6);
        let short = GaussianPulse {
            fwhm: 5e-8,
            ..pulse()
        };
        let input = short.sample_on(&c.times());
        assert!(!gem_propagate(&c, &input).unwrap().1.warnings.is_empty());
        c.strict = true;
        assert!(gem_propagate(&c, &input).is_err());
    }

    #[test]
    fn centroid_follows_the_gradient() {
        let c = config(3.0, 0.0, 4e-6);
        let (h, _) = gem_propagate(&c, &pulse().sample_on(&c.times())).unwrap();
        let kp = kspace_polariton(&h, 4);
        let before = kp.drift_rate(2e-6, 3.8e-6).unwrap();
        let after = kp.drift_rate(4.2e-6, 6e-6).unwrap();
        assert!((before / ETA - 1.0).abs() < 0.05, "{before}");
        assert!((after / ETA + 1.0).abs() < 0.05, "{after}");
    }

    #[test]
    fn two_pulses_come_back_reversed() {
        let mut c = config(3.0, 0.0, 6e-6);
        c.t_start = -8e-6;
        c.t_end = 20e-6;
        c.t_points = 2801;
        let a = GaussianPulse {
            center: -3.5e-6,
            ..pulse()
        };
        let b = GaussianPulse {
            center: 3.5e-6,
            ..pulse()
        };
        let (_, r) = multi_pulse_run(&c, &[a, b]).unwrap();
        assert_eq!(r.recall_kind, "LIFO");
        assert!(r.ambiguities.is_empty());
        for p in &r.pulses {
            assert!(p.efficiency > 0.3, "{}", p.efficiency);
        }
    }
}
