//! Three-level Λ system: steady-state Bloch solver, probe susceptibility, χ-order fits and
//! group velocity.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of the Λ system driven by a probe (g↔e) and a control (s↔e) field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelSpec {
    pub probe_rabi: f64,
    pub control_rabi: f64,
    pub probe_detuning: f64,
    pub control_detuning: f64,
    /// Γ_eg, decay e → g (rad/s).
    pub decay_eg: f64,
    /// Γ_es, decay e → s (rad/s).
    pub decay_es: f64,
    /// Ground-state coherence decay γ₀ (rad/s).
    pub ground_decay: f64,
    /// Atomic density (m⁻³).
    pub density: f64,
    pub dipole_moment: f64,
}

impl ThreeLevelSpec {
    /// Splits the total linewidth between the two decay channels with branching ratio
    /// `branching` toward |g⟩.
    pub fn with_linewidth(linewidth: f64, branching: f64) -> Self {
        ThreeLevelSpec {
            probe_rabi: 0.0,
            control_rabi: 0.0,
            probe_detuning: 0.0,
            control_detuning: 0.0,
            decay_eg: branching * linewidth,
            decay_es: (1.0 - branching) * linewidth,
            ground_decay: 0.0,
            density: 0.0,
            dipole_moment: 0.0,
        }
    }

    pub fn linewidth(&self) -> f64 {
        self.decay_eg + self.decay_es
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("decay_eg", self.decay_eg),
            ("decay_es", self.decay_es),
            ("ground_decay", self.ground_decay),
            ("density", self.density),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be non-negative and finite, got {v}")));
            }
        }
        if !(self.linewidth() > 0.0) {
            return Err(Error::domain("total linewidth Γ_eg + Γ_es must be positive"));
        }
        for (name, v) in [
            ("probe_rabi", self.probe_rabi),
            ("control_rabi", self.control_rabi),
            ("probe_detuning", self.probe_detuning),
            ("control_detuning", self.control_detuning),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelSteadyState {
    pub rho_gg: f64,
    pub rho_ss: f64,
    pub rho_ee: f64,
    pub sigma_ge: Complex64,
    pub sigma_se: Complex64,
    pub sigma_gs: Complex64,
    /// Max-norm of the six time derivatives, in units of Γ.
    pub residual: f64,
    pub iterations: usize,
}

/// Time derivatives (ρ̇_gg, ρ̇_ss, ρ̇_ee, σ̇_ge, σ̇_se, σ̇_gs) of the Λ-system Bloch equations.
pub fn bloch3_derivatives(spec: &ThreeLevelSpec, state: &ThreeLevelSteadyState) -> [Complex64; 6] {
    let (wp, wc) = (spec.probe_rabi / 2.0, spec.control_rabi / 2.0);
    let g = spec.linewidth();
    let (gg, ss, ee) = (state.rho_gg, state.rho_ss, state.rho_ee);
    let (ge, se, gs) = (state.sigma_ge, state.sigma_se, state.sigma_gs);
    let probe_flow = I * wp * (ge - ge.conj());
    let control_flow = I * wc * (se - se.conj());
    [
        probe_flow + spec.decay_eg * ee,
        control_flow + spec.decay_es * ee,
        -probe_flow - control_flow - g * ee,
        -I * Complex64::new(spec.probe_detuning, -g / 2.0) * ge - I * wp * (ee - gg) + I * wc * gs,
        -I * Complex64::new(spec.control_detuning, -g / 2.0) * se - I * wc * (ee - ss) + I * wp * gs.conj(),
        -I * Complex64::new(spec.probe_detuning - spec.control_detuning, -spec.ground_decay) * gs - I * wp * se.conj()
            + I * wc * ge,
    ]
}

type Vec8 = SVector<f64, 8>;

fn unpack(x: &Vec8) -> ThreeLevelSteadyState {
    ThreeLevelSteadyState {
        rho_gg: x[0],
        rho_ss: x[1],
        rho_ee: 1.0 - x[0] - x[1],
        sigma_ge: Complex64::new(x[2], x[3]),
        sigma_se: Complex64::new(x[4], x[5]),
        sigma_gs: Complex64::new(x[6], x[7]),
        residual: f64::NAN,
        iterations: 0,
    }
}

// Residual of the eight independent real equations (ρ̇_ee follows from the trace). Without
// control field or decay into |s⟩ that level is decoupled and its population is pinned to 0.
fn residual(spec: &ThreeLevelSpec, x: &Vec8) -> Vec8 {
    let d = bloch3_derivatives(spec, &unpack(x));
    let s_row = if s_decoupled(spec) { x[1] } else { d[1].re };
    Vec8::from([d[0].re, s_row, d[3].re, d[3].im, d[4].re, d[4].im, d[5].re, d[5].im])
}

fn s_decoupled(spec: &ThreeLevelSpec) -> bool {
    spec.control_rabi == 0.0 && spec.decay_es == 0.0
}

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

/// Steady state of the Λ-system Bloch equations by damped Newton iteration.
///
/// The solve runs in units of Γ; the reported residual is the max-norm of all six time
/// derivatives divided by Γ.
pub fn three_level_steady_state(spec: &ThreeLevelSpec) -> Result<ThreeLevelSteadyState> {
    spec.validate()?;
    let g = spec.linewidth();
    let scaled = ThreeLevelSpec {
        probe_rabi: spec.probe_rabi / g,
        control_rabi: spec.control_rabi / g,
        probe_detuning: spec.probe_detuning / g,
        control_detuning: spec.control_detuning / g,
        decay_eg: spec.decay_eg / g,
        decay_es: spec.decay_es / g,
        ground_decay: spec.ground_decay / g,
        ..*spec
    };

    let mut x = Vec8::zeros();
    x[0] = 1.0;
    let mut f = residual(&scaled, &x);
    let mut iterations = 0;
    while f.amax() > NEWTON_TOL {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::Numerical {
                message: format!("three-level steady state did not converge in {NEWTON_MAX_ITER} iterations"),
                residual: f.amax(),
            });
        }
        iterations += 1;
        let mut jac = SMatrix::<f64, 8, 8>::zeros();
        for k in 0..8 {
            let mut xp = x;
            xp[k] += 1.0;
            jac.set_column(k, &(residual(&scaled, &xp) - f));
        }
        let step = jac.lu().solve(&(-f)).ok_or_else(|| Error::Numerical {
            message: "singular Jacobian in three-level steady state".into(),
            residual: f.amax(),
        })?;
        let mut lambda = 1.0;
        loop {
            let trial = x + step * lambda;
            let ft = residual(&scaled, &trial);
            if ft.amax() < f.amax() || lambda < 1e-4 {
                x = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
        }
    }

    let mut state = unpack(&x);
    state.iterations = iterations;
    state.residual = bloch3_derivatives(&scaled, &state)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok(state)
}

/// Linear probe susceptibility χ = N μ σ_ge / (ε₀ E_p) with E_p = ħΩ_p/μ.
pub fn probe_susceptibility(
    state: &ThreeLevelSteadyState,
    density: f64,
    dipole_moment: f64,
    probe_rabi: f64,
) -> Result<Complex64> {
    if probe_rabi == 0.0 {
        return Err(Error::domain("probe susceptibility is undefined for a zero probe Rabi frequency"));
    }
    Ok(density * dipole_moment * dipole_moment * state.sigma_ge / (EPSILON_0 * HBAR * probe_rabi))
}

/// Probe field amplitude² |E_p|² = (ħΩ_p/μ)² in V²/m².
pub fn probe_field_sq(probe_rabi: f64, dipole_moment: f64) -> f64 {
    (HBAR * probe_rabi / dipole_moment).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSample {
    pub probe_rabi: f64,
    pub chi: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiFit {
    pub chi1: Complex64,
    pub chi3: Complex64,
    pub chi5: Complex64,
    /// RMS deviation of the fitted polynomial from the data.
    pub residual: f64,
    /// 2-norm condition number of the scaled design matrix.
    pub condition: f64,
    pub points_used: usize,
}

pub const WEAK_PROBE_LIMIT: f64 = 1e-2;
pub const MAX_FIT_CONDITION: f64 = 1e8;

/// Fits χ(|E_p|²) = χ¹ + 3χ³|E_p|² + 10χ⁵|E_p|⁴ by least squares.
///
/// Only samples with I_p/I_sat = 2(Ω_p/Γ)² below [`WEAK_PROBE_LIMIT`] enter the fit, and at
/// least five are required.
pub fn fit_chi_orders(samples: &[ChiSample], dipole_moment: f64, linewidth: f64) -> Result<ChiFit> {
    if !(linewidth > 0.0) || dipole_moment == 0.0 {
        return Err(Error::domain("fit_chi_orders needs a positive linewidth and nonzero dipole moment"));
    }
    let weak: Vec<(f64, Complex64)> = samples
        .iter()
        .filter(|s| 2.0 * (s.probe_rabi / linewidth).powi(2) < WEAK_PROBE_LIMIT)
        .map(|s| (probe_field_sq(s.probe_rabi, dipole_moment), s.chi))
        .collect();
    if weak.len() < 5 {
        return Err(Error::domain(format!(
            "need at least 5 weak-probe samples (I/I_sat < {WEAK_PROBE_LIMIT}), got {}",
            weak.len()
        )));
    }
    let scale = weak.iter().map(|w| w.0).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Numerical {
            message: "all samples have zero probe field".into(),
            residual: f64::INFINITY,
        });
    }
    let m = weak.len();
    let design = DMatrix::from_fn(m, 3, |i, j| (weak[i].0 / scale).powi(j as i32));
    let sv = design.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !(condition < MAX_FIT_CONDITION) {
        return Err(Error::Numerical {
            message: "χ-order fit is ill-conditioned".into(),
            residual: condition,
        });
    }
    let qr = design.clone().qr();
    let solve = |rhs: DVector<f64>| -> DVector<f64> {
        let qtb = qr.q().transpose() * rhs;
        qr.r().solve_upper_triangular(&qtb).expect("full-rank design")
    };
    let re = solve(DVector::from_iterator(m, weak.iter().map(|w| w.1.re)));
    let im = solve(DVector::from_iterator(m, weak.iter().map(|w| w.1.im)));
    let coeff = |k: usize| Complex64::new(re[k], im[k]) / scale.powi(k as i32);

    let fitted_re = &design * &re;
    let fitted_im = &design * &im;
    let ss: f64 = weak
        .iter()
        .enumerate()
        .map(|(i, w)| (w.1 - Complex64::new(fitted_re[i], fitted_im[i])).norm_sqr())
        .sum();
    Ok(ChiFit {
        chi1: coeff(0),
        chi3: coeff(1) / 3.0,
        chi5: coeff(2) / 10.0,
        residual: (ss / m as f64).sqrt(),
        condition,
        points_used: m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupVelocityReport {
    pub carrier: f64,
    pub index: f64,
    /// dn/dω (s).
    pub index_slope: f64,
    pub group_index: f64,
    /// c / n_g (m/s); negative for anomalous dispersion.
    pub group_velocity: f64,
    /// Relative disagreement between the two finite-difference levels (NaN when a single
    /// interpolating stencil was used).
    pub richardson_spread: f64,
}

impl GroupVelocityReport {
    fn new(carrier: f64, index: f64, index_slope: f64, richardson_spread: f64) -> Self {
        let group_index = index + carrier * index_slope;
        GroupVelocityReport {
            carrier,
            index,
            index_slope,
            group_index,
            group_velocity: SPEED_OF_LIGHT / group_index,
            richardson_spread,
        }
    }
}

/// Richardson-extrapolated central derivative of `f` at `x` from steps h and 2h.
///
/// Returns the derivative and the relative spread between the two levels.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + 2.0 * h) - f(x - 2.0 * h)) / (4.0 * h);
    let d = (4.0 * d1 - d2) / 3.0;
    let spread = if d == 0.0 { (d1 - d2).abs() } else { ((d1 - d2) / d).abs() };
    (d, spread)
}

/// Group velocity from an analytic index profile n(ω) evaluated with step `h` (rad/s).
pub fn group_velocity_from_fn(n: impl Fn(f64) -> f64, carrier: f64, h: f64) -> Result<GroupVelocityReport> {
    if !(h > 0.0) {
        return Err(Error::domain("derivative step must be positive"));
    }
    let (slope, spread) = richardson_derivative(&n, carrier, h);
    Ok(GroupVelocityReport::new(carrier, n(carrier), slope, spread))
}

/// Group velocity from sampled n(ω).
///
/// On a uniform grid containing the carrier with two samples on each side, the derivative is
/// the Richardson combination of the h and 2h central differences. Otherwise a Lagrange
/// polynomial through the (up to five) nearest samples is differentiated at the carrier.
pub fn group_velocity(omega: &[f64], index: &[f64], carrier: f64) -> Result<GroupVelocityReport> {
    if omega.len() != index.len() {
        return Err(Error::domain("frequency and index samples differ in length"));
    }
    if omega.len() < 3 {
        return Err(Error::domain("need at least 3 samples"));
    }
    if omega.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("frequency samples must be strictly increasing"));
    }
    if !(omega[0] < carrier && carrier < omega[omega.len() - 1]) {
        return Err(Error::domain("samples do not bracket the carrier frequency"));
    }

    if let Some(c) = omega.iter().position(|&w| w == carrier) {
        if c >= 2 && c + 2 < omega.len() {
            let h = omega[c + 1] - omega[c];
            let uniform = (c - 2..c + 2).all(|j| ((omega[j + 1] - omega[j]) - h).abs() <= 1e-9 * h);
            if uniform {
                let d1 = (index[c + 1] - index[c - 1]) / (2.0 * h);
                let d2 = (index[c + 2] - index[c - 2]) / (4.0 * h);
                let d = (4.0 * d1 - d2) / 3.0;
                let spread = if d == 0.0 { (d1 - d2).abs() } else { ((d1 - d2) / d).abs() };
                return Ok(GroupVelocityReport::new(carrier, index[c], d, spread));
            }
        }
    }

    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.sort_by(|&a, &b| (omega[a] - carrier).abs().total_cmp(&(omega[b] - carrier).abs()));
    let mut stencil: Vec<usize> = order.into_iter().take(5).collect();
    stencil.sort_unstable();
    let xs: Vec<f64> = stencil.iter().map(|&j| omega[j]).collect();
    let ys: Vec<f64> = stencil.iter().map(|&j| index[j]).collect();
    let (value, slope) = lagrange_value_and_derivative(&xs, &ys, carrier);
    Ok(GroupVelocityReport::new(carrier, value, slope, f64::NAN))
}

fn lagrange_value_and_derivative(xs: &[f64], ys: &[f64], x: f64) -> (f64, f64) {
    let n = xs.len();
    let mut value = 0.0;
    let mut slope = 0.0;
    for j in 0..n {
        let mut basis = 1.0;
        let mut dbasis = 0.0;
        for m in 0..n {
            if m == j {
                continue;
            }
            let denom = xs[j] - xs[m];
            dbasis = dbasis * (x - xs[m]) / denom + basis / denom;
            basis *= (x - xs[m]) / denom;
        }
        value += ys[j] * basis;
        slope += ys[j] * dbasis;
    }
    (value, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::two_level_steady_state;
    use approx::assert_relative_eq;

    fn base() -> ThreeLevelSpec {
        let mut s = ThreeLevelSpec::with_linewidth(1.0, 0.5);
        s.density = 1e17;
        s.dipole_moment = 3.5e-29;
        s
    }

    fn check_invariants(spec: &ThreeLevelSpec, st: &ThreeLevelSteadyState) {
        assert!((st.rho_gg + st.rho_ss + st.rho_ee - 1.0).abs() < 1e-10);
        for p in [st.rho_gg, st.rho_ss, st.rho_ee] {
            assert!((-1e-12..=1.0 + 1e-12).contains(&p), "population {p}");
        }
        assert!(st.residual < 1e-10, "residual {}", st.residual);
        let d = bloch3_derivatives(spec, st);
        let scale = spec.linewidth();
        assert!(d.iter().all(|c| c.norm() / scale < 1e-9));
    }

    #[test]
    fn dark_state_is_transparent() {
        let mut s = base();
        s.probe_rabi = 0.01;
        s.control_rabi = 1.0;
        s.probe_detuning = 0.3;
        s.control_detuning = 0.3;
        let st = three_level_steady_state(&s).unwrap();
        check_invariants(&s, &st);
        assert!(st.sigma_ge.im.abs() < 1e-12, "{}", st.sigma_ge);
    }

    #[test]
    fn decoupled_control_reduces_to_two_level() {
        let mut s = base();
        s.decay_eg = 1.0;
        s.decay_es = 0.0;
        s.control_rabi = 0.0;
        s.control_detuning = 0.0;
        s.ground_decay = 0.0;
        for (d, w) in [(0.0, 0.05), (0.7, 0.3), (-2.0, 1.2)] {
            s.probe_detuning = d + 5.0;
            s.probe_rabi = w;
            let st = three_level_steady_state(&s).unwrap();
            check_invariants(&s, &st);
            let two = two_level_steady_state(s.probe_detuning, w, 1.0).unwrap();
            assert!((st.sigma_ge - two.coherence).norm() < 1e-12 * two.coherence.norm());
            assert_eq!(st.rho_ss, 0.0);
        }
    }

    #[test]
    fn large_ground_decay_destroys_transparency() {
        let mut s = base();
        s.probe_rabi = 0.01;
        s.control_rabi = 0.5;
        let two = two_level_steady_state(0.0, 0.01, 1.0).unwrap().coherence.im;
        let mut last = 0.0;
        for g0 in [0.0, 1.0, 10.0, 1e3, 1e5] {
            s.ground_decay = g0;
            let st = three_level_steady_state(&s).unwrap();
            check_invariants(&s, &st);
            assert!(st.sigma_ge.im >= last - 1e-15);
            last = st.sigma_ge.im;
        }
        assert!((last / two - 1.0).abs() < 1e-2, "{last} vs {two}");
    }

    #[test]
    fn physical_units_solve() {
        let g = 2.0 * std::f64::consts::PI * 6.0666e6;
        let mut s = ThreeLevelSpec::with_linewidth(g, 0.5);
        s.probe_rabi = 0.02 * g;
        s.control_rabi = 0.8 * g;
        s.probe_detuning = 0.1 * g;
        s.ground_decay = 1e-3 * g;
        let st = three_level_steady_state(&s).unwrap();
        check_invariants(&s, &st);
    }

    #[test]
    fn susceptibility_is_linear_in_density() {
        let mut s = base();
        s.probe_rabi = 0.1;
        s.control_rabi = 0.4;
        s.probe_detuning = 0.8;
        s.ground_decay = 0.01;
        let st = three_level_steady_state(&s).unwrap();
        let a = probe_susceptibility(&st, 1e17, s.dipole_moment, s.probe_rabi).unwrap();
        let b = probe_susceptibility(&st, 2e17, s.dipole_moment, s.probe_rabi).unwrap();
        assert_relative_eq!(b.re, 2.0 * a.re, max_relative = 1e-14);
        assert!(probe_susceptibility(&st, 1e17, s.dipole_moment, 0.0).is_err());
    }

    #[test]
    fn fit_recovers_polynomials() {
        let mu = 3.5e-29;
        let g = 1e7;
        let rabis: Vec<f64> = (1..=8).map(|j| j as f64 * 0.008 * g).collect();
        let (a, b) = (Complex64::new(1e-3, 2e-4), Complex64::new(-3e-9, 1e-9));
        let samples: Vec<ChiSample> = rabis
            .iter()
            .map(|&r| ChiSample {
                probe_rabi: r,
                chi: a + b * probe_field_sq(r, mu),
            })
            .collect();
        let fit = fit_chi_orders(&samples, mu, g).unwrap();
        assert!((fit.chi1 - a).norm() < 1e-12 * a.norm());
        assert!((3.0 * fit.chi3 - b).norm() < 1e-9 * b.norm());
        assert!(fit.chi5.norm() * probe_field_sq(rabis[7], mu).powi(2) < 1e-12 * a.norm());

        let constant: Vec<ChiSample> = rabis.iter().map(|&r| ChiSample { probe_rabi: r, chi: a }).collect();
        let fit = fit_chi_orders(&constant, mu, g).unwrap();
        assert!(fit.chi3.norm() * probe_field_sq(rabis[7], mu) < 1e-13 * a.norm());
        assert!(fit_chi_orders(&constant[..4], mu, g).is_err());
    }

    #[test]
    fn group_velocity_of_simple_profiles() {
        let w: Vec<f64> = (0..11).map(|j| 1e15 + j as f64 * 1e9).collect();
        let wc = w[5];
        let flat = vec![1.5; 11];
        let r = group_velocity(&w, &flat, wc).unwrap();
        assert_relative_eq!(r.group_velocity, SPEED_OF_LIGHT / 1.5, max_relative = 1e-14);
        let s = 1e-16;
        let lin: Vec<f64> = w.iter().map(|x| 1.2 + s * (x - wc)).collect();
        let r = group_velocity(&w, &lin, wc).unwrap();
        assert_relative_eq!(r.group_index, 1.2 + wc * s, max_relative = 1e-6);
        assert!(r.group_velocity < SPEED_OF_LIGHT / 1.2);
        assert_relative_eq!(r.group_velocity * r.group_index, SPEED_OF_LIGHT, max_relative = 1e-15);
        // off-grid carrier goes through the interpolating stencil
        let r = group_velocity(&w, &lin, wc + 3e8).unwrap();
        assert_relative_eq!(r.index_slope, s, max_relative = 1e-5);
        assert!(group_velocity(&w, &lin, 0.5e15).is_err());
    }
}
