//! Optical response of a warm two-level atomic vapor.
//!
//! Everything here is a pure function of its arguments. Frequencies (detunings, linewidths,
//! Rabi frequencies) are angular, in rad/s; the only exception is [`doppler_linewidth`],
//! which returns Hz.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::{ATOMIC_MASS_UNIT, BOLTZMANN, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gk, gauss_hermite};

/// Constants of a single optical transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Vacuum wavelength (m).
    pub wavelength: f64,
    /// Natural linewidth Γ (rad/s).
    pub linewidth: f64,
    /// Transition dipole moment μ_eg (C·m).
    pub dipole_moment: f64,
    /// Atomic mass (kg).
    pub mass: f64,
    pub f_ground: f64,
    pub f_excited: f64,
    /// Resonant saturation intensity (W/m²).
    pub saturation_intensity: f64,
}

impl AtomSpec {
    pub fn new(
        wavelength: f64,
        linewidth: f64,
        dipole_moment: f64,
        mass: f64,
        f_ground: f64,
        f_excited: f64,
        saturation_intensity: f64,
    ) -> Result<Self> {
        let spec = AtomSpec {
            wavelength,
            linewidth,
            dipole_moment,
            mass,
            f_ground,
            f_excited,
            saturation_intensity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("linewidth", self.linewidth),
            ("mass", self.mass),
            ("saturation_intensity", self.saturation_intensity),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be positive and finite, got {v}")));
            }
        }
        for (name, f) in [("f_ground", self.f_ground), ("f_excited", self.f_excited)] {
            if f < 0.0 || (2.0 * f).fract() != 0.0 {
                return Err(Error::config(name, format!("must be a non-negative (half-)integer, got {f}")));
            }
        }
        let jump = self.f_excited - self.f_ground;
        if ![-1.0, 0.0, 1.0].contains(&jump) {
            return Err(Error::config("f_excited", "F_e - F_g must be -1, 0 or 1"));
        }
        Ok(())
    }

    /// ⁸⁷Rb D2 line, F=2 → F'=3 cycling transition.
    pub fn rubidium87_d2() -> Self {
        AtomSpec {
            wavelength: 780.241_209e-9,
            linewidth: 2.0 * PI * 6.0666e6,
            dipole_moment: 3.584_24e-29,
            mass: 86.909_180_527 * ATOMIC_MASS_UNIT,
            f_ground: 2.0,
            f_excited: 3.0,
            saturation_intensity: 16.69,
        }
    }

    /// ⁸⁵Rb D1 line, F=3 → F'=3 (saturation intensity for isotropic pumping).
    pub fn rubidium85_d1() -> Self {
        AtomSpec {
            wavelength: 794.979_014e-9,
            linewidth: 2.0 * PI * 5.7500e6,
            dipole_moment: 2.5377e-29,
            mass: 84.911_789_738 * ATOMIC_MASS_UNIT,
            f_ground: 3.0,
            f_excited: 3.0,
            saturation_intensity: 44.94,
        }
    }

    /// Angular wavenumber 2π/λ of the carrier (1/m).
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Thermodynamic state of the vapor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaporState {
    /// Temperature (K).
    pub temperature: f64,
    pub coeff_a: f64,
    /// Pressure-law slope B (K).
    pub coeff_b: f64,
    /// Atomic number density (m⁻³).
    pub density: f64,
    /// Number of atoms per cubic wavelength; zero when no transition was given.
    pub density_per_lambda3: f64,
}

/// Vapor-pressure coefficients for rubidium, p = 10^(A + B/T) Pa.
pub const RUBIDIUM_PRESSURE_A: f64 = 9.318;
pub const RUBIDIUM_PRESSURE_B: f64 = -4040.0;

impl VaporState {
    pub fn new(temperature: f64, coeff_a: f64, coeff_b: f64, atom: Option<&AtomSpec>) -> Result<Self> {
        let p = vapor_pressure(temperature, coeff_a, coeff_b)?;
        let density = atomic_density(temperature, p)?;
        let density_per_lambda3 = atom.map_or(0.0, |a| density * a.wavelength.powi(3));
        Ok(VaporState {
            temperature,
            coeff_a,
            coeff_b,
            density,
            density_per_lambda3,
        })
    }

    pub fn rubidium(temperature: f64, atom: Option<&AtomSpec>) -> Result<Self> {
        Self::new(temperature, RUBIDIUM_PRESSURE_A, RUBIDIUM_PRESSURE_B, atom)
    }
}

/// Saturated vapor pressure (Pa) from the two-coefficient law p = 10^(A + B/T).
pub fn vapor_pressure(temperature: f64, coeff_a: f64, coeff_b: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!("temperature must be positive, got {temperature} K")));
    }
    Ok(10f64.powf(coeff_a + coeff_b / temperature))
}

/// Ideal-gas number density n = p / (k_B T) in m⁻³.
pub fn atomic_density(temperature: f64, pressure: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!("temperature must be positive, got {temperature} K")));
    }
    if !(pressure >= 0.0) {
        return Err(Error::domain(format!("pressure must be non-negative, got {pressure} Pa")));
    }
    Ok(pressure / (BOLTZMANN * temperature))
}

/// Resonant absorption cross section (m²).
///
/// Without multiplicity this is the two-level value 3λ²/2π; with it, the degeneracy ratio
/// (2F_e+1)/(2F_g+1) replaces the factor 3.
pub fn resonant_cross_section(atom: &AtomSpec, use_multiplicity: bool) -> f64 {
    let base = atom.wavelength * atom.wavelength / (2.0 * PI);
    if use_multiplicity {
        (2.0 * atom.f_excited + 1.0) / (2.0 * atom.f_ground + 1.0) * base
    } else {
        3.0 * base
    }
}

/// Detuned saturation intensity I_sat(Δ) = [1 + 4Δ²/Γ²] I_sat⁰.
pub fn off_resonance_saturation_intensity(saturation_intensity: f64, detuning: f64, linewidth: f64) -> f64 {
    (1.0 + 4.0 * (detuning / linewidth).powi(2)) * saturation_intensity
}

/// Power-broadened, detuned cross section σ₀ / (1 + 4(Δ/Γ)² + I/I_sat).
pub fn saturated_cross_section(
    sigma0: f64,
    detuning: f64,
    linewidth: f64,
    intensity: f64,
    saturation_intensity: f64,
) -> Result<f64> {
    if !(sigma0 > 0.0) || !(linewidth > 0.0) || !(intensity >= 0.0) || !(saturation_intensity > 0.0) {
        return Err(Error::domain(
            "saturated_cross_section needs sigma0 > 0, linewidth > 0, intensity >= 0, saturation intensity > 0",
        ));
    }
    Ok(sigma0 / (1.0 + 4.0 * (detuning / linewidth).powi(2) + intensity / saturation_intensity))
}

/// Beer-law intensity transmission exp(-n σ L).
pub fn beer_transmission(density: f64, cross_section: f64, length: f64) -> f64 {
    (-density * cross_section * length).exp()
}

/// Doppler linewidth sqrt(k_B T / (m λ²)) in Hz.
pub fn doppler_linewidth(temperature: f64, mass: f64, wavelength: f64) -> Result<f64> {
    if !(temperature >= 0.0) || !(mass > 0.0) || !(wavelength > 0.0) {
        return Err(Error::domain("doppler_linewidth needs T >= 0, m > 0, wavelength > 0"));
    }
    Ok((BOLTZMANN * temperature / (mass * wavelength * wavelength)).sqrt())
}

/// Steady state of the driven two-level Bloch equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSteadyState {
    /// Optical coherence σ_ge.
    pub coherence: Complex64,
    /// Population difference ρ_ee − ρ_gg.
    pub inversion: f64,
    pub detuning: f64,
    pub rabi: f64,
}

impl TwoLevelSteadyState {
    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.inversion)
    }
}

/// Closed-form steady state of the two-level optical Bloch equations under the RWA.
pub fn two_level_steady_state(detuning: f64, rabi: f64, linewidth: f64) -> Result<TwoLevelSteadyState> {
    if !(linewidth > 0.0) {
        return Err(Error::domain("linewidth must be positive"));
    }
    let lorentz = detuning * detuning + linewidth * linewidth / 4.0;
    let inversion = -lorentz / (lorentz + rabi * rabi / 2.0);
    let coherence = -(rabi / 2.0) * inversion / Complex64::new(detuning, -linewidth / 2.0);
    Ok(TwoLevelSteadyState {
        coherence,
        inversion,
        detuning,
        rabi,
    })
}

/// Susceptibility orders of the two-level medium and the derived refractive indices.
///
/// The orders are normalised so that χ_eff = χ¹ + 3χ³|E|² + 10χ⁵|E|⁴ reproduces the
/// Taylor expansion of the saturated susceptibility, and I = ½ n₀ ε₀ c |E|².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    pub chi1: Complex64,
    /// m²/V²
    pub chi3: Complex64,
    /// m⁴/V⁴
    pub chi5: Complex64,
    pub n0: f64,
    /// m²/W
    pub n2: f64,
    /// m⁴/W²
    pub n3: f64,
}

impl Susceptibility {
    /// Builds the record from the three orders, deriving n₀, n₂, n₃.
    pub fn from_orders(chi1: Complex64, chi3: Complex64, chi5: Complex64) -> Self {
        let n0 = (1.0 + chi1.re).max(0.0).sqrt();
        let ec = EPSILON_0 * SPEED_OF_LIGHT;
        let n2 = 3.0 * chi3.re / (n0 * n0 * ec);
        let n3 = 20.0 * chi5.re / (n0.powi(3) * ec * ec) - n2 * n2 / (2.0 * n0);
        Susceptibility {
            chi1,
            chi3,
            chi5,
            n0,
            n2,
            n3,
        }
    }

    /// Intensity (W/m²) carried by a field of squared amplitude `field_sq` in this medium.
    pub fn intensity(&self, field_sq: f64) -> f64 {
        0.5 * self.n0 * EPSILON_0 * SPEED_OF_LIGHT * field_sq
    }
}

fn linear_prefactor(atom: &AtomSpec, density: f64) -> f64 {
    4.0 * density * atom.dipole_moment * atom.dipole_moment / (EPSILON_0 * HBAR * atom.linewidth * atom.linewidth)
}

/// Saturation parameter I/I_sat = 2(Ω/Γ)² with Ω = μ|E|/ħ.
pub fn saturation_parameter(atom: &AtomSpec, field_sq: f64) -> f64 {
    2.0 * atom.dipole_moment * atom.dipole_moment * field_sq / (HBAR * HBAR * atom.linewidth * atom.linewidth)
}

fn check_linewidth(atom: &AtomSpec) -> Result<()> {
    if !(atom.linewidth > 0.0) {
        return Err(Error::domain("linewidth must be positive"));
    }
    Ok(())
}

/// Unexpanded saturated susceptibility of the two-level vapor at field amplitude² `field_sq`.
pub fn saturated_chi(atom: &AtomSpec, density: f64, detuning: f64, field_sq: f64) -> Result<Complex64> {
    check_linewidth(atom)?;
    let g = atom.linewidth;
    let d = 1.0 + 4.0 * detuning * detuning / (g * g);
    let s = saturation_parameter(atom, field_sq);
    Ok(-linear_prefactor(atom, density) * Complex64::new(detuning, g / 2.0) / (d + s))
}

/// χ¹, χ³, χ⁵ of the two-level vapor from the power-series expansion in I/I_sat.
pub fn susceptibility_orders(atom: &AtomSpec, density: f64, detuning: f64) -> Result<Susceptibility> {
    check_linewidth(atom)?;
    if !(density >= 0.0) {
        return Err(Error::domain("density must be non-negative"));
    }
    let g = atom.linewidth;
    let d = 1.0 + 4.0 * detuning * detuning / (g * g);
    let chi1 = -linear_prefactor(atom, density) * Complex64::new(detuning, g / 2.0) / d;
    // I/I_sat per unit |E|^2
    let s_per_field = saturation_parameter(atom, 1.0);
    let chi3 = -chi1 * s_per_field / (3.0 * d);
    let chi5 = chi1 * s_per_field * s_per_field / (10.0 * d * d);
    Ok(Susceptibility::from_orders(chi1, chi3, chi5))
}

/// χ_eff = χ¹ + 3χ³|E|² + 10χ⁵|E|⁴.
pub fn effective_chi(chi: &Susceptibility, field_sq: f64) -> Complex64 {
    chi.chi1 + 3.0 * chi.chi3 * field_sq + 10.0 * chi.chi5 * field_sq * field_sq
}

/// n_eff = sqrt(1 + χ_eff) (principal branch).
pub fn effective_index(chi: &Susceptibility, field_sq: f64) -> Complex64 {
    (Complex64::new(1.0, 0.0) + effective_chi(chi, field_sq)).sqrt()
}

const DOPPLER_REL_TOL: f64 = 1e-8;
const HERMITE_MIN_ORDER: usize = 16;
const HERMITE_MAX_ORDER: usize = 512;

/// Averages `chi(Δ')` over the 1D Maxwell-Boltzmann velocity distribution along the beam.
///
/// Gauss-Hermite with order doubling is tried first; when the response is much narrower than
/// the Doppler width and the rule stops converging, an adaptive Gauss-Kronrod integral over
/// ±9 thermal widths takes over.
pub fn doppler_averaged_chi<F>(chi: F, temperature: f64, atom: &AtomSpec, detuning: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(temperature >= 0.0) {
        return Err(Error::domain("temperature must be non-negative"));
    }
    if temperature == 0.0 {
        return Ok(chi(detuning));
    }
    // rms Doppler shift k·σ_v (rad/s); x = v / (√2 σ_v) has weight exp(-x²)/√π
    let shift = atom.wavenumber() * (BOLTZMANN * temperature / atom.mass).sqrt() * 2f64.sqrt();
    let integrand = |x: f64| chi(detuning - shift * x);

    let hermite = |n: usize| -> Complex64 {
        let (nodes, weights) = gauss_hermite(n);
        nodes.iter().zip(&weights).map(|(&x, &w)| integrand(x) * w).sum::<Complex64>() / PI.sqrt()
    };
    let mut previous = hermite(HERMITE_MIN_ORDER);
    let mut n = HERMITE_MIN_ORDER;
    while n < HERMITE_MAX_ORDER {
        n *= 2;
        let current = hermite(n);
        if (current - previous).norm() <= DOPPLER_REL_TOL * current.norm() {
            return Ok(current);
        }
        previous = current;
    }

    let weighted = |x: f64| integrand(x) * ((-x * x).exp() / PI.sqrt());
    let scale = previous.norm().max(f64::MIN_POSITIVE);
    match adaptive_gk(weighted, -9.0, 9.0, DOPPLER_REL_TOL * scale, 20_000) {
        Some((value, _)) => Ok(value),
        None => Err(Error::Numerical {
            message: "Doppler average did not converge".into(),
            residual: f64::NAN,
        }),
    }
}

/// Cooperativity and the mode-coupling fraction β = C / (1 + C).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooperativityReport {
    pub cross_section: f64,
    pub mode_area: f64,
    pub mirror_transmission: Option<f64>,
    pub atom_number: Option<f64>,
    pub cooperativity: f64,
    pub beta: f64,
}

pub fn cooperativity(
    cross_section: f64,
    mode_area: f64,
    atom_number: Option<f64>,
    mirror_transmission: Option<f64>,
) -> Result<CooperativityReport> {
    if !(mode_area > 0.0) {
        return Err(Error::domain("mode area must be positive"));
    }
    if !(cross_section >= 0.0) {
        return Err(Error::domain("cross section must be non-negative"));
    }
    if let Some(t) = mirror_transmission {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain(format!("mirror transmission must lie in (0, 1], got {t}")));
        }
    }
    if let Some(n) = atom_number {
        if !(n >= 0.0) {
            return Err(Error::domain("atom number must be non-negative"));
        }
    }
    let mut c = cross_section / mode_area;
    if let Some(n) = atom_number {
        c *= n;
    }
    if let Some(t) = mirror_transmission {
        c /= t;
    }
    Ok(CooperativityReport {
        cross_section,
        mode_area,
        mirror_transmission,
        atom_number,
        cooperativity: c,
        beta: c / (1.0 + c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rb() -> AtomSpec {
        AtomSpec::rubidium87_d2()
    }

    #[test]
    fn pressure_and_density_at_boiling_point() {
        let p = vapor_pressure(373.15, RUBIDIUM_PRESSURE_A, RUBIDIUM_PRESSURE_B).unwrap();
        let exact = 10f64.powf(9.318 - 4040.0 / 373.15);
        assert_relative_eq!(p, exact, max_relative = 1e-14);
        assert!((p - 3.1e-2).abs() < 0.1e-2, "p = {p}");
        let n = atomic_density(373.15, p).unwrap();
        assert!((n / 6e18 - 1.0).abs() < 0.1, "n = {n}");
        assert_eq!(vapor_pressure(123.0, 0.0, 0.0).unwrap(), 1.0);
        assert!(vapor_pressure(0.0, 1.0, 1.0).is_err());
        assert_eq!(atomic_density(300.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn vapor_state_reports_density_per_cubic_wavelength() {
        let atom = rb();
        let v = VaporState::rubidium(373.15, Some(&atom)).unwrap();
        assert_relative_eq!(v.density_per_lambda3, v.density * atom.wavelength.powi(3), max_relative = 1e-14);
        assert!(VaporState::rubidium(-1.0, None).is_err());
    }

    #[test]
    fn cross_sections() {
        let mut atom = rb();
        atom.wavelength = 780e-9;
        let s0 = resonant_cross_section(&atom, false);
        assert!((s0 / 2.905e-13 - 1.0).abs() < 1e-3);
        let sm = resonant_cross_section(&atom, true);
        assert!((sm * 1e4 / 1.36e-9 - 1.0).abs() < 0.01, "{}", sm * 1e4);
        atom.f_excited = atom.f_ground;
        assert_relative_eq!(resonant_cross_section(&atom, true), 780e-9f64.powi(2) / (2.0 * PI));
    }

    #[test]
    fn saturation_halves_cross_section() {
        let g = 2.0 * PI * 6e6;
        assert_relative_eq!(saturated_cross_section(1.0, 0.0, g, 16.0, 16.0).unwrap(), 0.5);
        assert_relative_eq!(saturated_cross_section(1.0, 0.0, g, 0.0, 16.0).unwrap(), 1.0);
        let d = 3.3 * g;
        let isat = off_resonance_saturation_intensity(16.0, d, g);
        let low = saturated_cross_section(1.0, d, g, 0.0, 16.0).unwrap();
        let high = saturated_cross_section(1.0, d, g, isat, 16.0).unwrap();
        assert_relative_eq!(high, low / 2.0, max_relative = 1e-14);
        assert!(saturated_cross_section(1.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn beer_law() {
        assert_eq!(beer_transmission(1e18, 0.0, 1.0), 1.0);
        assert_relative_eq!(beer_transmission(1.0, 1.0, 1.0), (-1.0f64).exp());
        let (n, s) = (3e17, 1e-13);
        assert_relative_eq!(
            beer_transmission(n, s, 0.3),
            beer_transmission(n, s, 0.1) * beer_transmission(n, s, 0.2),
            max_relative = 1e-14
        );
    }

    #[test]
    fn doppler_width_scaling() {
        let atom = rb();
        let gd = doppler_linewidth(373.15, atom.mass, 780e-9).unwrap();
        assert!((gd / 250e6 - 1.0).abs() < 0.05, "{gd}");
        let g1 = doppler_linewidth(100.0, atom.mass, 780e-9).unwrap();
        let g4 = doppler_linewidth(400.0, atom.mass, 780e-9).unwrap();
        assert_relative_eq!(g4, 2.0 * g1, max_relative = 1e-14);
        assert_eq!(doppler_linewidth(0.0, atom.mass, 780e-9).unwrap(), 0.0);
    }

    #[test]
    fn two_level_limits() {
        let g = 1.0;
        let weak = two_level_steady_state(0.0, 1e-6, g).unwrap();
        assert_relative_eq!(weak.inversion, -1.0, epsilon = 1e-11);
        assert_relative_eq!(weak.coherence.im, 1e-6 / g, max_relative = 1e-9);
        assert!(weak.coherence.re.abs() < 1e-15);
        let sat = two_level_steady_state(0.0, g / 2f64.sqrt(), g).unwrap();
        assert!((sat.inversion + 0.5).abs() < 4.0 * f64::EPSILON);
        let far = two_level_steady_state(1e9, 1.0, g).unwrap();
        assert!(far.inversion < -1.0 + 1e-15 && far.coherence.norm() < 1e-9);
    }

    #[test]
    fn empty_vapor_has_no_response() {
        let chi = susceptibility_orders(&rb(), 0.0, 1e9).unwrap();
        assert_eq!(chi.chi1, Complex64::new(0.0, 0.0));
        assert_eq!(chi.n0, 1.0);
        assert_eq!(chi.n2, 0.0);
        assert_eq!(chi.n3, 0.0);
    }

    #[test]
    fn signs_for_blue_detuning() {
        let atom = rb();
        let chi = susceptibility_orders(&atom, 1e18, 5.0 * atom.linewidth).unwrap();
        assert!(chi.chi1.re < 0.0);
        assert!(chi.chi3.re > 0.0);
        assert!(chi.chi5.re < 0.0);
        let mut zero = atom;
        zero.linewidth = 0.0;
        assert!(susceptibility_orders(&zero, 1e18, 1.0).is_err());
    }

    #[test]
    fn far_detuned_scalings() {
        let atom = rb();
        let g = atom.linewidth;
        let at = |d: f64| {
            let c = susceptibility_orders(&atom, 1e18, d).unwrap();
            (c.chi1.im * d * d, c.chi3.re * d.powi(3))
        };
        let (a1, b1) = at(1e3 * g);
        let (a2, b2) = at(1e4 * g);
        assert!((a1 / a2 - 1.0).abs() < 1e-5);
        assert!((b1 / b2 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn effective_chi_coefficients() {
        let atom = rb();
        let chi = susceptibility_orders(&atom, 1e18, 2.0 * atom.linewidth).unwrap();
        assert_eq!(effective_chi(&chi, 0.0), chi.chi1);
        let h = 1e3;
        let slope = (effective_chi(&chi, h) - effective_chi(&chi, -h)) / (2.0 * h);
        assert_relative_eq!(slope.re, 3.0 * chi.chi3.re, max_relative = 1e-8);
    }

    #[test]
    fn index_expansion_matches_chi() {
        // n_eff^2 = 1 + Re chi_eff must equal (n0 + n2 I + n3 I^2)^2 up to O(I^3)
        let atom = rb();
        let chi = susceptibility_orders(&atom, 5e17, 3.0 * atom.linewidth).unwrap();
        let e2 = 1e4;
        let i = chi.intensity(e2);
        let lhs = 1.0 + effective_chi(&chi, e2).re;
        let rhs = chi.n0 * chi.n0 + 2.0 * chi.n0 * chi.n2 * i + (2.0 * chi.n0 * chi.n3 + chi.n2 * chi.n2) * i * i;
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn doppler_average_trivial_cases() {
        let atom = rb();
        let lorentz = |d: f64| Complex64::new(1.0, 0.0) / Complex64::new(d, atom.linewidth / 2.0);
        let d = 1.3 * atom.linewidth;
        assert_eq!(doppler_averaged_chi(lorentz, 0.0, &atom, d).unwrap(), lorentz(d));
        let c = doppler_averaged_chi(|_| Complex64::new(2.5, -1.0), 373.0, &atom, 0.0).unwrap();
        assert_relative_eq!(c.re, 2.5, max_relative = 1e-12);
        assert_relative_eq!(c.im, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn doppler_average_matches_riemann_sum_and_broadens() {
        let atom = rb();
        let chi = |d: f64| saturated_chi(&atom, 1e17, d, 0.0).unwrap();
        let t = 1e-3;
        let shift = atom.wavenumber() * (BOLTZMANN * t / atom.mass).sqrt() * 2f64.sqrt();
        let d = 0.7 * atom.linewidth;
        let avg = doppler_averaged_chi(chi, t, &atom, d).unwrap();
        let n = 200_000;
        let dx = 18.0 / n as f64;
        let brute: Complex64 = (0..=n)
            .map(|j| {
                let x = -9.0 + j as f64 * dx;
                chi(d - shift * x) * (-x * x).exp()
            })
            .sum::<Complex64>()
            * dx
            / PI.sqrt();
        assert!((avg - brute).norm() < 1e-6 * brute.norm());

        let hwhm = |t: f64| {
            let peak = doppler_averaged_chi(chi, t, &atom, 0.0).unwrap().im;
            let mut lo = 0.0;
            let mut hi = 1e4 * atom.linewidth;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if doppler_averaged_chi(chi, t, &atom, mid).unwrap().im.abs() > 0.5 * peak.abs() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let w_cold = hwhm(1e-6);
        let w_warm = hwhm(373.15);
        assert!((w_cold / (atom.linewidth / 2.0) - 1.0).abs() < 0.02);
        let gd = doppler_linewidth(373.15, atom.mass, atom.wavelength).unwrap() * 2.0 * PI;
        assert!(w_warm > 10.0 * w_cold);
        assert!(w_warm > 0.5 * gd && w_warm < 2.0 * gd, "{w_warm} {gd}");
    }

    #[test]
    fn doppler_average_preserves_even_absorption() {
        let atom = rb();
        let chi = |d: f64| saturated_chi(&atom, 1e17, d, 0.0).unwrap();
        for d in [0.3, 2.0, 40.0] {
            let d = d * atom.linewidth;
            let p = doppler_averaged_chi(chi, 350.0, &atom, d).unwrap().im;
            let m = doppler_averaged_chi(chi, 350.0, &atom, -d).unwrap().im;
            assert_relative_eq!(p, m, max_relative = 1e-7);
        }
    }

    #[test]
    fn cooperativity_scalings() {
        let r = cooperativity(1.0, 1.0, None, None).unwrap();
        assert_eq!(r.beta, 0.5);
        let base = cooperativity(1e-13, 1e-10, None, None).unwrap().cooperativity;
        assert_relative_eq!(cooperativity(1e-13, 1e-10, Some(10.0), None).unwrap().cooperativity, 10.0 * base);
        assert_relative_eq!(
            cooperativity(1e-13, 1e-10, None, Some(0.01)).unwrap().cooperativity,
            100.0 * base,
            max_relative = 1e-12
        );
        assert!(cooperativity(1.0, 0.0, None, None).is_err());
        assert!(cooperativity(1.0, 1.0, None, Some(0.0)).is_err());
    }
}
