//! Analytic dispersion relations: planar-cavity photons, exciton-polaritons, Bogoliubov
//! spectra in matter and optical form, and the Landau critical velocity.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Planar Fabry-Perot microcavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    pub index: f64,
    /// Cavity length (m).
    pub length: f64,
    /// Longitudinal mode number p ≥ 1.
    pub mode: u32,
    /// Photon linewidth Γ_C (rad/s).
    pub photon_linewidth: f64,
    /// Exciton linewidth Γ_X (rad/s).
    pub exciton_linewidth: f64,
    pub quality_factor: Option<f64>,
}

impl CavitySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.index > 0.0) || !(self.length > 0.0) || self.mode == 0 {
            return Err(Error::domain("cavity needs index > 0, length > 0 and mode >= 1"));
        }
        if let Some(q) = self.quality_factor {
            if !(q > 0.0) {
                return Err(Error::domain("quality factor must be positive"));
            }
        }
        Ok(())
    }

    /// Quantized longitudinal wavevector k_z = pπ/(n_c L).
    pub fn kz(&self) -> f64 {
        self.mode as f64 * PI / (self.index * self.length)
    }

    /// Effective photon mass m* = n_c ħ k_z / c.
    pub fn effective_mass(&self) -> f64 {
        self.index * HBAR * self.kz() / SPEED_OF_LIGHT
    }

    /// Photon lifetime τ_C = Q/ω_C(0), when a quality factor is given.
    pub fn photon_lifetime(&self) -> Option<f64> {
        self.quality_factor.map(|q| q / (SPEED_OF_LIGHT * self.kz() / self.index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityMode {
    /// ω_C(k⊥) in the paraxial expansion (rad/s).
    pub omega: f64,
    pub effective_mass: f64,
}

/// Paraxial cavity dispersion ħω_C = ħck_z/n_c + ħ²k⊥²/2m*.
pub fn cavity_dispersion(spec: &CavitySpec, k_perp: f64) -> Result<CavityMode> {
    spec.validate()?;
    let mass = spec.effective_mass();
    Ok(CavityMode {
        omega: SPEED_OF_LIGHT * spec.kz() / spec.index + HBAR * k_perp * k_perp / (2.0 * mass),
        effective_mass: mass,
    })
}

/// Exact (non-paraxial) cavity dispersion ω = (c/n_c) sqrt(k_z² + k⊥²).
pub fn cavity_dispersion_exact(spec: &CavitySpec, k_perp: f64) -> Result<f64> {
    spec.validate()?;
    Ok(SPEED_OF_LIGHT / spec.index * spec.kz().hypot(k_perp))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonBranches {
    pub k: Vec<f64>,
    pub cavity: Vec<f64>,
    pub exciton: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Hopfield exciton coefficient X_k.
    pub hopfield_x: Vec<f64>,
    /// Hopfield photon coefficient C_k (negative by convention).
    pub hopfield_c: Vec<f64>,
    pub rabi: f64,
}

/// Upper and lower polariton branches and Hopfield coefficients from the bare cavity and
/// exciton dispersions sampled on the same k grid.
pub fn polariton_branches(k: &[f64], cavity: &[f64], exciton: &[f64], rabi: f64) -> Result<PolaritonBranches> {
    if !(rabi >= 0.0) {
        return Err(Error::domain("Rabi splitting must be non-negative"));
    }
    if cavity.len() != k.len() || exciton.len() != k.len() {
        return Err(Error::domain("cavity, exciton and k samples differ in length"));
    }
    let n = k.len();
    let mut out = PolaritonBranches {
        k: k.to_vec(),
        cavity: cavity.to_vec(),
        exciton: exciton.to_vec(),
        lower: Vec::with_capacity(n),
        upper: Vec::with_capacity(n),
        hopfield_x: Vec::with_capacity(n),
        hopfield_c: Vec::with_capacity(n),
        rabi,
    };
    for (&wc, &wx) in cavity.iter().zip(exciton) {
        let mean = 0.5 * (wc + wx);
        let detuning = wx - wc;
        let root = (detuning * detuning + 4.0 * rabi * rabi).sqrt();
        out.lower.push(mean - 0.5 * root);
        out.upper.push(mean + 0.5 * root);
        // X = |ω_LP − ω_C| / hypot(ω_LP − ω_C, Ω_R), C = −Ω_R / hypot(...), written without
        // cancellation for either sign of the detuning
        let (x, c) = if detuning > 0.0 {
            let a = detuning + root;
            let norm = (2.0 * rabi).hypot(a);
            (2.0 * rabi / norm, -a / norm)
        } else {
            let shift = 0.5 * (detuning - root);
            let norm = shift.hypot(rabi);
            if norm == 0.0 {
                (std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2)
            } else {
                (shift.abs() / norm, -rabi / norm)
            }
        };
        out.hopfield_x.push(x);
        out.hopfield_c.push(c);
    }
    Ok(out)
}

/// Strong coupling holds when Ω_R exceeds both linewidths strictly.
pub fn strong_coupling_check(rabi: f64, photon_linewidth: f64, exciton_linewidth: f64) -> Result<bool> {
    if !(rabi >= 0.0) || !(photon_linewidth >= 0.0) || !(exciton_linewidth >= 0.0) {
        return Err(Error::domain("strong coupling check needs non-negative rates"));
    }
    Ok(rabi > photon_linewidth.max(exciton_linewidth))
}

/// Parameters of a weakly interacting Bose fluid, either massive or photonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BogoliubovParams {
    /// g (J·m² in 2D, J·m³ in 3D), n (per area or volume), m (kg).
    Matter { coupling: f64, density: f64, mass: f64 },
    /// k₀ (1/m), χ³ (m²/V²), |E₀|² (V²/m²), n₀.
    Optical { k0: f64, chi3: f64, field_sq: f64, n0: f64 },
}

impl BogoliubovParams {
    fn check(&self) -> Result<()> {
        match *self {
            BogoliubovParams::Matter { coupling, density, mass } => {
                if !(mass > 0.0) {
                    return Err(Error::domain("mass must be positive"));
                }
                if !(coupling * density >= 0.0) {
                    return Err(Error::domain("attractive interaction (g·n < 0) has no real Bogoliubov branch"));
                }
            }
            BogoliubovParams::Optical { k0, chi3, field_sq, n0 } => {
                if !(k0 > 0.0) || !(n0 > 0.0) || !(field_sq >= 0.0) {
                    return Err(Error::domain("optical Bogoliubov form needs k0 > 0, n0 > 0, |E0|^2 >= 0"));
                }
                if !(chi3 * field_sq <= 0.0) {
                    return Err(Error::domain("focusing nonlinearity (χ³|E₀|² > 0) has no real Bogoliubov branch"));
                }
            }
        }
        Ok(())
    }

    /// Mass-like coefficient in ε₀(q) = q²/(2·inertia): m/ħ for matter (values in rad/s) and
    /// k₀ for light (values in 1/m).
    fn inertia(&self) -> f64 {
        match *self {
            BogoliubovParams::Matter { mass, .. } => mass / HBAR,
            BogoliubovParams::Optical { k0, .. } => k0,
        }
    }

    /// Interaction energy gn in the same units as the spectrum (rad/s or 1/m).
    pub fn interaction(&self) -> f64 {
        match *self {
            BogoliubovParams::Matter { coupling, density, .. } => coupling * density / HBAR,
            BogoliubovParams::Optical { k0, chi3, field_sq, n0 } => -k0 * chi3 * field_sq / (2.0 * n0 * n0),
        }
    }

    /// Speed of sound: sqrt(gn/m) (m/s) or sqrt(−χ³|E₀|²/2n₀²) (dimensionless).
    pub fn sound_speed(&self) -> Result<f64> {
        self.check()?;
        Ok((self.interaction() / self.inertia()).sqrt())
    }

    /// Healing length ξ = 1/(inertia·c_s); infinite without interactions.
    pub fn healing_length(&self) -> Result<f64> {
        let cs = self.sound_speed()?;
        Ok(1.0 / (self.inertia() * cs))
    }

    pub fn free_energy(&self, q: f64) -> f64 {
        q * q / (2.0 * self.inertia())
    }

    /// Bogoliubov spectrum sqrt(ε₀(ε₀ + 2gn)) in rad/s (matter) or 1/m (optical).
    pub fn spectrum(&self, q: f64) -> Result<f64> {
        self.check()?;
        let e0 = self.free_energy(q);
        Ok((e0 * (e0 + 2.0 * self.interaction())).sqrt())
    }

    /// Group velocity dΩ/dq of the spectrum.
    pub fn group_velocity(&self, q: f64) -> Result<f64> {
        self.check()?;
        let m = self.inertia();
        let gn = self.interaction();
        let e0 = self.free_energy(q);
        if q == 0.0 {
            return self.sound_speed();
        }
        let omega = (e0 * (e0 + 2.0 * gn)).sqrt();
        Ok((2.0 * e0 + 2.0 * gn) * (q / m) / (2.0 * omega))
    }
}

/// Matter Bogoliubov frequency ε(q)/ħ (rad/s).
pub fn bogoliubov_matter(q: f64, coupling: f64, density: f64, mass: f64) -> Result<f64> {
    BogoliubovParams::Matter { coupling, density, mass }.spectrum(q)
}

/// Optical Bogoliubov spatial frequency Ω_B(k⊥) (1/m).
pub fn bogoliubov_optical(k_perp: f64, k0: f64, chi3: f64, field_sq: f64, n0: f64) -> Result<f64> {
    BogoliubovParams::Optical { k0, chi3, field_sq, n0 }.spectrum(k_perp)
}

/// Sampled dispersion relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub k: Vec<f64>,
    pub value: Vec<f64>,
    pub label: String,
    /// Present when the curve is a Bogoliubov spectrum; its q→0 slope.
    pub sound_speed: Option<f64>,
}

impl DispersionCurve {
    pub fn new(k: Vec<f64>, value: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if k.len() != value.len() {
            return Err(Error::domain("wavevector and value samples differ in length"));
        }
        if k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("wavevectors must be strictly increasing"));
        }
        if k.iter().chain(&value).any(|v| !v.is_finite()) {
            return Err(Error::domain("dispersion samples must be finite"));
        }
        Ok(DispersionCurve {
            k,
            value,
            label: label.into(),
            sound_speed: None,
        })
    }

    /// Samples a Bogoliubov spectrum and records its sound speed.
    pub fn bogoliubov(params: &BogoliubovParams, k: &[f64]) -> Result<Self> {
        let value = k.iter().map(|&q| params.spectrum(q)).collect::<Result<Vec<_>>>()?;
        let mut curve = Self::new(k.to_vec(), value, "bogoliubov")?;
        curve.sound_speed = Some(params.sound_speed()?);
        Ok(curve)
    }

    /// Two-column CSV with header `k,value` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,value")?;
        for (k, v) in self.k.iter().zip(&self.value) {
            writeln!(out, "{k:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauReport {
    pub critical_velocity: f64,
    /// Wavevector where the minimum of value/k occurs; 0 for the analytic q→0 limit.
    pub argmin: f64,
}

/// Landau critical velocity min_q ε(q)/(ħq).
///
/// For Bogoliubov curves the analytic q→0 limit c_s also competes; ties go to the smaller q.
pub fn landau_critical_velocity(curve: &DispersionCurve) -> Result<LandauReport> {
    if curve.k.is_empty() {
        return Err(Error::domain("empty dispersion curve"));
    }
    if !(curve.k[0] > 0.0) {
        return Err(Error::domain("dispersion curve must exclude q <= 0 (ratio undefined)"));
    }
    if curve.value.iter().any(|&v| v < 0.0) {
        return Err(Error::domain("dispersion values must be non-negative"));
    }
    let mut best = match curve.sound_speed {
        Some(cs) => LandauReport {
            critical_velocity: cs,
            argmin: 0.0,
        },
        None => LandauReport {
            critical_velocity: f64::INFINITY,
            argmin: f64::NAN,
        },
    };
    for (&k, &v) in curve.k.iter().zip(&curve.value) {
        let ratio = v / k;
        if ratio < best.critical_velocity {
            best = LandauReport {
                critical_velocity: ratio,
                argmin: k,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix2, SymmetricEigen};

    fn gaas() -> CavitySpec {
        CavitySpec {
            index: 3.5,
            length: 2.0 * 830e-9 / 3.5,
            mode: 4,
            photon_linewidth: 1e10,
            exciton_linewidth: 5e9,
            quality_factor: Some(3000.0),
        }
    }

    #[test]
    fn cavity_at_normal_incidence_and_curvature() {
        let c = gaas();
        let m0 = cavity_dispersion(&c, 0.0).unwrap();
        assert_relative_eq!(m0.omega, SPEED_OF_LIGHT * c.kz() / c.index, max_relative = 1e-15);
        let h = 1e4;
        let curv = (cavity_dispersion(&c, h).unwrap().omega - 2.0 * m0.omega + cavity_dispersion(&c, -h).unwrap().omega)
            / (h * h);
        assert_relative_eq!(HBAR * curv, HBAR * HBAR / m0.effective_mass, max_relative = 1e-4);
        assert!(c.photon_lifetime().unwrap() > 0.0);
    }

    #[test]
    fn paraxial_error_is_quartic() {
        let c = gaas();
        let err = |k: f64| {
            let exact = cavity_dispersion_exact(&c, k).unwrap();
            ((cavity_dispersion(&c, k).unwrap().omega - exact) / exact).abs()
        };
        let k1 = 0.01 * c.kz();
        let slope = (err(2.0 * k1) / err(k1)).log2();
        assert!((slope - 4.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn resonant_polaritons() {
        let b = polariton_branches(&[0.0], &[1500.0], &[1500.0], 10.0).unwrap();
        assert_relative_eq!(b.lower[0], 1490.0);
        assert_relative_eq!(b.upper[0], 1510.0);
        assert_relative_eq!(b.hopfield_x[0].powi(2), 0.5, max_relative = 1e-15);
        assert_relative_eq!(b.hopfield_c[0].powi(2), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn red_detuned_lower_branch_is_photonic() {
        let b = polariton_branches(&[0.0], &[1400.0], &[1500.0], 5.0).unwrap();
        assert!(b.hopfield_c[0].powi(2) > 0.997);
        let b = polariton_branches(&[0.0], &[1.0], &[1e6], 5.0).unwrap();
        assert!(1.0 - b.hopfield_c[0].powi(2) < 1e-10);
    }

    #[test]
    fn branches_match_eigensolve() {
        let k: Vec<f64> = (0..200).map(|j| j as f64 * 1e4).collect();
        let wc: Vec<f64> = k.iter().map(|k| 1495.0 + 1e-9 * k * k).collect();
        let wx = vec![1500.0; k.len()];
        let b = polariton_branches(&k, &wc, &wx, 7.0).unwrap();
        for j in 0..k.len() {
            let m = Matrix2::new(wc[j], 7.0, 7.0, wx[j]);
            let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            assert_relative_eq!(b.lower[j], ev[0], max_relative = 1e-12);
            assert_relative_eq!(b.upper[j], ev[1], max_relative = 1e-12);
            assert!((b.hopfield_x[j].powi(2) + b.hopfield_c[j].powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uncoupled_branches() {
        let b = polariton_branches(&[0.0, 1.0], &[1.0, 3.0], &[2.0, 2.0], 0.0).unwrap();
        assert_eq!((b.lower[0], b.upper[0]), (1.0, 2.0));
        assert_eq!((b.hopfield_x[0], b.hopfield_c[0].abs()), (0.0, 1.0));
        assert_eq!((b.hopfield_x[1], b.hopfield_c[1].abs()), (1.0, 0.0));
    }

    #[test]
    fn strong_coupling_boundaries() {
        assert!(!strong_coupling_check(0.0, 1.0, 1.0).unwrap());
        assert!(strong_coupling_check(2.0, 1.0, 1.0).unwrap());
        assert!(!strong_coupling_check(1.0, 1.0, 0.5).unwrap());
        assert!(strong_coupling_check(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn bogoliubov_matter_limits() {
        let (g, n, m) = (1e-51, 1e14, 1e-35);
        let q = 1e5;
        let free = HBAR * q * q / (2.0 * m);
        assert_relative_eq!(bogoliubov_matter(q, 0.0, n, m).unwrap(), free, max_relative = 1e-15);
        let gn = g * n;
        let q2 = (2.0 * gn * 2.0 * m).sqrt() / HBAR;
        assert_relative_eq!(
            HBAR * bogoliubov_matter(q2, g, n, m).unwrap(),
            2.0 * 2f64.sqrt() * gn,
            max_relative = 1e-14
        );
        assert!(bogoliubov_matter(q, -g, n, m).is_err());
    }

    #[test]
    fn bogoliubov_optical_limits_and_crossing() {
        let (k0, n0) = (8e6, 1.0);
        assert_relative_eq!(bogoliubov_optical(1e4, k0, 0.0, 1.0, n0).unwrap(), 1e8 / (2.0 * k0));
        let p = BogoliubovParams::Optical {
            k0,
            chi3: -1e-9,
            field_sq: 1e4,
            n0,
        };
        let cs = p.sound_speed().unwrap();
        assert_relative_eq!(cs, (1e-5f64 / 2.0).sqrt(), max_relative = 1e-15);
        let xi = p.healing_length().unwrap();
        let q = 1e-3 / xi;
        assert!((p.spectrum(q).unwrap() / q / cs - 1.0).abs() < 1e-5);
        // sonic line c_s k and free parabola k²/2k₀ meet at 2/ξ
        let kx = 2.0 / xi;
        assert_relative_eq!(cs * kx, kx * kx / (2.0 * k0), max_relative = 1e-14);
        assert!(bogoliubov_optical(1e4, k0, 1e-9, 1e4, n0).is_err());
    }

    #[test]
    fn group_velocity_matches_numeric_derivative() {
        let p = BogoliubovParams::Optical {
            k0: 8e6,
            chi3: -1e-9,
            field_sq: 1e4,
            n0: 1.0,
        };
        for q in [1e2, 1e4, 3e4] {
            let h = q * 1e-5;
            let num = (p.spectrum(q + h).unwrap() - p.spectrum(q - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(p.group_velocity(q).unwrap(), num, max_relative = 1e-7);
        }
    }

    #[test]
    fn landau_velocities() {
        let p = BogoliubovParams::Matter {
            coupling: 1e-51,
            density: 1e14,
            mass: 1e-35,
        };
        let xi = p.healing_length().unwrap();
        let k: Vec<f64> = (1..=100).map(|j| j as f64 * 0.05 / xi).collect();
        let curve = DispersionCurve::bogoliubov(&p, &k).unwrap();
        let r = landau_critical_velocity(&curve).unwrap();
        assert_eq!(r.critical_velocity, p.sound_speed().unwrap());

        let mut plain = curve.clone();
        plain.sound_speed = None;
        let r = landau_critical_velocity(&plain).unwrap();
        assert_eq!(r.argmin, k[0]);
        assert!((r.critical_velocity / p.sound_speed().unwrap() - 1.0) < 1e-3);

        let lin = DispersionCurve::new(vec![1.0, 2.0], vec![3.0, 6.0], "linear").unwrap();
        assert_eq!(landau_critical_velocity(&lin).unwrap().critical_velocity, 3.0);
        let empty = DispersionCurve::new(vec![], vec![], "empty").unwrap();
        assert!(landau_critical_velocity(&empty).is_err());
    }

    #[test]
    fn csv_round_trip_digits() {
        let c = DispersionCurve::new(vec![0.1, 0.2], vec![1.0 / 3.0, 2.0], "x").unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,value"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row, vec![0.1, 1.0 / 3.0]);
        assert!(DispersionCurve::new(vec![1.0, 1.0], vec![0.0, 0.0], "bad").is_err());
    }
}
