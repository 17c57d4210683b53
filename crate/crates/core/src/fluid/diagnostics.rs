use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{ComplexField, Grid};
use crate::constants::HBAR;
use crate::error::{Error, Result};

/// Fraction of the peak density below which phase and velocity are undefined.
pub const VACUUM_THRESHOLD: f64 = 1e-6;

/// Converts phase gradients into velocities: 1/k₀ for light, ħ/m for matter waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MassEquivalent {
    Optical { k0: f64 },
    Matter { mass: f64 },
}

impl MassEquivalent {
    pub fn velocity_factor(&self) -> f64 {
        match *self {
            MassEquivalent::Optical { k0 } => 1.0 / k0,
            MassEquivalent::Matter { mass } => HBAR / mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadelungFields {
    pub grid: Grid,
    pub density: Vec<f64>,
    /// Wrapped phase, or unwrapped when requested.
    pub phase: Vec<f64>,
    /// NaN where the density is below the vacuum threshold.
    pub velocity_x: Vec<f64>,
    pub velocity_y: Vec<f64>,
    pub vacuum: Vec<bool>,
    pub threshold: f64,
    /// Largest disagreement (rad) between the row-first and column-first unwrapping paths;
    /// zero when no unwrapping was requested.
    pub unwrap_inconsistency: f64,
}

pub(crate) fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Removes 2π jumps along a sequence.
pub fn unwrap_1d(phase: &mut [f64]) {
    for i in 1..phase.len() {
        let prev = phase[i - 1];
        phase[i] = prev + wrap(phase[i] - prev);
    }
}

fn unwrap_2d(phase: &[f64], nx: usize, ny: usize, rows_first: bool) -> Vec<f64> {
    let mut out = phase.to_vec();
    if rows_first {
        let mut col: Vec<f64> = (0..ny).map(|j| out[j * nx]).collect();
        unwrap_1d(&mut col);
        for j in 0..ny {
            out[j * nx] = col[j];
            unwrap_1d(&mut out[j * nx..(j + 1) * nx]);
        }
    } else {
        unwrap_1d(&mut out[..nx]);
        for i in 0..nx {
            let mut col: Vec<f64> = (0..ny).map(|j| out[j * nx + i]).collect();
            unwrap_1d(&mut col);
            for j in 0..ny {
                out[j * nx + i] = col[j];
            }
        }
    }
    out
}

/// Density, phase and velocity of a field via ψ = √ρ e^{iφ}.
///
/// Gradients are centered differences of the wrapped phase on the periodic grid.
pub fn madelung(field: &ComplexField, mass: MassEquivalent, unwrap: bool) -> MadelungFields {
    let g = field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let density = field.density();
    let peak = density.iter().cloned().fold(0.0, f64::max);
    let threshold = VACUUM_THRESHOLD * peak;
    let vacuum: Vec<bool> = density.iter().map(|&r| r < threshold || r == 0.0).collect();
    let wrapped: Vec<f64> = field.data.iter().map(|c| c.arg()).collect();
    let factor = mass.velocity_factor();

    let mut vx = vec![f64::NAN; g.len()];
    let mut vy = vec![f64::NAN; g.len()];
    for j in 0..ny {
        for i in 0..nx {
            let idx = g.index(i, j);
            if vacuum[idx] {
                continue;
            }
            let (ip, im) = (g.index((i + 1) % nx, j), g.index((i + nx - 1) % nx, j));
            vx[idx] = factor * wrap(wrapped[ip] - wrapped[im]) / (2.0 * g.dx);
            vy[idx] = if g.is_1d() {
                0.0
            } else {
                let (jp, jm) = (g.index(i, (j + 1) % ny), g.index(i, (j + ny - 1) % ny));
                factor * wrap(wrapped[jp] - wrapped[jm]) / (2.0 * g.dy)
            };
        }
    }

    let (phase, unwrap_inconsistency) = if unwrap {
        let a = unwrap_2d(&wrapped, nx, ny, true);
        let b = unwrap_2d(&wrapped, nx, ny, false);
        let worst = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        (a, worst)
    } else {
        (wrapped, 0.0)
    };

    MadelungFields {
        grid: g,
        density,
        phase,
        velocity_x: vx,
        velocity_y: vy,
        vacuum,
        threshold,
        unwrap_inconsistency,
    }
}

/// Max-norm of ∂ρ/∂t + ∇·(ρv) over consecutive snapshots spaced `dt`, times dt/max ρ.
///
/// Interior snapshots use a centered time difference; with two snapshots the flux is averaged
/// between them. Cells touching vacuum are skipped.
pub fn continuity_residual(snapshots: &[MadelungFields], dt: f64) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(Error::domain("continuity residual needs at least two snapshots"));
    }
    if !(dt > 0.0) {
        return Err(Error::domain("snapshot spacing must be positive"));
    }
    let g = snapshots[0].grid;
    if snapshots.iter().any(|s| s.grid != g || s.density.len() != g.len()) {
        return Err(Error::domain("snapshots are on mismatched grids"));
    }
    let flux_div = |s: &MadelungFields| -> Vec<f64> {
        let (nx, ny) = (g.nx, g.ny);
        let fx: Vec<f64> = s.density.iter().zip(&s.velocity_x).map(|(r, v)| r * v).collect();
        let fy: Vec<f64> = s.density.iter().zip(&s.velocity_y).map(|(r, v)| r * v).collect();
        let mut div = vec![f64::NAN; g.len()];
        for j in 0..ny {
            for i in 0..nx {
                let idx = g.index(i, j);
                let dxf = (fx[g.index((i + 1) % nx, j)] - fx[g.index((i + nx - 1) % nx, j)]) / (2.0 * g.dx);
                let dyf = if g.is_1d() {
                    0.0
                } else {
                    (fy[g.index(i, (j + 1) % ny)] - fy[g.index(i, (j + ny - 1) % ny)]) / (2.0 * g.dy)
                };
                div[idx] = dxf + dyf;
            }
        }
        div
    };
    let divs: Vec<Vec<f64>> = snapshots.iter().map(flux_div).collect();
    let peak = snapshots
        .iter()
        .flat_map(|s| s.density.iter())
        .cloned()
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    let n = snapshots.len();
    let mut consider = |dr: f64, div: f64| {
        let r = dr + div;
        if r.is_finite() {
            worst = worst.max(r.abs());
        }
    };
    if n == 2 {
        for idx in 0..g.len() {
            let dr = (snapshots[1].density[idx] - snapshots[0].density[idx]) / dt;
            consider(dr, 0.5 * (divs[0][idx] + divs[1][idx]));
        }
    } else {
        for t in 1..n - 1 {
            for idx in 0..g.len() {
                let dr = (snapshots[t + 1].density[idx] - snapshots[t - 1].density[idx]) / (2.0 * dt);
                consider(dr, divs[t][idx]);
            }
        }
    }
    Ok(worst * dt / peak)
}

/// Winding number (1/2π)Σ wrap(Δφ) around a loop of grid points; the loop is closed from the
/// last point back to the first.
///
/// When `density` is given, the loop must avoid cells below the vacuum threshold.
pub fn winding_number(
    phase: &[f64],
    grid: &Grid,
    path: &[(usize, usize)],
    density: Option<&[f64]>,
) -> Result<i64> {
    if path.len() < 3 {
        return Err(Error::domain("a winding loop needs at least three points"));
    }
    if phase.len() != grid.len() {
        return Err(Error::domain("phase map does not match the grid"));
    }
    if let Some(rho) = density {
        let threshold = VACUUM_THRESHOLD * rho.iter().cloned().fold(0.0, f64::max);
        if let Some(&(i, j)) = path.iter().find(|&&(i, j)| rho[grid.index(i, j)] < threshold) {
            return Err(Error::Measurement(format!(
                "winding loop crosses vacuum at ({i}, {j}); the winding number is ill-defined"
            )));
        }
    }
    let mut total = 0.0;
    for k in 0..path.len() {
        let (a, b) = (path[k], path[(k + 1) % path.len()]);
        if a.0 >= grid.nx || a.1 >= grid.ny {
            return Err(Error::domain(format!("loop point {a:?} lies outside the grid")));
        }
        total += wrap(phase[grid.index(b.0, b.1)] - phase[grid.index(a.0, a.1)]);
    }
    let w = total / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 1e-6 {
        return Err(Error::Measurement(format!("non-integer winding {w}")));
    }
    Ok(n as i64)
}

/// Counter-clockwise square loop of half-side `r` cells around (ci, cj).
pub fn square_loop(ci: usize, cj: usize, r: usize) -> Vec<(usize, usize)> {
    let (x0, x1, y0, y1) = (ci - r, ci + r, cj - r, cj + r);
    let mut out = Vec::with_capacity(8 * r);
    out.extend((x0..x1).map(|i| (i, y0)));
    out.extend((y0..y1).map(|j| (x1, j)));
    out.extend((x0 + 1..=x1).rev().map(|i| (i, y1)));
    out.extend((y0 + 1..=y1).rev().map(|j| (x0, j)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vortex {
    /// Plaquette centre (m).
    pub x: f64,
    pub y: f64,
    pub charge: i64,
}

/// Phase singularities found from the winding around every 2×2 plaquette with at least one
/// corner above the vacuum threshold, restricted to plaquettes whose centre lies within `radius`.
pub fn detect_vortices(field: &ComplexField, radius: f64) -> Vec<Vortex> {
    let g = field.grid;
    if g.is_1d() {
        return Vec::new();
    }
    let rho = field.density();
    let threshold = VACUUM_THRESHOLD * rho.iter().cloned().fold(0.0, f64::max);
    let phase: Vec<f64> = field.data.iter().map(|c| c.arg()).collect();
    let mut out = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let x = g.x(i) + 0.5 * g.dx;
            let y = g.y(j) + 0.5 * g.dy;
            if x.hypot(y) > radius {
                continue;
            }
            let corners = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)];
            if corners.iter().all(|&c| rho[c] < threshold) {
                continue;
            }
            let total: f64 = (0..4)
                .map(|k| wrap(phase[corners[(k + 1) % 4]] - phase[corners[k]]))
                .sum();
            let charge = (total / (2.0 * PI)).round() as i64;
            if charge != 0 {
                out.push(Vortex { x, y, charge });
            }
        }
    }
    out
}

/// Optical potential and coupling maps of the double-Λ scheme:
/// V = −κ|Ω_s|²/(2Δ(|Ω_c|²+|Ω_s|²)), G = V/(|Ω_c|²+|Ω_s|²).
pub fn double_lambda_potential(
    control: &[Complex64],
    signal: &[Complex64],
    kappa: f64,
    detuning: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if detuning == 0.0 {
        return Err(Error::domain("double-Λ potential needs a nonzero detuning"));
    }
    if control.len() != signal.len() {
        return Err(Error::domain("control and signal maps differ in size"));
    }
    let mut v = Vec::with_capacity(control.len());
    let mut g = Vec::with_capacity(control.len());
    for (idx, (c, s)) in control.iter().zip(signal).enumerate() {
        let total = c.norm_sqr() + s.norm_sqr();
        if total == 0.0 {
            return Err(Error::domain(format!(
                "|Ω_c|² + |Ω_s|² vanishes at pixel {idx}; potential undefined"
            )));
        }
        let value = -kappa * s.norm_sqr() / (2.0 * detuning * total);
        v.push(value);
        g.push(value / total);
    }
    Ok((v, g))
}

/// Drag force F = −∬ ρ ∇V d²r with centered differences on the periodic grid.
pub fn drag_force(density: &[f64], potential: &[f64], grid: &Grid) -> Result<[f64; 2]> {
    if density.len() != grid.len() || potential.len() != grid.len() {
        return Err(Error::domain("density and potential maps must match the grid"));
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let mut f = [0.0; 2];
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.index(i, j);
            let gx = (potential[grid.index((i + 1) % nx, j)] - potential[grid.index((i + nx - 1) % nx, j)])
                / (2.0 * grid.dx);
            let gy = if grid.is_1d() {
                0.0
            } else {
                (potential[grid.index(i, (j + 1) % ny)] - potential[grid.index(i, (j + ny - 1) % ny)])
                    / (2.0 * grid.dy)
            };
            f[0] -= density[idx] * gx;
            f[1] -= density[idx] * gy;
        }
    }
    Ok([f[0] * grid.cell(), f[1] * grid.cell()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::square(64, 1e-6).unwrap()
    }

    fn vortex_field(m: i32, x0: f64, y0: f64) -> ComplexField {
        ComplexField::from_fn(grid(), 1e7, 1.0, move |x, y| {
            let (dx, dy) = (x - x0, y - y0);
            let r2 = dx * dx + dy * dy;
            Complex64::from_polar(r2.sqrt().powi(m.abs()) * (-r2 / 4e-10).exp(), m as f64 * dy.atan2(dx))
        })
    }

    #[test]
    fn tilt_gives_uniform_velocity() {
        let g = grid();
        let kx = 2.0 * PI * 5.0 / g.extent_x();
        let f = ComplexField::from_fn(g, 1e7, 1.0, |x, _| Complex64::from_polar(1.0, kx * x));
        let m = madelung(&f, MassEquivalent::Optical { k0: 1e7 }, true);
        for (vx, vy) in m.velocity_x.iter().zip(&m.velocity_y) {
            assert!((vx - kx / 1e7).abs() < 1e-12 * kx / 1e7);
            assert_eq!(*vy, 0.0);
        }
    }

    #[test]
    fn real_gaussian_is_at_rest() {
        let f = ComplexField::from_fn(grid(), 1e7, 1.0, |x, y| Complex64::new((-(x * x + y * y) / 1e-10).exp(), 0.0));
        let m = madelung(&f, MassEquivalent::Matter { mass: 1e-35 }, false);
        for (v, vac) in m.velocity_x.iter().zip(&m.vacuum) {
            if *vac {
                assert!(v.is_nan());
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn vortex_circulation_and_winding() {
        let f = vortex_field(1, 0.0, 0.0);
        let m = madelung(&f, MassEquivalent::Optical { k0: 1e7 }, false);
        let path = square_loop(32, 32, 8);
        assert_eq!(winding_number(&m.phase, &f.grid, &path, Some(&m.density)).unwrap(), 1);
        // circulation with the discrete velocity approximates 2π/k₀
        let g = f.grid;
        let mut circ = 0.0;
        for k in 0..path.len() {
            let (a, b) = (path[k], path[(k + 1) % path.len()]);
            let ia = g.index(a.0, a.1);
            let ib = g.index(b.0, b.1);
            let vx = 0.5 * (m.velocity_x[ia] + m.velocity_x[ib]);
            let vy = 0.5 * (m.velocity_y[ia] + m.velocity_y[ib]);
            circ += vx * (b.0 as f64 - a.0 as f64) * g.dx + vy * (b.1 as f64 - a.1 as f64) * g.dy;
        }
        assert!((circ / (2.0 * PI / 1e7) - 1.0).abs() < 0.02, "{circ}");
    }

    #[test]
    fn opposite_vortices_cancel() {
        let a = vortex_field(1, -5e-6, 0.0);
        let b = vortex_field(-1, 5e-6, 0.0);
        let phase: Vec<f64> = a.data.iter().zip(&b.data).map(|(p, q)| (p * q).arg()).collect();
        let g = a.grid;
        assert_eq!(winding_number(&phase, &g, &square_loop(32, 32, 12), None).unwrap(), 0);
        assert_eq!(winding_number(&phase, &g, &square_loop(27, 32, 3), None).unwrap(), 1);
    }

    #[test]
    fn loop_through_vacuum_is_rejected() {
        let f = vortex_field(1, 0.0, 0.0);
        let m = madelung(&f, MassEquivalent::Optical { k0: 1e7 }, false);
        let through_core = [(31, 31), (32, 32), (33, 31)];
        assert!(winding_number(&m.phase, &f.grid, &through_core, Some(&m.density)).is_err());
    }

    #[test]
    fn unwrapping_is_consistent_without_vortices() {
        let g = grid();
        let f = ComplexField::from_fn(g, 1e7, 1.0, |x, y| Complex64::from_polar(1.0, 4e9 * (x * x + y * y)));
        let m = madelung(&f, MassEquivalent::Optical { k0: 1e7 }, true);
        assert!(m.unwrap_inconsistency < 1e-9);
        let c = g.index(32, 32);
        let e = g.index(63, 32);
        let got = m.phase[e] - m.phase[c];
        assert!((got - 4e9 * g.x(63).powi(2)).abs() < 1e-9, "{got}");
    }

    #[test]
    fn static_snapshots_have_zero_residual() {
        let f = ComplexField::from_fn(grid(), 1e7, 1.0, |x, y| Complex64::new((-(x * x + y * y) / 1e-10).exp(), 0.0));
        let m = madelung(&f, MassEquivalent::Optical { k0: 1e7 }, false);
        assert_eq!(continuity_residual(&[m.clone(), m], 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn double_lambda_identities() {
        let c = vec![Complex64::new(2.0, 0.0); 4];
        let s = vec![Complex64::new(0.0, 2.0); 4];
        let (v, g) = double_lambda_potential(&c, &s, 3.0, 1.5).unwrap();
        for (a, b) in v.iter().zip(&g) {
            assert!((a + 3.0 / (4.0 * 1.5)).abs() < 1e-15);
            assert!((b - a / 8.0).abs() < 1e-15);
        }
        let zero = vec![Complex64::new(0.0, 0.0); 4];
        let (v, _) = double_lambda_potential(&c, &zero, 3.0, 1.5).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
        match double_lambda_potential(&zero, &zero, 3.0, 1.5) {
            Err(Error::Domain(msg)) => assert!(msg.contains("pixel 0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn drag_vanishes_for_symmetric_configurations() {
        let g = grid();
        let bump: Vec<f64> = (0..g.len())
            .map(|idx| {
                let (x, y) = (g.x(idx % g.nx), g.y(idx / g.nx));
                (-(x * x + y * y) / 1e-11).exp()
            })
            .collect();
        let uniform = vec![2.0; g.len()];
        let f = drag_force(&uniform, &bump, &g).unwrap();
        assert!(f[0].abs() < 1e-18 && f[1].abs() < 1e-18, "{f:?}");
        let f = drag_force(&bump, &bump, &g).unwrap();
        assert!(f[0].abs() < 1e-18 && f[1].abs() < 1e-18, "{f:?}");
    }
}
