//! Spectral split-step propagation of the paraxial NLSE and the driven-dissipative GPE, with
//! hydrodynamic (Madelung) diagnostics.

mod ddgpe;
mod diagnostics;
mod fft;
mod nlse;

pub use ddgpe::{ddgpe_residual, split_step_ddgpe, DdgpePropagator, DriveSpec};
pub use diagnostics::{
    continuity_residual, detect_vortices, double_lambda_potential, drag_force, madelung, square_loop, unwrap_1d,
    winding_number,
    MadelungFields, MassEquivalent, Vortex,
};
pub use fft::Fft2;
pub use nlse::{fresnel_propagate, split_step_nlse, AbsorbingBoundary, MediumSpec, NlsePropagator, MAX_PHASE_PER_STEP};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Shape and spacing of a periodic 1D (`ny == 1`) or 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n == 0 || !n.is_power_of_two() {
                return Err(Error::config(name, format!("grid size must be a power of two, got {n}")));
            }
        }
        if !(dx > 0.0) || !(dy > 0.0) {
            return Err(Error::config("dx", "grid spacings must be positive"));
        }
        Ok(Grid { nx, ny, dx, dy })
    }

    pub fn line(nx: usize, dx: f64) -> Result<Self> {
        Self::new(nx, 1, dx, 1.0)
    }

    pub fn square(n: usize, d: f64) -> Result<Self> {
        Self::new(n, n, d, d)
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Area element (or line element in 1D).
    pub fn cell(&self) -> f64 {
        if self.is_1d() {
            self.dx
        } else {
            self.dx * self.dy
        }
    }

    /// Centered coordinate of column `i`; the origin sits at index n/2.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        if self.is_1d() {
            0.0
        } else {
            (j as f64 - (self.ny / 2) as f64) * self.dy
        }
    }

    pub fn extent_x(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn extent_y(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    /// Angular wavenumbers in FFT order.
    pub fn kx(&self) -> Vec<f64> {
        fft_wavenumbers(self.nx, self.dx)
    }

    pub fn ky(&self) -> Vec<f64> {
        if self.is_1d() {
            vec![0.0]
        } else {
            fft_wavenumbers(self.ny, self.dy)
        }
    }

    /// |k|² for every FFT-ordered cell, row-major.
    pub fn k_squared(&self) -> Vec<f64> {
        let kx = self.kx();
        let ky = self.ky();
        let mut out = Vec::with_capacity(self.len());
        for &qy in &ky {
            for &qx in &kx {
                out.push(qx * qx + qy * qy);
            }
        }
        out
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

pub fn fft_wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * d);
    (0..n)
        .map(|i| {
            let m = if i < n.div_ceil(2) { i as f64 } else { i as f64 - n as f64 };
            m * dk
        })
        .collect()
}

/// Complex envelope sampled on a periodic grid, row-major with x fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    pub grid: Grid,
    /// Carrier wavenumber k₀ (1/m); used as the mass equivalent for light.
    pub k0: f64,
    /// Background refractive index n₀.
    pub n0: f64,
    /// Propagation distance (NLSE) or elapsed time (GPE).
    pub z_or_t: f64,
    pub data: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid, k0: f64, n0: f64) -> Self {
        ComplexField {
            grid,
            k0,
            n0,
            z_or_t: 0.0,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x, y)` on the centered grid coordinates.
    pub fn from_fn(grid: Grid, k0: f64, n0: f64, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                data.push(f(grid.x(i), y));
            }
        }
        ComplexField {
            grid,
            k0,
            n0,
            z_or_t: 0.0,
            data,
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ∫|E|² over the grid.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell()
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.len() != self.grid.len() {
            return Err(Error::domain("field data does not match the grid shape"));
        }
        if self.data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::domain("field contains non-finite samples"));
        }
        Ok(())
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.grid.index(i, j)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_non_power_of_two() {
        assert!(Grid::new(100, 1, 1.0, 1.0).is_err());
        assert!(Grid::new(128, 64, 1.0, 0.0).is_err());
        let g = Grid::square(8, 0.5).unwrap();
        assert_eq!(g.x(4), 0.0);
        assert_eq!(g.x(0), -2.0);
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let k = fft_wavenumbers(4, 1.0);
        let dk = 2.0 * PI / 4.0;
        assert_eq!(k, vec![0.0, dk, -2.0 * dk, -dk]);
    }
}
