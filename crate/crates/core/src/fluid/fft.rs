use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::Grid;

/// Planned 1D/2D complex FFT over a row-major grid.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    columns: Vec<Complex64>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

impl Fft2 {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(grid.nx);
        let inv_x = planner.plan_fft_inverse(grid.nx);
        let fwd_y = planner.plan_fft_forward(grid.ny);
        let inv_y = planner.plan_fft_inverse(grid.ny);
        let scratch_len = [&fwd_x, &inv_x, &fwd_y, &inv_y]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2 {
            nx: grid.nx,
            ny: grid.ny,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            columns: if grid.ny > 1 {
                vec![Complex64::new(0.0, 0.0); grid.nx * grid.ny]
            } else {
                Vec::new()
            },
        }
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.nx * self.ny, "FFT buffer does not match the grid");
        let (px, py) = if inverse {
            (self.inv_x.clone(), self.inv_y.clone())
        } else {
            (self.fwd_x.clone(), self.fwd_y.clone())
        };
        px.process_with_scratch(data, &mut self.scratch);
        if self.ny > 1 {
            let (nx, ny) = (self.nx, self.ny);
            for j in 0..ny {
                for i in 0..nx {
                    self.columns[i * ny + j] = data[j * nx + i];
                }
            }
            py.process_with_scratch(&mut self.columns, &mut self.scratch);
            for i in 0..nx {
                for j in 0..ny {
                    data[j * nx + i] = self.columns[i * ny + j];
                }
            }
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// Inverse transform without the 1/N factor.
    pub fn inverse_unnormalized(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
        let norm = 1.0 / (self.nx * self.ny) as f64;
        for c in data.iter_mut() {
            *c *= norm;
        }
    }
}
