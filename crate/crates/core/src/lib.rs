//! Atomic-vapor nonlinear optics and fluid-of-light simulation.
//!
//! The crate covers the optical response of warm vapors (two- and three-level), the analytic
//! dispersion relations of photon fluids and polaritons, a spectral NLSE/GPE engine with
//! hydrodynamic diagnostics, a gradient-echo memory solver, and scripted experiments built
//! on top of them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic;
pub mod constants;
pub mod dispersion;
pub mod eit;
pub mod experiments;
pub mod error;
pub mod fluid;
pub mod gem;
pub mod io;
pub mod quadrature;

pub use error::{Error, Result};
