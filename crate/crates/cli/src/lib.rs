//! Batch front-end for lightfluid: configuration files, runs with manifests, and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod output;
pub mod runner;
pub mod sweep;

pub use error::{CliError, ErrorReport, Result};
pub use experiments::{Prepared, CATALOG};
pub use runner::{run, Manifest, RunFile, RunOptions, RunReport};
pub use sweep::{sweep, SweepReport, SweepSpec};
