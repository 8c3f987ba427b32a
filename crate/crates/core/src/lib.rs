//! Simulation and analysis toolkit for a single quantum dot strongly coupled
//! to a photonic-crystal cavity that is side-coupled to a waveguide.
//!
//! The numerical core is generic over the scalar type (see [`scalar::Real`]);
//! the aliases at the crate root fix it to `f64`, which is what the CLI and
//! the pinned test tolerances use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitting;
pub mod lindblad;
pub mod linalg;
pub mod operators;
pub mod params;
pub mod scalar;
pub mod spectra;
pub mod switching;

pub use error::{Error, Result};

pub type DeviceParams = params::DeviceParams<f64>;
pub type DriveSpec = params::DriveSpec<f64>;
pub type TuningModel = params::TuningModel<f64>;
pub type DensityMatrix = lindblad::DensityMatrix<f64>;
pub type Liouvillian = lindblad::Liouvillian<f64>;
pub type Operator = operators::Operator<f64>;
