//! Learns Hamilton-Jacobi safety value functions for nonlinear control
//! systems from sampling-based MPC data plus PDE residuals, verifies the
//! result with conformal calibration, and synthesizes safety filters.
//!
//! All numeric kernels are generic over the scalar type ([`scalar::Real`]);
//! the pipeline and file formats instantiate the `f64` aliases below.

pub mod dual;
pub mod dynamics;
pub mod gridsolver;
pub mod manifest;
pub mod mpcgen;
pub mod value;
pub mod error;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};

/// Concrete f64 aliases used by the CLI and the on-disk formats.
pub type SystemRef64 = std::sync::Arc<dyn dynamics::System<f64>>;
