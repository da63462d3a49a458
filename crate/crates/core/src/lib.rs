//! Lifshitz-theory evaluation of the thermal Casimir interaction between
//! parallel metal plates under competing models of the metal response.
//!
//! The crate is organized bottom-up:
//!
//! - [`material`]: permittivity and impedance models on the imaginary axis.
//! - [`reflection`]: reflection coefficients and their zero-frequency limits.
//! - [`optical`]: tabulated optical data and the Kramers-Kronig transform.
//! - [`engine`]: Matsubara sums for free energy, pressure and entropy.
//! - [`nernst`]: closed-form limits and low-temperature entropy verdicts.
//! - [`modes`]: dispersion functions of the impedance boundary problem.
//! - [`harness`]: run configuration, sweeps, comparison reports and CSV output.

pub mod constants;
pub mod engine;
pub mod error;
pub mod harness;
pub mod material;
pub mod modes;
pub mod nernst;
pub mod optical;
pub mod quadrature;
pub mod reflection;

pub use constants::PhysicalConstants;
pub use engine::{EngineSettings, LifshitzEngine, MatsubaraGrid, PlatePair, ThermalResult};
pub use error::{CasimirError, Result};
pub use material::{DrudeParameters, Permittivity, ResponseModel, ZeroFrequency};
pub use optical::OpticalTable;
pub use reflection::{ReflectionPair, ReflectionScheme, WavenumberPoint};

/// Version string written into CSV metadata.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
