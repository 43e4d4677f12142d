//! Squeezing and conditional non-Gaussian states of a cavity that couples a
//! vibrating mirror to an atomic ensemble, in the linearized regime.
//!
//! The pipeline runs [`model`] (parameters to drift and diffusion matrices),
//! [`gaussian`] (steady-state covariance), [`conditional`] (atomic excitation
//! counting and Wigner functions) and [`spectra`] (output squeezing spectra).
//! [`config`] and [`run`] drive it from JSON files.

pub mod conditional;
pub mod config;
pub mod constants;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod quadrature;
pub mod run;
pub mod spectra;

pub use error::{Error, Result};
