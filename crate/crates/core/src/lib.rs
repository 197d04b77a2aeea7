//! Resonance-driven search on a classical wave.
//!
//! A set of `N` oscillation modes hides one searched mode `s` of known
//! frequency. Starting from a mode `j` outside the set and driving a
//! perturbation at `w_j - w_s`, energy flows from `j` to `s` and peaks at
//! `tau = pi sqrt N / w_0`.
//!
//! - [`spectrum`]: mode sets and the search problem
//! - [`dynamics`]: full coupled amplitude equations, RK4 integration
//! - [`rwa`]: two-level rotating-wave model
//! - [`field`]: spatial reconstruction and projection
//! - [`analysis`]: peak, scaling, deviation and ripple observables
//! - [`config`] and [`output`]: experiment files and CSV artifacts

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod output;
pub mod phase;
pub mod rwa;
pub mod spectrum;

pub use error::{Error, ErrorClass, Result};
