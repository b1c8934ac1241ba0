//! Link-level simulator and receiver library for ambient backscatter tags.
//!
//! A stationary transmitter illuminates a passive tag that modulates its
//! reflection coefficient with BPSK or OOK chips while a multi-antenna
//! receiver listens to the superposition of the direct path and the
//! backscatter path.  The crate covers the whole chain at wavelength scale:
//! free-space geometry and channel decomposition, Hadamard/Simplex chip
//! coding, frame synthesis, the projection-based receiver with
//! machine-learning and coherent detectors, closed-form error probabilities
//! for the coherent and energy detectors, and reproducible Monte Carlo
//! experiment drivers with CSV output.
//!
//! All distances are expressed in carrier wavelengths, so the wavelength
//! never appears explicitly.
//!
//! # Example
//!
//! ```
//! use ambc_core::geometry::{build_linear_scenario, channel_state, raw_gains, TagPlacement};
//!
//! let scenario = build_linear_scenario(27.0, 8, TagPlacement::polar(2.0)).unwrap();
//! let chan = channel_state(&raw_gains(&scenario), &scenario);
//! assert!(chan.delta < 1e-2); // backscatter path is tens of dB below the direct path
//! ```

pub mod analytic;
pub mod codec;
pub mod experiment;
pub mod geometry;
pub mod linalg;
pub mod receiver;
pub mod seed;
pub mod sim;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

/// Errors produced by scenario construction, coding, the receiver chain and
/// the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Scenario construction rejected its inputs (antenna count, coincident
    /// nodes, non-positive distances).
    #[error("invalid geometry: {0}")]
    Geometry(String),
    /// Code construction or framing rejected its inputs.
    #[error("invalid code: {0}")]
    Code(String),
    /// A receiver stage rejected its inputs (empty blocks, mismatched
    /// dimensions, unsupported modulation for the selected detector).
    #[error("receiver: {0}")]
    Receiver(String),
    /// Power iteration did not reach the requested tolerance within the
    /// iteration cap; carries the last relative residual.
    #[error("power iteration did not converge (relative residual {residual:.3e})")]
    PowerIteration { residual: f64 },
    /// A closed-form expression was evaluated outside its domain.
    #[error("analytic: {0}")]
    Analytic(String),
    /// Experiment configuration failed validation.
    #[error("config: {0}")]
    Config(String),
    /// File I/O while reading configs or writing results.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
