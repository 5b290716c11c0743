//! Sub-band dual frequency conjugate LVT (SDFC-LVT) processing for
//! pulse-Doppler radar.
//!
//! A fast radial target aliases its Doppler when |v| exceeds c/(4·f_c·T),
//! which breaks Keystone range-walk correction and pushes the azimuth
//! parameters outside the principal intervals of Lv's transform. This crate
//! implements the sub-band remedy: split the range spectrum into two
//! half-bands, recenter both, and multiply one with the conjugate of the
//! other. The product signal behaves like an echo on the tiny equivalent
//! carrier Δf_r = B/2, so a single Keystone pass straightens the walk of
//! every target at once and Lv's transform reads (velocity, acceleration)
//! off a 2-D plane without any parameter search.
//!
//! The processing chain, front to back:
//!
//! 1. [`model`] — radar constants, target motion, raw and range-compressed
//!    echo synthesis with seeded noise.
//! 2. [`rangeproc`] — matched filtering, sub-band split/shift, conjugate
//!    product, ambiguity and walk constraints.
//! 3. [`keystone`] — chirp-z Keystone transform and the residual-walk
//!    metric.
//! 4. [`lvt`] — Lv's transform, peak extraction, the (frequency, chirp
//!    rate) → (velocity, acceleration) mapping, and the end-to-end
//!    estimator.
//! 5. [`analysis`] — closed-form SNR/variance companions, Monte Carlo
//!    harnesses, cross-term loci, and a brute-force grid-search oracle.
//!
//! The long-form guide with runnable snippets lives in `book/` at the
//! repository root; the same snippets are attached here as doc-tests (see
//! [`guide`]).

pub mod analysis;
pub mod keystone;
pub mod lvt;
pub mod matrix;
pub mod model;
pub mod noise;
pub mod rangeproc;
pub mod spectral;

pub mod guide;

#[cfg(test)]
pub(crate) mod testing;

use thiserror::Error;

/// Alias used for all complex samples in the crate.
pub type C64 = num_complex::Complex64;

/// Errors surfaced by the processing chain.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation received a matrix in the wrong domain.
    #[error("domain mismatch: expected {expected} data, got {got}")]
    DomainMismatch {
        expected: &'static str,
        got: &'static str,
    },
    /// The fast-time gate clips a target envelope.
    #[error(
        "range gate [{gate_start:.6e}, {gate_end:.6e}] s clips the envelope of target {target} \
         (needs [{need_start:.6e}, {need_end:.6e}] s)"
    )]
    GateTooSmall {
        target: usize,
        gate_start: f64,
        gate_end: f64,
        need_start: f64,
        need_end: f64,
    },
    /// The spectrum does not cover the band required by the sub-band split.
    #[error("insufficient spectrum support: need ±{need:.3e} Hz, have ±{have:.3e} Hz")]
    InsufficientSupport { need: f64, have: f64 },
    /// Target geometry made the instantaneous range non-positive.
    #[error("invalid geometry: range {range:.3} m at t = {t:.6} s")]
    InvalidGeometry { range: f64, t: f64 },
    /// A parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A metric is undefined for the given input (e.g. all-zero matrix).
    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),
    /// A value fell outside the estimator's principal interval.
    #[error("{what} = {value:.6e} outside principal interval ±{bound:.6e}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        bound: f64,
    },
    /// A grid-search argmax landed on the grid boundary.
    #[error("grid coverage: argmax on the {axis} grid boundary, widen the grid")]
    GridCoverage { axis: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

pub use matrix::{DataMatrix, DomainTag};
pub use model::{Gate, MotionModel, RadarParams, Scene, TargetMotion};
pub use rangeproc::SubbandPair;
