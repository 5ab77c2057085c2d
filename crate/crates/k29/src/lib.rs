#![forbid(unsafe_code)]

//! # k29
//!
//! Defensive forecasting in linear protocols.
//!
//! A linear protocol is a repeated game between Reality, Forecaster and
//! Skeptic in which Skeptic's per-round gain is the inner product
//! `⟨s_n, y_n − f_n⟩` between his move and the forecast residual. The K29
//! strategy chooses each forecast as a zero of the kernel-weighted residual
//! field (or a boundary point where the field is an exterior normal), which
//! provably prevents the kernel Skeptic's capital from ever growing. That
//! single property yields √n bounds on aggregated residuals and, with a
//! suitable kernel, forecasts that are well calibrated and well resolved —
//! with no assumption on how the data is generated.
//!
//! The crate provides:
//!
//! - [`geometry`]: vectors, convex forecast domains, nearest-point
//!   projection, support functions and exterior-normal certificates;
//! - [`kernels`]: admissible kernel families (the K29 parameter) and their
//!   feature-norm bounds;
//! - [`tensor_gram`]: incremental Gram-trick tracking of the tensor norm
//!   `‖Σ (y_i−f_i) ⊗ Φ(f_i,x_i)‖` and the associated capital process;
//! - [`protocols`]: binary, bounded-regression, multi-class and
//!   mean-variance protocols with their encodings;
//! - [`forecaster`]: the K29 forecaster and its constructive solver;
//! - [`skeptic`]: Skeptic strategies and capital ledgers, including the
//!   separation exploit against out-of-hull forecasts;
//! - [`engine`]: the game loop, Reality sources, transcripts and replay
//!   verification;
//! - [`diagnostics`]: the √n tensor bound, RKHS test-function bounds and
//!   calibration/resolution reports;
//! - [`config`] and [`cli`]: TOML run configuration and the command-line
//!   entry points.
//!
//! Start with the runnable programs under `examples/` — there is one per
//! major capability.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod engine;
pub mod forecaster;
pub mod geometry;
pub mod kernels;
pub mod protocols;
pub mod skeptic;
pub mod tensor_gram;

use thiserror::Error;

pub use forecaster::{CertificateKind, ForecastCertificate, K29Forecaster, SolverConfig};
pub use geometry::{ConvexDomain, ObservationSet, Vector};
pub use kernels::{Kernel, Point};
pub use protocols::{ProtocolSpec, ProtocolVariant, RawObservation};
pub use tensor_gram::TensorAccumulator;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid construction: {0}")]
    Invalid(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("C_Phi unavailable: {0}")]
    CphiUnavailable(String),

    #[error("no separation exists: the forecast lies inside the domain")]
    NoSeparation,

    #[error("solver failed: best point {best:?} has slack {slack:.3e} above tolerance")]
    SolverFailure { best: Vector, slack: f64 },

    #[error("solver failed at round {round}: {source}")]
    SolverFailureAt {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("transcript schema version {found} is not supported (expected {expected}); regenerate the transcript")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
