//! Quantum frequency conversion of one half of an EPR-entangled beam pair.
//!
//! A nondegenerate parametric amplifier produces two beams `a1`, `a2` with
//! correlated amplitude and anticorrelated phase quadratures. Beam `a1` is
//! injected into a sum-frequency cavity, and this crate computes how much of
//! the original correlation survives between the converted output `b3_out`
//! and the retained beam `a2`.
//!
//! The crate is organised in layers:
//!
//! * [`quadrature`] - two-mode squeezing transform, EPR combination variances,
//!   quadrature rotation.
//! * [`transfer`] - closed-form frequency response of the conversion cavity.
//! * [`metrics`] - correlation variance, optimal gain/phase, inseparability.
//! * [`oracle`] - brute-force linear solve and covariance assembly that checks
//!   every closed form without reusing it.
//! * [`langevin`] - time-domain Euler-Maruyama integration and Welch spectra.
//! * [`sweep`] and [`verify`] - parameter sweeps and the
//!   randomized consistency batteries driven by the `qfc` command line tool.

pub mod csv;
pub mod error;
pub mod langevin;
pub mod metrics;
pub mod oracle;
pub mod quadrature;
pub mod sweep;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
pub use metrics::{
    correlation_variance, is_inseparable, optimal_gain, s_min, to_decibel, CorrelationResult,
    OperatingPoint,
};
pub use quadrature::{
    epr_combination_variance, epr_optimal_gain, nopa_transform, rotate_quadratures,
    QuadratureVector, RotationAngle, SqueezeFactor,
};
pub use transfer::{
    channel_transfer, conversion_efficiency, rotation_angle_phi, transfer_coeffs,
    AnalysisFrequency, ChannelTransfer, SfgParams, TransferCoeffs,
};
