//! Pilot-symbol-assisted transmission over Gauss-Markov fading channels.
//!
//! The receiver estimates the channel from pilots sent every `M` symbols
//! using a noncausal or causal Wiener filter. This crate computes the
//! resulting estimation-error variances from the Doppler spectrum, the
//! achievable-rate lower bound obtained by treating the estimation error as
//! Gaussian noise, and the training period and pilot/data power split that
//! maximize it.
//!
//! Module map:
//!
//! - [`spectrum`]: Doppler spectra and their pilot-rate undersampled versions.
//! - [`wiener`]: noncausal and causal Wiener error variances.
//! - [`rate`]: the achievable-rate bound and bit-energy metric.
//! - [`optimize`]: joint optimization of period, pilot power, and data powers.
//! - [`oracle`]: finite-window LMMSE, steady-state Kalman, and Monte Carlo
//!   checks of the analytic variances.
//! - [`cli`]: configuration, scenario dispatch, and CSV/JSON emission used by
//!   the `psam` binary.
//!
//! All quantities are linear (not dB) except at the [`cli`] boundary. SNR is
//! `P / sigma_n^2` with the fading variance normalized to one.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod rate;
pub mod special;
pub mod spectrum;
pub mod toeplitz;
pub mod validate;
pub mod wiener;

pub use error::{Error, Result};
pub use optimize::{
    minimum_bit_energy, optimize_period, optimize_pilot_and_profile, optimize_pilot_power,
    optimize_power_profile, sweep_snr, OptimizationResult,
};
pub use rate::{bit_energy, exp_log_expectation, rate_lower_bound, RateResult, TrainingConfig};
pub use spectrum::{ChannelParams, DopplerSpectrum};
pub use wiener::{AliasMode, EstimateQuality, FilterKind};

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10 log10(x)`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
