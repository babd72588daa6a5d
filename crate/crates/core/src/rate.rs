//! Achievable-rate lower bound and bit-energy metric.
//!
//! Data symbol `m` sees `y = h_hat x + (h_tilde x + n)`. Treating the bracket
//! as Gaussian noise of variance `P_m sigma_tilde_m^2 + sigma_n^2` gives a
//! per-symbol SINR `P_m sigma_hat_m^2 / (P_m sigma_tilde_m^2 + sigma_n^2)`
//! on a Rayleigh channel, and the bound
//! `(1/M) sum_m E[ln(1 + SINR_m |xi|^2)]`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::ChannelParams;
use crate::wiener::EstimateQuality;

pub use crate::special::exp_log_expectation;

/// Training period and power allocation over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Period `M`: one pilot followed by `M - 1` data symbols.
    pub period: usize,
    pub pilot_power: f64,
    /// Powers of data positions `1..M-1`.
    pub data_powers: Vec<f64>,
    /// Average power budget `P` per symbol.
    pub average_power: f64,
}

impl TrainingConfig {
    /// Spreads what the pilot leaves of the budget evenly over the data
    /// symbols, `P_0 = (M P - P_t) / (M - 1)`.
    pub fn uniform(period: usize, average_power: f64, pilot_power: f64) -> Result<Self> {
        if period < 2 {
            return Err(Error::invalid("period", "must be at least 2"));
        }
        let budget = period as f64 * average_power;
        if !(pilot_power >= 0.0 && pilot_power <= budget) {
            return Err(Error::invalid(
                "pilot_power",
                format!("{pilot_power} is outside [0, {budget}]"),
            ));
        }
        let p0 = (budget - pilot_power) / (period - 1) as f64;
        let cfg = Self {
            period,
            pilot_power,
            data_powers: vec![p0; period - 1],
            average_power,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks shape, signs, and the average power constraint.
    pub fn validate(&self) -> Result<()> {
        if self.period < 2 {
            return Err(Error::invalid("period", "must be at least 2"));
        }
        if self.data_powers.len() != self.period - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.period - 1,
                actual: self.data_powers.len(),
            });
        }
        if !(self.average_power > 0.0 && self.average_power.is_finite()) {
            return Err(Error::invalid("average_power", "must be positive"));
        }
        if self.pilot_power < 0.0 || self.data_powers.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::invalid("power", "powers must be nonnegative"));
        }
        let mean = self.total_power() / self.period as f64;
        if mean > self.average_power * (1.0 + 1e-9) + 1e-9 {
            return Err(Error::invalid(
                "power",
                format!(
                    "average power {mean} exceeds the budget {}",
                    self.average_power
                ),
            ));
        }
        Ok(())
    }

    pub fn total_power(&self) -> f64 {
        self.pilot_power + self.data_powers.iter().sum::<f64>()
    }
}

/// Achievable-rate lower bound and what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub rate_nats: f64,
    pub rate_bits: f64,
    pub config: TrainingConfig,
    pub quality: EstimateQuality,
}

/// `P sigma_hat^2 / (P sigma_tilde^2 + sigma_n^2)`.
pub fn effective_snr(power: f64, est_var: f64, err_var: f64, sigma_n_sq: f64) -> f64 {
    if power == 0.0 {
        return 0.0;
    }
    (power * est_var / (power * err_var + sigma_n_sq)).max(0.0)
}

/// Bound in nats per channel use without building a [`RateResult`].
pub(crate) fn rate_nats_raw(
    sigma_n_sq: f64,
    period: usize,
    data_powers: &[f64],
    quality: &EstimateQuality,
) -> f64 {
    let sum: f64 = data_powers
        .iter()
        .zip(quality.est_var.iter().zip(&quality.err_var))
        .map(|(&p, (&hat, &tilde))| exp_log_expectation(effective_snr(p, hat, tilde, sigma_n_sq)))
        .sum();
    sum / period as f64
}

pub fn rate_lower_bound(
    ch: &ChannelParams,
    cfg: &TrainingConfig,
    quality: &EstimateQuality,
) -> Result<RateResult> {
    cfg.validate()?;
    if quality.len() != cfg.period - 1 || quality.est_var.len() != quality.err_var.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.period - 1,
            actual: quality.len(),
        });
    }
    let rate_nats = rate_nats_raw(ch.sigma_n_sq, cfg.period, &cfg.data_powers, quality);
    Ok(RateResult {
        rate_nats,
        rate_bits: rate_nats / LN_2,
        config: cfg.clone(),
        quality: quality.clone(),
    })
}

/// Energy per bit relative to the noise density, `snr / rate_bits`, linear.
pub fn bit_energy(snr: f64, rate_bits: f64) -> Result<f64> {
    if !(rate_bits > 0.0) {
        return Err(Error::Numerical(format!(
            "bit energy is undefined at rate {rate_bits} bits/symbol"
        )));
    }
    if !(snr > 0.0) {
        return Err(Error::invalid("snr", "must be positive"));
    }
    Ok(snr / rate_bits)
}
