//! Channel-estimation error variances of noncausal and causal Wiener filters
//! driven by periodic pilots.
//!
//! A pilot of power `P_t` is sent every `M` symbols. The receiver sees the
//! channel only at pilot instants, so the relevant spectra are the
//! undersampled ones of [`crate::spectrum`]. Data position `m` (for
//! `m = 1..M-1`) is the `m`-th symbol after a pilot.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::spectrum::{gm_psd, one_minus_a_e, powi_u64, ChannelParams, DopplerSpectrum};

/// Which Wiener filter the receiver runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    /// Uses past and future pilots.
    Noncausal,
    /// Uses past and present pilots only.
    Causal,
}

/// Whether spectral replicas of the undersampled Doppler spectrum are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AliasMode {
    Considered,
    Ignored,
}

/// Canonical factorization of the Gauss-Markov pilot spectrum,
/// `P_t S_h(w)/M + sigma_n^2 = r_f |F(w)|^2` with
/// `F(w) = (1 - u e^{-jw}) / (1 - alpha e^{-jw})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFactors {
    pub r_f: f64,
    pub u: f64,
    pub c: f64,
}

impl CanonicalFactors {
    /// The minimum-phase factor `F(e^{jw})`.
    pub fn minimum_phase(&self, alpha: f64, w: f64) -> Complex64 {
        one_minus_a_e(self.u, -w) / one_minus_a_e(alpha, -w)
    }
}

/// Per-position estimation quality for one filter and aliasing mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateQuality {
    /// Error variance at data positions `m = 1..M-1`.
    pub err_var: Vec<f64>,
    /// Estimate variance `sigma_h^2 - err_var[m]`.
    pub est_var: Vec<f64>,
    pub filter: FilterKind,
    pub alias: AliasMode,
}

impl EstimateQuality {
    pub fn from_errors(
        sigma_h_sq: f64,
        err_var: Vec<f64>,
        filter: FilterKind,
        alias: AliasMode,
    ) -> Self {
        let est_var = err_var.iter().map(|e| sigma_h_sq - e).collect();
        Self {
            err_var,
            est_var,
            filter,
            alias,
        }
    }

    /// Number of data positions.
    pub fn len(&self) -> usize {
        self.err_var.len()
    }

    pub fn is_empty(&self) -> bool {
        self.err_var.is_empty()
    }
}

fn check_period(period: usize, min: usize) -> Result<()> {
    if period < min {
        return Err(Error::invalid(
            "period",
            format!("{period} is below the minimum of {min}"),
        ));
    }
    Ok(())
}

fn check_power(pilot_power: f64) -> Result<()> {
    if !(pilot_power >= 0.0 && pilot_power.is_finite()) {
        return Err(Error::invalid(
            "pilot_power",
            format!("{pilot_power} must be finite and nonnegative"),
        ));
    }
    Ok(())
}

/// Clamps a quadrature result into `[0, sigma_h^2]`.
fn clamp_mmse(value: f64, sigma_h_sq: f64, what: &str) -> f64 {
    let clamped = value.clamp(0.0, sigma_h_sq);
    if (clamped - value).abs() > 1e-8 {
        log::warn!("{what}: clamped {value:e} into [0, {sigma_h_sq}]");
    }
    clamped
}

/// Noncausal error variances at every data position, accounting for
/// aliasing, for an arbitrary spectrum.
///
/// Entry `m - 1` is
/// `sigma_h^2 - (1/2pi) int P_t |S_{h,m}|^2 / (P_t S_{h,0} + sigma_n^2) dw`.
pub fn noncausal_mmse_aliased_with<S: DopplerSpectrum + ?Sized>(
    psd: &S,
    sigma_n_sq: f64,
    period: usize,
    pilot_power: f64,
) -> Result<Vec<f64>> {
    check_period(period, 2)?;
    check_power(pilot_power)?;
    let var = psd.variance();
    if pilot_power == 0.0 {
        return Ok(vec![var; period - 1]);
    }
    let width = (psd.feature_width() * period as f64).min(PI);
    let q = Quadrature::default().peaked_at(0.0, width);
    let mut spectra = vec![Complex64::new(0.0, 0.0); period];
    let integrals = q.integrate_vec(-PI, PI, period - 1, |w, out| {
        psd.undersampled_all(period, w, &mut spectra);
        let den = pilot_power * spectra[0].re + sigma_n_sq;
        for (o, s) in out.iter_mut().zip(&spectra[1..]) {
            *o = pilot_power * s.norm_sqr() / den;
        }
    })?;
    Ok(integrals
        .into_iter()
        .map(|v| clamp_mmse(var - v / (2.0 * PI), var, "noncausal aliased mmse"))
        .collect())
}

/// Noncausal error variances for all data positions of a Gauss-Markov
/// channel with aliasing accounted for.
pub fn noncausal_mmse_aliased_all(
    ch: &ChannelParams,
    period: usize,
    pilot_power: f64,
) -> Result<Vec<f64>> {
    ch.validate()?;
    noncausal_mmse_aliased_with(ch, ch.sigma_n_sq, period, pilot_power)
}

/// Noncausal error variance at data position `offset` with aliasing.
pub fn noncausal_mmse_aliased(
    ch: &ChannelParams,
    period: usize,
    offset: usize,
    pilot_power: f64,
) -> Result<f64> {
    check_period(period, 2)?;
    if offset == 0 || offset >= period {
        return Err(Error::invalid(
            "offset",
            format!("{offset} is outside [1, {}]", period - 1),
        ));
    }
    Ok(noncausal_mmse_aliased_all(ch, period, pilot_power)?[offset - 1])
}

/// Noncausal error variance when spectral replicas are ignored; the same at
/// every data position.
pub fn noncausal_mmse_no_alias(ch: &ChannelParams, period: usize, pilot_power: f64) -> Result<f64> {
    ch.validate()?;
    check_period(period, 1)?;
    check_power(pilot_power)?;
    let var = ch.sigma_h_sq;
    if pilot_power == 0.0 {
        return Ok(var);
    }
    let edge = PI / period as f64;
    let scaled_noise = period as f64 * ch.sigma_n_sq;
    let q = Quadrature::default().peaked_at(0.0, ch.feature_width());
    let half = q.integrate(0.0, edge, |w| {
        let s = gm_psd(ch, w);
        pilot_power * s * s / (pilot_power * s + scaled_noise)
    })?;
    Ok(clamp_mmse(var - half / PI, var, "noncausal mmse"))
}

/// Factorization constants `(r_f, u, c)` of the Gauss-Markov pilot spectrum.
pub fn gm_canonical_factors(
    ch: &ChannelParams,
    period: usize,
    pilot_power: f64,
) -> Result<CanonicalFactors> {
    ch.validate()?;
    check_period(period, 1)?;
    check_power(pilot_power)?;
    let a = ch.alpha;
    let sn = ch.sigma_n_sq;
    let c = pilot_power / period as f64 * ch.innovation_variance() + (1.0 + a * a) * sn;
    let disc = c * c - 4.0 * a * a * sn * sn;
    // disc >= ((1 + a^2)^2 - 4 a^2) sn^2 = (1 - a^2)^2 sn^2
    debug_assert!(disc >= -1e-12 * c * c, "negative discriminant {disc}");
    let r_f = 0.5 * (c + disc.max(0.0).sqrt());
    let u = a * sn / r_f;
    Ok(CanonicalFactors { r_f, u, c })
}

/// Anticausal part of `S_h / F^*` for the Gauss-Markov spectrum,
/// `((1 - a^2) s u / (1 - u a)) e^{jw} / (1 - u e^{jw})`.
pub fn gm_anticausal_part(ch: &ChannelParams, factors: &CanonicalFactors, w: f64) -> Complex64 {
    let u = factors.u;
    let gain = ch.innovation_variance() * u / (1.0 - u * ch.alpha);
    gain * Complex64::from_polar(1.0, w) / one_minus_a_e(u, w)
}

/// Causal error variance when spectral replicas are ignored: the noncausal
/// value plus the penalty from the anticausal part of the factorized
/// spectrum.
pub fn causal_mmse_no_alias(ch: &ChannelParams, period: usize, pilot_power: f64) -> Result<f64> {
    let base = noncausal_mmse_no_alias(ch, period, pilot_power)?;
    if pilot_power == 0.0 {
        return Ok(ch.sigma_h_sq);
    }
    let f = gm_canonical_factors(ch, period, pilot_power)?;
    if f.u == 0.0 {
        return Ok(base);
    }
    let edge = PI / period as f64;
    let weight = pilot_power / (period as f64 * f.r_f);
    let q = Quadrature::default().peaked_at(0.0, (1.0 - f.u).max(1e-12));
    let half = q.integrate(0.0, edge, |w| weight * gm_anticausal_part(ch, &f, w).norm_sqr())?;
    let var = ch.sigma_h_sq;
    Ok(clamp_mmse(base + half / PI, var, "causal mmse"))
}

/// Estimation quality at every data position for the given filter and
/// aliasing mode.
///
/// The causal filter with aliasing has no closed form here; use
/// [`crate::oracle::kalman_steady_state_mmse`] for its exact value.
pub fn estimate_quality(
    ch: &ChannelParams,
    period: usize,
    pilot_power: f64,
    filter: FilterKind,
    alias: AliasMode,
) -> Result<EstimateQuality> {
    check_period(period, 2)?;
    let errs = match (filter, alias) {
        (FilterKind::Noncausal, AliasMode::Considered) => {
            noncausal_mmse_aliased_all(ch, period, pilot_power)?
        }
        (FilterKind::Noncausal, AliasMode::Ignored) => {
            vec![noncausal_mmse_no_alias(ch, period, pilot_power)?; period - 1]
        }
        (FilterKind::Causal, AliasMode::Ignored) => {
            vec![causal_mmse_no_alias(ch, period, pilot_power)?; period - 1]
        }
        (FilterKind::Causal, AliasMode::Considered) => {
            return Err(Error::Unsupported(
                "causal filtering with aliasing has no analytic error variance; \
                 use the steady-state Kalman oracle"
                    .into(),
            ))
        }
    };
    Ok(EstimateQuality::from_errors(ch.sigma_h_sq, errs, filter, alias))
}

/// `alpha^M`, the pilot-to-pilot correlation of the Gauss-Markov channel.
pub fn pilot_correlation(ch: &ChannelParams, period: usize) -> f64 {
    powi_u64(ch.alpha, period as u64)
}
