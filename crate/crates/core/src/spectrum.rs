//! Doppler power spectral densities and their pilot-rate undersampled
//! versions.
//!
//! Frequencies are normalized radian frequencies in `[-pi, pi]` with the
//! symbol time taken as one. Densities are power per radian, so that
//! `(1/2pi) * integral of S(w) over [-pi, pi]` is the process variance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Statistics of a first-order Gauss-Markov fading channel
/// `h_k = alpha * h_{k-1} + z_k` observed in additive white noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Gauss-Markov coefficient, `0 <= alpha < 1`.
    pub alpha: f64,
    /// Fading variance.
    pub sigma_h_sq: f64,
    /// Additive noise variance.
    pub sigma_n_sq: f64,
}

impl ChannelParams {
    pub fn new(alpha: f64, sigma_h_sq: f64, sigma_n_sq: f64) -> Result<Self> {
        let ch = Self {
            alpha,
            sigma_h_sq,
            sigma_n_sq,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("{} is outside [0, 1)", self.alpha),
            ));
        }
        if !(self.sigma_h_sq > 0.0 && self.sigma_h_sq.is_finite()) {
            return Err(Error::invalid(
                "sigma_h_sq",
                format!("{} must be positive and finite", self.sigma_h_sq),
            ));
        }
        if !(self.sigma_n_sq > 0.0 && self.sigma_n_sq.is_finite()) {
            return Err(Error::invalid(
                "sigma_n_sq",
                format!("{} must be positive and finite", self.sigma_n_sq),
            ));
        }
        Ok(())
    }

    /// Variance of the innovation `z_k`.
    pub fn innovation_variance(&self) -> f64 {
        (1.0 - self.alpha * self.alpha) * self.sigma_h_sq
    }

    /// `E[h_{k+lag} h_k^*] = sigma_h^2 alpha^|lag|`.
    pub fn autocovariance(&self, lag: i64) -> f64 {
        self.sigma_h_sq * powi_u64(self.alpha, lag.unsigned_abs())
    }
}

pub(crate) fn powi_u64(x: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        x.powi(n as i32)
    } else {
        x.powf(n as f64)
    }
}

/// A real, even, nonnegative, `2pi`-periodic power spectral density.
pub trait DopplerSpectrum {
    fn density(&self, w: f64) -> f64;

    /// Process variance, `(1/2pi) * integral of density over [-pi, pi]`.
    fn variance(&self) -> f64;

    /// Approximate width of the spectral peak at `w = 0`; guides quadrature
    /// refinement.
    fn feature_width(&self) -> f64 {
        f64::INFINITY
    }

    /// `S_{h,m}(e^{jw})` without argument checks. The default folds `period`
    /// shifted replicas of the density.
    fn undersampled_unchecked(&self, period: usize, offset: usize, w: f64) -> Complex64 {
        fold_spectrum(self, period, offset, w)
    }

    /// Writes `S_{h,m}(e^{jw})` for every offset `m` in `0..period` into `out`.
    fn undersampled_all(&self, period: usize, w: f64, out: &mut [Complex64]) {
        for (m, o) in out.iter_mut().enumerate().take(period) {
            *o = self.undersampled_unchecked(period, m, w);
        }
    }
}

/// Wraps `x` into `[-pi, pi]`.
pub fn wrap_frequency(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    x - two_pi * (x / two_pi).round()
}

/// The pilot-rate spectrum at offset `m` built directly from its definition,
/// `(1/M) sum_k e^{jm(w - 2pi k)/M} S((w - 2pi k)/M)`.
pub fn fold_spectrum<S: DopplerSpectrum + ?Sized>(
    psd: &S,
    period: usize,
    offset: usize,
    w: f64,
) -> Complex64 {
    let mf = period as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..period {
        let theta = (w - 2.0 * PI * k as f64) / mf;
        acc += Complex64::from_polar(psd.density(wrap_frequency(theta)), offset as f64 * theta);
    }
    acc / mf
}

/// The spectrum of the channel seen only at pilot instants spaced `period`
/// symbols apart, cross-correlated with the channel `offset` symbols later.
pub fn undersampled_spectrum<S: DopplerSpectrum + ?Sized>(
    psd: &S,
    period: usize,
    offset: usize,
    w: f64,
) -> Result<Complex64> {
    if period == 0 {
        return Err(Error::invalid("period", "must be at least 1"));
    }
    if offset >= period {
        return Err(Error::invalid(
            "offset",
            format!("{offset} is outside [0, {}]", period - 1),
        ));
    }
    Ok(psd.undersampled_unchecked(period, offset, w))
}

impl DopplerSpectrum for ChannelParams {
    fn density(&self, w: f64) -> f64 {
        gm_psd(self, w)
    }

    fn variance(&self) -> f64 {
        self.sigma_h_sq
    }

    fn feature_width(&self) -> f64 {
        (1.0 - self.alpha).max(1e-12)
    }

    fn undersampled_unchecked(&self, period: usize, offset: usize, w: f64) -> Complex64 {
        let mut out = vec![Complex64::new(0.0, 0.0); period];
        self.undersampled_all(period, w, &mut out);
        out[offset]
    }

    // The pilot-rate sequence R(lM + m) = sigma^2 alpha^|lM + m| has the
    // closed-form transform sigma^2 [alpha^m A + alpha^(M-m) e^{jw} conj(A)]
    // with A = 1 / (1 - alpha^M e^{-jw}).
    fn undersampled_all(&self, period: usize, w: f64, out: &mut [Complex64]) {
        let a = powi_u64(self.alpha, period as u64);
        let e = Complex64::from_polar(1.0, w);
        let big_a = one_minus_a_e(a, -w).inv();
        let big_b = e * big_a.conj();
        let s = self.sigma_h_sq;
        let mut p = 1.0;
        for o in out.iter_mut().take(period) {
            *o = big_a * (s * p);
            p *= self.alpha;
        }
        let mut q = self.alpha;
        for o in out.iter_mut().take(period).rev() {
            *o += big_b * (s * q);
            q *= self.alpha;
        }
        if period > 0 {
            out[0] = Complex64::new(s * (1.0 - a * a) / ar_denominator(a, w), 0.0);
        }
    }
}

/// Gauss-Markov Doppler spectrum `(1 - a^2) s / (1 + a^2 - 2 a cos w)`.
pub fn gm_psd(ch: &ChannelParams, w: f64) -> f64 {
    ch.innovation_variance() / ar_denominator(ch.alpha, w)
}

/// `|1 - a e^{jw}|^2 = 1 + a^2 - 2 a cos w`, evaluated as
/// `(1 - a)^2 + 4 a sin^2(w/2)` to avoid cancellation near the peak.
pub(crate) fn ar_denominator(a: f64, w: f64) -> f64 {
    let s = (0.5 * w).sin();
    (1.0 - a) * (1.0 - a) + 4.0 * a * s * s
}

/// `1 - a e^{jw}` with the real part free of cancellation.
pub(crate) fn one_minus_a_e(a: f64, w: f64) -> Complex64 {
    let s = (0.5 * w).sin();
    Complex64::new((1.0 - a) + 2.0 * a * s * s, -a * w.sin())
}

/// Fraction of the fading power inside `[-band_edge, band_edge]`.
pub fn power_fraction(ch: &ChannelParams, band_edge: f64) -> Result<f64> {
    if !(band_edge > 0.0 && band_edge <= PI) {
        return Err(Error::invalid(
            "band_edge",
            format!("{band_edge} is outside (0, pi]"),
        ));
    }
    let q = Quadrature::default().peaked_at(0.0, ch.feature_width());
    let half = q.integrate(0.0, band_edge, |w| gm_psd(ch, w))?;
    Ok((2.0 * half / (2.0 * PI) / ch.sigma_h_sq).clamp(0.0, 1.0))
}

/// Largest pilot period `M` for which `[-pi/M, pi/M]` still holds at least
/// `threshold` of the fading power.
pub fn alias_safe_period(ch: &ChannelParams, threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(
            "threshold",
            format!("{threshold} is outside (0, 1)"),
        ));
    }
    let holds = |m: usize| -> Result<bool> { Ok(power_fraction(ch, PI / m as f64)? >= threshold) };
    let mut good = 1usize;
    let mut bad = 2usize;
    while holds(bad)? {
        good = bad;
        bad = bad.checked_mul(2).ok_or_else(|| {
            Error::Numerical("alias-safe period search overflowed".into())
        })?;
        if bad > 1 << 40 {
            return Err(Error::Numerical(
                "alias-safe period exceeds 2^40; alpha is too close to one".into(),
            ));
        }
    }
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if holds(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// One evaluation of a (possibly complex) spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    pub w: f64,
    pub value: Complex64,
}

/// Samples `S_{h,m}` on `points` equally spaced frequencies across `[-pi, pi]`.
pub fn sample_undersampled<S: DopplerSpectrum + ?Sized>(
    psd: &S,
    period: usize,
    offset: usize,
    points: usize,
) -> Result<Vec<SpectrumSample>> {
    if points < 2 {
        return Err(Error::invalid("points", "need at least two samples"));
    }
    (0..points)
        .map(|i| {
            let w = -PI + 2.0 * PI * i as f64 / (points - 1) as f64;
            Ok(SpectrumSample {
                w,
                value: undersampled_spectrum(psd, period, offset, w)?,
            })
        })
        .collect()
}

/// A user-supplied spectral density.
///
/// The closure is evaluated on `[-pi, pi]` and must be even and nonnegative
/// there. The variance is integrated once at construction.
pub struct SpectrumFn<F> {
    density: F,
    variance: f64,
}

impl<F: Fn(f64) -> f64> SpectrumFn<F> {
    pub fn new(density: F) -> Result<Self> {
        let q = Quadrature::default();
        let half = q.integrate(0.0, PI, &density)?;
        let variance = half / PI;
        if !(variance > 0.0) {
            return Err(Error::invalid("density", "spectrum has no power"));
        }
        Ok(Self { density, variance })
    }
}

impl<F: Fn(f64) -> f64> DopplerSpectrum for SpectrumFn<F> {
    fn density(&self, w: f64) -> f64 {
        (self.density)(w)
    }

    fn variance(&self) -> f64 {
        self.variance
    }
}
