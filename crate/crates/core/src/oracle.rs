//! Independent numerical oracles for the analytic error variances.
//!
//! - [`finite_window_mmse`]: exact linear MMSE from finitely many pilots,
//!   solved as a Toeplitz system. Converges to the Wiener values as the
//!   window grows.
//! - [`kalman_steady_state_mmse`]: the pilot-rate channel is itself
//!   Gauss-Markov with coefficient `alpha^M`, so a scalar Kalman filter gives
//!   the exact causal MMSE, aliasing included.
//! - [`simulate_channel`] and [`empirical_mmse`]: Monte Carlo traces and the
//!   sample error of the finite-window estimator applied to them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{powi_u64, ChannelParams};
use crate::toeplitz::{solve_symmetric_toeplitz, SolveMethod};
use crate::wiener::FilterKind;

/// Minimum number of estimation events [`empirical_mmse`] accepts.
pub const MIN_EVENTS: usize = 10_000;

const FADING_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// `sigma_h^2 alpha^{M |lag|}`: covariance of channel samples `lag` pilots
/// apart.
pub fn pilot_autocovariance(ch: &ChannelParams, period: usize, lag: i64) -> f64 {
    ch.sigma_h_sq * powi_u64(ch.alpha, period as u64 * lag.unsigned_abs())
}

/// A finite-window LMMSE interpolator for one data position.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFilter {
    /// Pilot indices relative to the pilot that starts the target's period.
    pub pilots: Vec<i64>,
    /// Tap applied to each pilot observation.
    pub taps: Vec<f64>,
    /// Error variance of the estimate.
    pub mmse: f64,
    pub method: SolveMethod,
}

/// Pilot window for a target `offset` symbols after pilot 0.
///
/// Noncausal: `2K + 1` pilots centered on the pilot nearest the target.
/// Causal: the `K` most recent pilots at or before the target.
pub fn window_pilots(period: usize, offset: usize, window: usize, filter: FilterKind) -> Vec<i64> {
    let k = window as i64;
    match filter {
        FilterKind::Noncausal => {
            let center = if 2 * offset <= period { 0 } else { 1 };
            (center - k..=center + k).collect()
        }
        FilterKind::Causal => (-(k - 1)..=0).collect(),
    }
}

/// Builds the LMMSE taps for position `offset` from the pilots of
/// [`window_pilots`].
pub fn window_filter(
    ch: &ChannelParams,
    period: usize,
    offset: usize,
    pilot_power: f64,
    window: usize,
    filter: FilterKind,
) -> Result<WindowFilter> {
    ch.validate()?;
    if period == 0 || offset >= period {
        return Err(Error::invalid(
            "offset",
            format!("{offset} is outside [0, {}]", period.saturating_sub(1)),
        ));
    }
    if window == 0 {
        return Err(Error::invalid("window", "must be at least 1"));
    }
    if !(pilot_power >= 0.0 && pilot_power.is_finite()) {
        return Err(Error::invalid("pilot_power", "must be finite and nonnegative"));
    }
    let pilots = window_pilots(period, offset, window, filter);
    let n = pilots.len();
    let s = ch.sigma_h_sq;
    let col: Vec<f64> = (0..n)
        .map(|k| {
            pilot_power * pilot_autocovariance(ch, period, k as i64)
                + if k == 0 { ch.sigma_n_sq } else { 0.0 }
        })
        .collect();
    let amp = pilot_power.sqrt();
    let cross: Vec<f64> = pilots
        .iter()
        .map(|&j| amp * ch.autocovariance(j * period as i64 - offset as i64))
        .collect();
    let (taps, method) = solve_symmetric_toeplitz(&col, &cross)?;
    let explained: f64 = taps.iter().zip(&cross).map(|(a, b)| a * b).sum();
    Ok(WindowFilter {
        pilots,
        taps,
        mmse: (s - explained).clamp(0.0, s),
        method,
    })
}

/// Exact LMMSE error variance at position `offset` from a finite pilot
/// window. Nonincreasing in `window`.
pub fn finite_window_mmse(
    ch: &ChannelParams,
    period: usize,
    offset: usize,
    pilot_power: f64,
    window: usize,
    filter: FilterKind,
) -> Result<f64> {
    Ok(window_filter(ch, period, offset, pilot_power, window, filter)?.mmse)
}

/// Steady state of the pilot-rate Kalman filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanSteadyState {
    /// Error variance right after a pilot update.
    pub filtered: f64,
    /// Error variance one pilot period ahead.
    pub predicted: f64,
    pub iterations: usize,
}

/// Iterates the scalar Riccati recursion of the pilot-rate chain
/// (coefficient `alpha^M`, gain `sqrt(P_t)`) to its fixed point.
pub fn kalman_steady_state(ch: &ChannelParams, period: usize, pilot_power: f64) -> KalmanSteadyState {
    let a = powi_u64(ch.alpha, period as u64);
    let process = (1.0 - a * a) * ch.sigma_h_sq;
    let sn = ch.sigma_n_sq;
    let mut filtered = ch.sigma_h_sq;
    let mut iterations = 0;
    for i in 1..=50_000_000usize {
        let predicted = a * a * filtered + process;
        let next = predicted * sn / (pilot_power * predicted + sn);
        iterations = i;
        let done = (next - filtered).abs() <= 1e-14;
        filtered = next;
        if done {
            break;
        }
    }
    KalmanSteadyState {
        filtered,
        predicted: a * a * filtered + process,
        iterations,
    }
}

/// Exact causal MMSE at data position `offset`:
/// `sigma_h^2 (1 - alpha^{2m}) + alpha^{2m} Sigma_filtered`.
pub fn kalman_steady_state_mmse(
    ch: &ChannelParams,
    period: usize,
    offset: usize,
    pilot_power: f64,
) -> f64 {
    let state = kalman_steady_state(ch, period, pilot_power);
    let g = powi_u64(ch.alpha, 2 * offset as u64);
    ch.sigma_h_sq * (1.0 - g) + g * state.filtered
}

/// A simulated fading trace with its pilot observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTrace {
    pub channel: ChannelParams,
    pub period: usize,
    pub pilot_power: f64,
    pub seed: u64,
    /// `h_k` for every symbol.
    pub coefficients: Vec<Complex64>,
    /// `y_{lM} = sqrt(P_t) h_{lM} + n_{lM}` for every pilot slot.
    pub observations: Vec<Complex64>,
}

impl ChannelTrace {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Mean of `|h_k|^2`.
    pub fn empirical_variance(&self) -> f64 {
        self.coefficients.iter().map(|h| h.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Real part of the sample mean of `h_{k+lag} h_k^*`.
    pub fn empirical_autocovariance(&self, lag: usize) -> f64 {
        let n = self.len().saturating_sub(lag);
        if n == 0 {
            return 0.0;
        }
        let sum: Complex64 = (0..n)
            .map(|k| self.coefficients[k + lag] * self.coefficients[k].conj())
            .sum();
        sum.re / n as f64
    }
}

fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Generates `n_symbols` fading coefficients by the AR(1) recursion started
/// from its stationary law, and the noisy pilot observations every `period`
/// symbols.
///
/// ChaCha20 seeded from `seed`; fading and noise use separate streams so a
/// trace's fading does not depend on the pilot power.
pub fn simulate_channel(
    ch: &ChannelParams,
    n_symbols: usize,
    period: usize,
    pilot_power: f64,
    seed: u64,
) -> Result<ChannelTrace> {
    ch.validate()?;
    if n_symbols == 0 {
        return Err(Error::invalid("n_symbols", "must be at least 1"));
    }
    if period == 0 {
        return Err(Error::invalid("period", "must be at least 1"));
    }
    if !(pilot_power >= 0.0 && pilot_power.is_finite()) {
        return Err(Error::invalid("pilot_power", "must be finite and nonnegative"));
    }
    let mut fading = ChaCha20Rng::seed_from_u64(seed);
    fading.set_stream(FADING_STREAM);
    let mut noise = ChaCha20Rng::seed_from_u64(seed);
    noise.set_stream(NOISE_STREAM);

    let innovation = ch.innovation_variance();
    let mut coefficients = Vec::with_capacity(n_symbols);
    let mut h = complex_gaussian(&mut fading, ch.sigma_h_sq);
    coefficients.push(h);
    for _ in 1..n_symbols {
        h = ch.alpha * h + complex_gaussian(&mut fading, innovation);
        coefficients.push(h);
    }
    let amp = pilot_power.sqrt();
    let observations = coefficients
        .iter()
        .step_by(period)
        .map(|h| amp * h + complex_gaussian(&mut noise, ch.sigma_n_sq))
        .collect();
    Ok(ChannelTrace {
        channel: *ch,
        period,
        pilot_power,
        seed,
        coefficients,
        observations,
    })
}

/// Sample estimation error over a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMmse {
    pub mean: f64,
    /// Batch-means standard error; adjacent events share pilots and are
    /// correlated.
    pub standard_error: f64,
    pub events: usize,
}

const BATCHES: usize = 200;

/// Applies the finite-window LMMSE taps at every usable period of `trace`
/// and averages `|h - h_hat|^2`.
pub fn empirical_mmse(
    trace: &ChannelTrace,
    offset: usize,
    window: usize,
    filter: FilterKind,
) -> Result<EmpiricalMmse> {
    let wf = window_filter(
        &trace.channel,
        trace.period,
        offset,
        trace.pilot_power,
        window,
        filter,
    )?;
    let lo = -wf.pilots.iter().copied().min().unwrap_or(0);
    let hi = wf.pilots.iter().copied().max().unwrap_or(0);
    let n_pilots = trace.observations.len() as i64;
    let mut errors = Vec::new();
    for l in lo.max(0)..(n_pilots - hi) {
        let t = l as usize * trace.period + offset;
        if t >= trace.coefficients.len() {
            break;
        }
        let estimate: Complex64 = wf
            .pilots
            .iter()
            .zip(&wf.taps)
            .map(|(&j, &w)| w * trace.observations[(l + j) as usize])
            .sum();
        errors.push((trace.coefficients[t] - estimate).norm_sqr());
    }
    let events = errors.len();
    if events < MIN_EVENTS {
        return Err(Error::invalid(
            "trace",
            format!("only {events} estimation events; need at least {MIN_EVENTS}"),
        ));
    }
    let mean = errors.iter().sum::<f64>() / events as f64;
    let size = events / BATCHES;
    let batch_means: Vec<f64> = errors
        .chunks_exact(size)
        .take(BATCHES)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let bm = batch_means.iter().sum::<f64>() / BATCHES as f64;
    let var = batch_means.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    Ok(EmpiricalMmse {
        mean,
        standard_error: (var / BATCHES as f64).sqrt(),
        events,
    })
}
