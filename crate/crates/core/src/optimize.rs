//! Joint optimization of the training period, pilot power, and data powers.
//!
//! The pilot power is searched on a dense grid and then refined by
//! golden-section search around the best grid point; unimodality in `P_t` is
//! not assumed. Periods are searched exhaustively, ties going to the shorter
//! period. Per-symbol data powers solve a concave resource-allocation
//! problem by bisection on the shared Lagrange multiplier.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::{
    exp_log_expectation, effective_snr, rate_lower_bound, rate_nats_raw, RateResult,
    TrainingConfig,
};
use crate::spectrum::ChannelParams;
use crate::wiener::{estimate_quality, AliasMode, EstimateQuality, FilterKind};

/// Grid points of the pilot-power search with uniform data powers.
pub const PILOT_GRID_POINTS: usize = 200;
/// Grid points of the pilot-power search when data powers are optimized too.
pub const PROFILE_GRID_POINTS: usize = 400;
/// Golden-section stopping width relative to the search interval.
pub const PILOT_POWER_TOLERANCE: f64 = 1e-6;
/// Periods searched when the caller does not say otherwise.
pub const DEFAULT_PERIOD_RANGE: RangeInclusive<usize> = 2..=100;
pub const MAX_PERIOD: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Bookkeeping from a one-dimensional search.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub evaluations: usize,
    /// Best grid point was the first or last one.
    pub boundary_optimum: bool,
    /// The grid showed more than one local maximum.
    pub multimodal_grid: bool,
    /// Golden-section refinement did worse than the grid and was discarded.
    pub grid_fallback: bool,
}

#[derive(Debug, Clone)]
struct ScalarMax<T> {
    x: f64,
    payload: T,
    diagnostics: SearchDiagnostics,
}

/// Maximizes `f` over the open interval `(lo, hi)`.
fn maximize_on_interval<T, F>(lo: f64, hi: f64, points: usize, mut f: F) -> Result<ScalarMax<T>>
where
    F: FnMut(f64) -> Result<(f64, T)>,
{
    let step = (hi - lo) / (points + 1) as f64;
    let mut values = Vec::with_capacity(points);
    let mut best: Option<(usize, f64, T)> = None;
    for i in 1..=points {
        let x = lo + step * i as f64;
        let (v, payload) = f(x)?;
        values.push(v);
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((i, v, payload));
        }
    }
    let (bi, grid_value, grid_payload) =
        best.ok_or_else(|| Error::invalid("grid", "needs at least one point"))?;
    let mut diagnostics = SearchDiagnostics {
        evaluations: points,
        boundary_optimum: bi == 1 || bi == points,
        ..Default::default()
    };
    let local_maxima = (0..values.len())
        .filter(|&i| {
            let left = i == 0 || values[i] > values[i - 1];
            let right = i + 1 == values.len() || values[i] >= values[i + 1];
            left && right
        })
        .count();
    diagnostics.multimodal_grid = local_maxima > 1;

    // Golden-section on the bracket around the best grid point.
    let mut a = lo + step * (bi - 1) as f64;
    let mut b = lo + step * (bi + 1) as f64;
    let tol = PILOT_POWER_TOLERANCE * (hi - lo);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut pc) = f(c)?;
    let (mut fd, mut pd) = f(d)?;
    diagnostics.evaluations += 2;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            pd = pc;
            c = b - INV_PHI * (b - a);
            (fc, pc) = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            pc = pd;
            d = a + INV_PHI * (b - a);
            (fd, pd) = f(d)?;
        }
        diagnostics.evaluations += 1;
    }
    let (gx, gv, gp) = if fc >= fd { (c, fc, pc) } else { (d, fd, pd) };
    if gv >= grid_value {
        Ok(ScalarMax {
            x: gx,
            payload: gp,
            diagnostics,
        })
    } else {
        diagnostics.grid_fallback = true;
        Ok(ScalarMax {
            x: lo + step * bi as f64,
            payload: grid_payload,
            diagnostics,
        })
    }
}

fn check_inputs(ch: &ChannelParams, period: usize, average_power: f64) -> Result<()> {
    ch.validate()?;
    if period < 2 {
        return Err(Error::invalid("period", format!("{period} is below 2")));
    }
    if !(average_power > 0.0 && average_power.is_finite()) {
        return Err(Error::invalid(
            "average_power",
            format!("{average_power} must be positive and finite"),
        ));
    }
    Ok(())
}

/// Best pilot power for one period with uniform data powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotPowerOptimum {
    pub pilot_power: f64,
    pub result: RateResult,
    pub diagnostics: SearchDiagnostics,
}

/// Maximizes the uniform-power rate bound over `P_t` in `(0, M P)`.
pub fn optimize_pilot_power(
    ch: &ChannelParams,
    period: usize,
    average_power: f64,
    filter: FilterKind,
    alias: AliasMode,
) -> Result<PilotPowerOptimum> {
    check_inputs(ch, period, average_power)?;
    let budget = period as f64 * average_power;
    let data_slots = (period - 1) as f64;
    let best = maximize_on_interval(0.0, budget, PILOT_GRID_POINTS, |pt| {
        let quality = estimate_quality(ch, period, pt, filter, alias)?;
        let p0 = (budget - pt) / data_slots;
        let powers = vec![p0; period - 1];
        Ok((rate_nats_raw(ch.sigma_n_sq, period, &powers, &quality), quality))
    })?;
    let cfg = TrainingConfig::uniform(period, average_power, best.x)?;
    let result = rate_lower_bound(ch, &cfg, &best.payload)?;
    Ok(PilotPowerOptimum {
        pilot_power: best.x,
        result,
        diagnostics: best.diagnostics,
    })
}

/// One period's best rate, as recorded during a period search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodCandidate {
    pub period: usize,
    pub pilot_power: f64,
    pub rate_nats: f64,
    pub rate_bits: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeriodDiagnostics {
    pub evaluations: usize,
    /// Periods whose pilot-power optimum sat at the edge of the grid.
    pub boundary_periods: Vec<usize>,
    /// Periods whose golden-section refinement was discarded.
    pub fallback_periods: Vec<usize>,
    pub multimodal_periods: Vec<usize>,
}

/// Jointly optimal period and pilot power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best: RateResult,
    pub period: usize,
    pub pilot_power: f64,
    /// Data powers at the optimum.
    pub profile: Vec<f64>,
    /// Every period searched, in increasing order.
    pub candidates: Vec<PeriodCandidate>,
    pub diagnostics: PeriodDiagnostics,
}

/// Exhaustive search over `periods` of [`optimize_pilot_power`].
pub fn optimize_period(
    ch: &ChannelParams,
    average_power: f64,
    periods: RangeInclusive<usize>,
    filter: FilterKind,
    alias: AliasMode,
) -> Result<OptimizationResult> {
    check_period_range(&periods)?;
    let optima: Vec<PilotPowerOptimum> = periods
        .clone()
        .into_par_iter()
        .map(|m| optimize_pilot_power(ch, m, average_power, filter, alias))
        .collect::<Result<_>>()?;

    let mut diagnostics = PeriodDiagnostics::default();
    let mut best_idx = 0;
    for (i, o) in optima.iter().enumerate() {
        let m = o.result.config.period;
        diagnostics.evaluations += o.diagnostics.evaluations;
        if o.diagnostics.boundary_optimum {
            diagnostics.boundary_periods.push(m);
        }
        if o.diagnostics.grid_fallback {
            diagnostics.fallback_periods.push(m);
        }
        if o.diagnostics.multimodal_grid {
            diagnostics.multimodal_periods.push(m);
        }
        // strict: ties keep the shorter period
        if o.result.rate_nats > optima[best_idx].result.rate_nats {
            best_idx = i;
        }
    }
    let candidates = optima
        .iter()
        .map(|o| PeriodCandidate {
            period: o.result.config.period,
            pilot_power: o.pilot_power,
            rate_nats: o.result.rate_nats,
            rate_bits: o.result.rate_bits,
        })
        .collect();
    let best = optima[best_idx].clone();
    Ok(OptimizationResult {
        period: best.result.config.period,
        pilot_power: best.pilot_power,
        profile: best.result.config.data_powers.clone(),
        best: best.result,
        candidates,
        diagnostics,
    })
}

fn check_period_range(periods: &RangeInclusive<usize>) -> Result<()> {
    if periods.is_empty() {
        return Err(Error::invalid("period range", "is empty"));
    }
    if *periods.start() < 2 || *periods.end() > MAX_PERIOD {
        return Err(Error::invalid(
            "period range",
            format!(
                "{}..={} is not inside 2..={MAX_PERIOD}",
                periods.start(),
                periods.end()
            ),
        ));
    }
    Ok(())
}

/// Optimal data powers for fixed estimation quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// Common marginal rate `lambda` at the optimum.
    pub multiplier: f64,
    /// Largest relative violation of the optimality conditions.
    pub kkt_residual: f64,
}

struct SymbolObjective {
    est_var: f64,
    err_var: f64,
    sigma_n_sq: f64,
    step_floor: f64,
}

impl SymbolObjective {
    fn value(&self, p: f64) -> f64 {
        exp_log_expectation(effective_snr(p, self.est_var, self.err_var, self.sigma_n_sq))
    }

    // Central difference with a relative step; one-sided next to zero.
    fn slope(&self, p: f64) -> f64 {
        let h = 1e-6 * p.max(self.step_floor);
        if p > h {
            (self.value(p + h) - self.value(p - h)) / (2.0 * h)
        } else {
            (self.value(p + h) - self.value(p)) / h
        }
    }

    /// Power at which the slope drops to `lambda`, capped at `cap`.
    fn power_at(&self, lambda: f64, cap: f64) -> f64 {
        if self.slope(0.0) <= lambda {
            return 0.0;
        }
        if self.slope(cap) >= lambda {
            return cap;
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.slope(mid) > lambda {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * cap {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Splits `budget` over the data positions of `quality` to maximize
/// `sum_m E[ln(1 + SINR_m(P_m) |xi|^2)]`.
pub fn allocate_data_power(
    quality: &EstimateQuality,
    sigma_n_sq: f64,
    budget: f64,
) -> Result<PowerAllocation> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::invalid(
            "budget",
            format!("data power budget {budget} is infeasible"),
        ));
    }
    if quality.is_empty() {
        return Err(Error::invalid("quality", "no data positions"));
    }
    let symbols: Vec<SymbolObjective> = quality
        .est_var
        .iter()
        .zip(&quality.err_var)
        .map(|(&est_var, &err_var)| SymbolObjective {
            est_var,
            err_var,
            sigma_n_sq,
            step_floor: 1e-4 * budget,
        })
        .collect();

    let total_at = |lambda: f64| -> f64 { symbols.iter().map(|s| s.power_at(lambda, budget)).sum() };
    let mut hi = symbols.iter().map(|s| s.slope(0.0)).fold(0.0, f64::max);
    let mut lo = symbols
        .iter()
        .map(|s| s.slope(budget))
        .fold(f64::INFINITY, f64::min);
    if !(hi > 0.0) {
        // No symbol gains anything from power; spread evenly.
        let n = symbols.len() as f64;
        return Ok(PowerAllocation {
            powers: vec![budget / n; symbols.len()],
            multiplier: 0.0,
            kkt_residual: 0.0,
        });
    }
    lo = lo.min(hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total_at(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let mut powers: Vec<f64> = symbols.iter().map(|s| s.power_at(lambda, budget)).collect();
    let sum: f64 = powers.iter().sum();
    if sum > 0.0 {
        let scale = budget / sum;
        powers.iter_mut().for_each(|p| *p *= scale);
    }
    let kkt_residual = symbols
        .iter()
        .zip(&powers)
        .map(|(s, &p)| {
            if p > 0.0 {
                (s.slope(p) - lambda).abs() / lambda
            } else {
                (s.slope(0.0) - lambda).max(0.0) / lambda
            }
        })
        .fold(0.0, f64::max);
    Ok(PowerAllocation {
        powers,
        multiplier: lambda,
        kkt_residual,
    })
}

/// Optimal data powers for a given period and pilot power under noncausal
/// filtering with aliasing, the one case where estimation quality depends on
/// the data position.
pub fn optimize_power_profile(
    ch: &ChannelParams,
    period: usize,
    average_power: f64,
    pilot_power: f64,
) -> Result<Vec<f64>> {
    check_inputs(ch, period, average_power)?;
    let budget = period as f64 * average_power - pilot_power;
    let quality = estimate_quality(
        ch,
        period,
        pilot_power,
        FilterKind::Noncausal,
        AliasMode::Considered,
    )?;
    Ok(allocate_data_power(&quality, ch.sigma_n_sq, budget)?.powers)
}

/// Pilot power and per-symbol data powers optimized together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptimum {
    pub pilot_power: f64,
    pub allocation: PowerAllocation,
    pub result: RateResult,
    pub diagnostics: SearchDiagnostics,
}

/// Searches `P_t` with the data powers re-optimized at every candidate.
pub fn optimize_pilot_and_profile(
    ch: &ChannelParams,
    period: usize,
    average_power: f64,
    filter: FilterKind,
    alias: AliasMode,
) -> Result<ProfileOptimum> {
    check_inputs(ch, period, average_power)?;
    let budget = period as f64 * average_power;
    let best = maximize_on_interval(0.0, budget, PROFILE_GRID_POINTS, |pt| {
        let quality = estimate_quality(ch, period, pt, filter, alias)?;
        let allocation = allocate_data_power(&quality, ch.sigma_n_sq, budget - pt)?;
        let rate = rate_nats_raw(ch.sigma_n_sq, period, &allocation.powers, &quality);
        Ok((rate, (quality, allocation)))
    })?;
    let (quality, allocation) = best.payload;
    let cfg = TrainingConfig {
        period,
        pilot_power: best.x,
        data_powers: allocation.powers.clone(),
        average_power,
    };
    let result = rate_lower_bound(ch, &cfg, &quality)?;
    Ok(ProfileOptimum {
        pilot_power: best.x,
        allocation,
        result,
        diagnostics: best.diagnostics,
    })
}

/// One SNR point of a sweep. Failures are kept in place rather than
/// dropping the row.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrRow {
    /// Linear SNR `P / sigma_n^2`.
    pub snr: f64,
    pub outcome: std::result::Result<OptimizationResult, String>,
}

/// Runs [`optimize_period`] at every SNR (linear) in `snrs`.
pub fn sweep_snr(
    ch: &ChannelParams,
    snrs: &[f64],
    periods: RangeInclusive<usize>,
    filter: FilterKind,
    alias: AliasMode,
) -> Result<Vec<SnrRow>> {
    ch.validate()?;
    check_period_range(&periods)?;
    if snrs.is_empty() {
        return Err(Error::invalid("snr grid", "is empty"));
    }
    Ok(snrs
        .par_iter()
        .map(|&snr| SnrRow {
            snr,
            outcome: optimize_period(ch, snr * ch.sigma_n_sq, periods.clone(), filter, alias)
                .map_err(|e| e.to_string()),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitEnergyPoint {
    /// Linear SNR.
    pub snr: f64,
    /// Linear `E_b / N_0`; infinite where the rate is zero.
    pub eb_n0: f64,
    pub rate_bits: f64,
    pub period: usize,
    pub pilot_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitEnergyCurve {
    pub points: Vec<BitEnergyPoint>,
    /// Index of the minimum of `eb_n0` in `points`.
    pub best: usize,
}

impl BitEnergyCurve {
    pub fn minimum(&self) -> &BitEnergyPoint {
        &self.points[self.best]
    }
}

/// Bit energy `snr / C(snr)` over an SNR grid at the optimal period of each
/// point, and its minimizer.
///
/// The grid (linear SNR) must cover -10 dB to 10 dB with steps of at most
/// 0.5 dB.
pub fn minimum_bit_energy(
    ch: &ChannelParams,
    snrs: &[f64],
    periods: RangeInclusive<usize>,
    filter: FilterKind,
    alias: AliasMode,
) -> Result<BitEnergyCurve> {
    check_bit_energy_grid(snrs)?;
    let rows = sweep_snr(ch, snrs, periods, filter, alias)?;
    let mut points = Vec::with_capacity(rows.len());
    for row in rows {
        let opt = row.outcome.map_err(Error::Numerical)?;
        let rate_bits = opt.best.rate_bits;
        let eb_n0 = crate::rate::bit_energy(row.snr, rate_bits).unwrap_or(f64::INFINITY);
        points.push(BitEnergyPoint {
            snr: row.snr,
            eb_n0,
            rate_bits,
            period: opt.period,
            pilot_power: opt.pilot_power,
        });
    }
    let best = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.eb_n0.is_finite())
        .min_by(|a, b| a.1.eb_n0.total_cmp(&b.1.eb_n0))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Numerical("every rate on the SNR grid is zero".into()))?;
    Ok(BitEnergyCurve { points, best })
}

fn check_bit_energy_grid(snrs: &[f64]) -> Result<()> {
    let mut sorted: Vec<f64> = snrs.to_vec();
    if sorted.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("snr grid", "values must be positive and finite"));
    }
    sorted.sort_by(f64::total_cmp);
    let slack = 1.0 + 1e-9;
    let (first, last) = (sorted[0], sorted[sorted.len() - 1]);
    if first > 0.1 * slack || last < 10.0 / slack {
        return Err(Error::invalid(
            "snr grid",
            "must span at least -10 dB to 10 dB",
        ));
    }
    let max_ratio = 10f64.powf(0.05) * slack;
    if sorted.windows(2).any(|w| w[1] / w[0] > max_ratio) {
        return Err(Error::invalid("snr grid", "steps must be at most 0.5 dB"));
    }
    Ok(())
}
