//! Analytic-versus-oracle comparison suite behind the `validate` scenario.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::oracle::{
    empirical_mmse, finite_window_mmse, kalman_steady_state_mmse, simulate_channel,
};
use crate::spectrum::ChannelParams;
use crate::wiener::{causal_mmse_no_alias, noncausal_mmse_aliased, FilterKind};

/// Pilots on each side of the noncausal window, and causal window length.
pub const ORACLE_WINDOW: usize = 400;
/// Window used on simulated traces.
pub const TRACE_WINDOW: usize = 100;
pub const TRACE_SYMBOLS: usize = 1_000_000;

pub const NONCAUSAL_ABS_TOL: f64 = 1e-4;
pub const CAUSAL_REL_TOL: f64 = 0.02;
pub const KALMAN_WINDOW_ABS_TOL: f64 = 1e-6;
pub const MONTE_CARLO_SIGMAS: f64 = 3.0;
/// Extra slack for the finite causal window against the infinite-memory
/// Kalman filter.
pub const CAUSAL_TRUNCATION_ALLOWANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckGroup {
    /// Aliased noncausal Wiener MMSE against the finite-window LMMSE.
    NoncausalWindow,
    /// No-aliasing causal MMSE against the exact steady-state Kalman MMSE
    /// averaged over data positions.
    CausalKalman,
    /// Steady-state Kalman against the finite causal window.
    KalmanWindow,
    /// Simulated traces against the exact finite-window or Kalman values.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCase {
    pub group: CheckGroup,
    pub label: String,
    pub analytic: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    /// Allowed `abs_diff` for this case.
    pub allowed: f64,
    pub pass: bool,
}

impl ValidationCase {
    fn new(group: CheckGroup, label: String, analytic: f64, oracle: f64, allowed: f64) -> Self {
        let abs_diff = (analytic - oracle).abs();
        Self {
            group,
            label,
            analytic,
            oracle,
            abs_diff,
            allowed,
            pass: abs_diff <= allowed,
        }
    }
}

/// `(alpha, M, m, P_t)` grid for the noncausal comparison.
pub fn noncausal_grid() -> Vec<(f64, usize, usize, f64)> {
    let mut out = Vec::new();
    for &alpha in &[0.9, 0.95, 0.99, 0.995] {
        for &(m, pos, pt) in &[(2, 1, 1.0), (5, 2, 3.0), (9, 4, 10.0), (16, 1, 16.0), (16, 8, 4.0)] {
            out.push((alpha, m, pos, pt));
        }
    }
    out
}

/// `(alpha, M, P_t)` grid for the causal comparison, inside the regime where
/// aliasing is meant to be negligible (`alpha >= 0.99`, `M <= 49`).
pub fn causal_grid() -> Vec<(f64, usize, f64)> {
    let mut out = Vec::new();
    for &alpha in &[0.99, 0.995] {
        for &(m, pt) in &[(4, 4.0), (16, 16.0), (30, 30.0), (49, 49.0)] {
            out.push((alpha, m, pt));
        }
    }
    out
}

fn unit(alpha: f64) -> Result<ChannelParams> {
    ChannelParams::new(alpha, 1.0, 1.0)
}

pub fn noncausal_window_checks() -> Result<Vec<ValidationCase>> {
    noncausal_grid()
        .into_iter()
        .map(|(alpha, m, pos, pt)| {
            let ch = unit(alpha)?;
            let analytic = noncausal_mmse_aliased(&ch, m, pos, pt)?;
            let oracle =
                finite_window_mmse(&ch, m, pos, pt, ORACLE_WINDOW, FilterKind::Noncausal)?;
            Ok(ValidationCase::new(
                CheckGroup::NoncausalWindow,
                format!("noncausal aliased vs window K={ORACLE_WINDOW}: alpha={alpha} M={m} m={pos} Pt={pt}"),
                analytic,
                oracle,
                NONCAUSAL_ABS_TOL,
            ))
        })
        .collect()
}

pub fn causal_kalman_checks() -> Result<Vec<ValidationCase>> {
    causal_grid()
        .into_iter()
        .map(|(alpha, m, pt)| {
            let ch = unit(alpha)?;
            let analytic = causal_mmse_no_alias(&ch, m, pt)?;
            let oracle = (1..m)
                .map(|pos| kalman_steady_state_mmse(&ch, m, pos, pt))
                .sum::<f64>()
                / (m - 1) as f64;
            Ok(ValidationCase::new(
                CheckGroup::CausalKalman,
                format!("causal no-alias vs mean Kalman: alpha={alpha} M={m} Pt={pt}"),
                analytic,
                oracle,
                CAUSAL_REL_TOL * oracle,
            ))
        })
        .collect()
}

pub fn kalman_window_checks() -> Result<Vec<ValidationCase>> {
    noncausal_grid()
        .into_iter()
        .map(|(alpha, m, pos, pt)| {
            let ch = unit(alpha)?;
            let analytic = kalman_steady_state_mmse(&ch, m, pos, pt);
            let oracle = finite_window_mmse(&ch, m, pos, pt, ORACLE_WINDOW, FilterKind::Causal)?;
            Ok(ValidationCase::new(
                CheckGroup::KalmanWindow,
                format!("Kalman vs causal window K={ORACLE_WINDOW}: alpha={alpha} M={m} m={pos} Pt={pt}"),
                analytic,
                oracle,
                KALMAN_WINDOW_ABS_TOL,
            ))
        })
        .collect()
}

/// Monte Carlo checks on `TRACE_SYMBOLS`-long traces. Seeds are derived
/// from `seed`, so the outcome is reproducible.
pub fn monte_carlo_checks(seed: u64) -> Result<Vec<ValidationCase>> {
    let mut cases = Vec::new();
    let specs: [(f64, usize, usize, f64, FilterKind); 4] = [
        (0.99, 16, 8, 16.0, FilterKind::Noncausal),
        (0.99, 16, 8, 16.0, FilterKind::Causal),
        (0.90, 5, 2, 3.0, FilterKind::Noncausal),
        (0.99, 16, 4, 0.0, FilterKind::Noncausal),
    ];
    for (i, &(alpha, m, pos, pt, filter)) in specs.iter().enumerate() {
        let ch = unit(alpha)?;
        let trace = simulate_channel(&ch, TRACE_SYMBOLS, m, pt, seed.wrapping_add(i as u64))?;
        let sample = empirical_mmse(&trace, pos, TRACE_WINDOW, filter)?;
        let (exact, slack) = match filter {
            FilterKind::Noncausal => (
                finite_window_mmse(&ch, m, pos, pt, TRACE_WINDOW, filter)?,
                0.0,
            ),
            FilterKind::Causal => (
                kalman_steady_state_mmse(&ch, m, pos, pt),
                CAUSAL_TRUNCATION_ALLOWANCE,
            ),
        };
        cases.push(ValidationCase::new(
            CheckGroup::MonteCarlo,
            format!(
                "simulated {filter:?} K={TRACE_WINDOW} n={TRACE_SYMBOLS}: alpha={alpha} M={m} m={pos} Pt={pt} (se={:.3e}, events={})",
                sample.standard_error, sample.events
            ),
            exact,
            sample.mean,
            MONTE_CARLO_SIGMAS * sample.standard_error + slack,
        ));
    }
    Ok(cases)
}

/// Every validation group, in a fixed order.
pub fn run_validation(seed: u64) -> Result<Vec<ValidationCase>> {
    let mut cases = noncausal_window_checks()?;
    cases.extend(causal_kalman_checks()?);
    cases.extend(kalman_window_checks()?);
    cases.extend(monte_carlo_checks(seed)?);
    Ok(cases)
}
