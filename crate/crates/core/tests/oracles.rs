//! Library results against independent computations: brute-force sums,
//! exhaustive grids, high-precision reference values, and invariants.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use psam::optimize::{allocate_data_power, optimize_pilot_power};
use psam::oracle::{finite_window_mmse, kalman_steady_state_mmse};
use psam::rate::effective_snr;
use psam::spectrum::undersampled_spectrum;
use psam::wiener::{
    causal_mmse_no_alias, estimate_quality, noncausal_mmse_aliased, noncausal_mmse_aliased_all,
    noncausal_mmse_no_alias,
};
use psam::{
    exp_log_expectation, rate_lower_bound, AliasMode, ChannelParams, EstimateQuality, FilterKind,
    TrainingConfig,
};

fn gm(alpha: f64) -> ChannelParams {
    ChannelParams::new(alpha, 1.0, 1.0).unwrap()
}

/// `sum_l R(lM + m) e^{-jwl}`, truncated once the terms vanish.
fn dtft_of_pilot_sequence(ch: &ChannelParams, period: usize, offset: usize, w: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut l: i64 = 0;
    loop {
        let mut added = 0.0f64;
        for k in if l == 0 { vec![0] } else { vec![l, -l] } {
            let r = ch.autocovariance(k * period as i64 + offset as i64);
            acc += Complex64::from_polar(r, -w * k as f64);
            added = added.max(r.abs());
        }
        if added < 1e-18 {
            return acc;
        }
        l += 1;
    }
}

#[test]
fn undersampled_spectrum_matches_pilot_rate_dtft() {
    for &(alpha, m) in &[(0.5, 3usize), (0.9, 5), (0.99, 16), (0.999, 7)] {
        let ch = gm(alpha);
        for offset in 0..m {
            for i in 0..25 {
                let w = -PI + 2.0 * PI * (i as f64 + 0.37) / 25.0;
                let got = undersampled_spectrum(&ch, m, offset, w).unwrap();
                let want = dtft_of_pilot_sequence(&ch, m, offset, w);
                assert!(
                    (got - want).norm() <= 1e-9 * want.norm().max(1.0),
                    "alpha={alpha} M={m} m={offset} w={w}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
#[allow(clippy::excessive_precision)]
fn exp_log_expectation_reference_values() {
    // exp(1/g) E1(1/g) at 30 digits.
    let table = [
        (1e-6, 9.9999900000199994875e-7),
        (1e-3, 0.00099900199402388073578),
        (0.1, 0.091563333939788086559),
        (1.0, 0.59634736232319407434),
        (10.0, 2.0146425447084516791),
        (1e3, 6.337874070325487977),
        (1e6, 13.238309131365003456),
    ];
    for (g, want) in table {
        let got = exp_log_expectation(g);
        assert!(((got - want) / want).abs() < 1e-13, "g={g}: {got} vs {want}");
    }
}

#[test]
fn noncausal_matches_long_window_off_grid() {
    for &(alpha, m, pos, pt) in &[(0.97, 7usize, 3usize, 5.0), (0.999, 30, 11, 60.0), (0.6, 3, 2, 0.5)] {
        let ch = gm(alpha);
        let analytic = noncausal_mmse_aliased(&ch, m, pos, pt).unwrap();
        let window = finite_window_mmse(&ch, m, pos, pt, 400, FilterKind::Noncausal).unwrap();
        assert!((analytic - window).abs() < 1e-9, "{analytic} vs {window}");
    }
}

#[test]
fn causal_window_converges_to_kalman() {
    let ch = gm(0.995);
    let kalman = kalman_steady_state_mmse(&ch, 10, 6, 10.0);
    let mut prev = f64::INFINITY;
    for k in [1, 4, 16, 64, 256] {
        let w = finite_window_mmse(&ch, 10, 6, 10.0, k, FilterKind::Causal).unwrap();
        assert!(w <= prev + 1e-15);
        assert!(w >= kalman - 1e-12);
        prev = w;
    }
    assert!((prev - kalman).abs() < 1e-9);
}

fn symbol_rate(q: &EstimateQuality, powers: &[f64], sigma_n_sq: f64) -> f64 {
    powers
        .iter()
        .zip(q.est_var.iter().zip(&q.err_var))
        .map(|(&p, (&e, &t))| exp_log_expectation(effective_snr(p, e, t, sigma_n_sq)))
        .sum()
}

#[test]
fn three_symbol_allocation_matches_brute_force_grid() {
    let q = EstimateQuality::from_errors(
        1.0,
        vec![0.1, 0.45, 0.2],
        FilterKind::Noncausal,
        AliasMode::Considered,
    );
    for budget in [0.3, 3.0, 30.0] {
        let alloc = allocate_data_power(&q, 1.0, budget).unwrap();
        let got = symbol_rate(&q, &alloc.powers, 1.0);
        let n = 600;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=n - i {
                let p = [
                    budget * i as f64 / n as f64,
                    budget * j as f64 / n as f64,
                    budget * (n - i - j) as f64 / n as f64,
                ];
                best = best.max(symbol_rate(&q, &p, 1.0));
            }
        }
        assert!(got >= best - 1e-12, "budget {budget}: {got} < grid {best}");
        assert!((alloc.powers.iter().sum::<f64>() - budget).abs() < 1e-9 * budget);
    }
}

#[test]
fn pilot_power_matches_exhaustive_grid_at_period_two() {
    let ch = gm(0.95);
    let p = 2.0;
    let opt = optimize_pilot_power(&ch, 2, p, FilterKind::Noncausal, AliasMode::Considered).unwrap();
    let n = 100_000;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 1..n {
        let pt = 2.0 * p * i as f64 / n as f64;
        let q = estimate_quality(&ch, 2, pt, FilterKind::Noncausal, AliasMode::Considered).unwrap();
        let cfg = TrainingConfig::uniform(2, p, pt).unwrap();
        let r = rate_lower_bound(&ch, &cfg, &q).unwrap().rate_nats;
        if r > best.0 {
            best = (r, pt);
        }
    }
    assert!(opt.result.rate_nats >= best.0 - 1e-12);
    assert!((opt.pilot_power - best.1).abs() < 1e-3 * p);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn undersampled_spectrum_is_hermitian(alpha in 0.0..0.999f64, m in 1usize..40, w in 0.0..PI) {
        let ch = gm(alpha);
        let offset = m / 2;
        let a = undersampled_spectrum(&ch, m, offset, w).unwrap();
        let b = undersampled_spectrum(&ch, m, offset, -w).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn more_pilot_power_never_hurts(alpha in 0.5..0.999f64, m in 2usize..30, pt in 0.01..50.0f64) {
        let ch = gm(alpha);
        let lo = noncausal_mmse_aliased_all(&ch, m, pt).unwrap();
        let hi = noncausal_mmse_aliased_all(&ch, m, pt * 1.5).unwrap();
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!(b <= &(a + 1e-10));
        }
        let c1 = causal_mmse_no_alias(&ch, m, pt).unwrap();
        let c2 = causal_mmse_no_alias(&ch, m, pt * 1.5).unwrap();
        prop_assert!(c2 <= c1 + 1e-10);
    }

    #[test]
    fn aliased_errors_are_time_symmetric(alpha in 0.5..0.999f64, m in 2usize..30, pt in 0.01..50.0f64) {
        let e = noncausal_mmse_aliased_all(&gm(alpha), m, pt).unwrap();
        for i in 0..e.len() {
            prop_assert!((e[i] - e[e.len() - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn causal_is_no_better_than_noncausal(alpha in 0.5..0.999f64, m in 2usize..60, pt in 0.01..100.0f64) {
        let ch = gm(alpha);
        prop_assert!(causal_mmse_no_alias(&ch, m, pt).unwrap() >= noncausal_mmse_no_alias(&ch, m, pt).unwrap() - 1e-12);
    }

    #[test]
    fn jensen_and_concavity(g in 1e-6..1e6f64, t in 0.0..1.0f64) {
        let v = exp_log_expectation(g);
        // E ln(1 + gZ) <= ln(1 + g E Z)
        prop_assert!(v <= g.ln_1p() * (1.0 + 1e-14));
        prop_assert!(v >= 0.0);
        let (a, b) = (g, g * 3.0);
        let mid = exp_log_expectation(t * a + (1.0 - t) * b);
        let chord = t * exp_log_expectation(a) + (1.0 - t) * exp_log_expectation(b);
        prop_assert!(mid >= chord - 1e-12 * chord.abs());
    }

    #[test]
    fn longer_windows_never_hurt(alpha in 0.5..0.999f64, m in 2usize..20, k in 1usize..30) {
        let ch = gm(alpha);
        let offset = 1 + m / 3;
        for filter in [FilterKind::Noncausal, FilterKind::Causal] {
            let a = finite_window_mmse(&ch, m, offset.min(m - 1), 4.0, k, filter).unwrap();
            let b = finite_window_mmse(&ch, m, offset.min(m - 1), 4.0, k + 1, filter).unwrap();
            prop_assert!(b <= a + 1e-12);
        }
    }
}
