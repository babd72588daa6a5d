//! Exponential integral helpers.

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^x E_1(x)` for `x > 0`.
///
/// Power series below `x = 1`, continued fraction (modified Lentz) above.
pub fn scaled_exp1(x: f64) -> f64 {
    assert!(x > 0.0, "scaled_exp1 needs a positive argument, got {x}");
    if x.is_infinite() {
        return 0.0;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let contrib = term / kf;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        let e1 = -EULER_GAMMA - x.ln() - sum;
        return x.exp() * e1;
    }
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `E[ln(1 + gamma Z)]` for `Z` a unit-mean exponential variable, in nats.
///
/// Equals `e^{1/gamma} E_1(1/gamma)`; zero at `gamma = 0`.
pub fn exp_log_expectation(gamma: f64) -> f64 {
    assert!(
        gamma >= 0.0,
        "exp_log_expectation needs gamma >= 0, got {gamma}"
    );
    if gamma == 0.0 {
        return 0.0;
    }
    if gamma.is_infinite() {
        return f64::INFINITY;
    }
    if gamma < 1e-9 {
        // gamma - gamma^2 + 2 gamma^3 - ...
        return gamma * (1.0 - gamma * (1.0 - 2.0 * gamma));
    }
    scaled_exp1(1.0 / gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // e * E1(1) = 0.596347362323194...
        assert!((scaled_exp1(1.0) - 0.596_347_362_323_194_1).abs() < 1e-14);
        // E1(0.5) = 0.5597735947761608
        assert!((scaled_exp1(0.5) - 0.5f64.exp() * 0.559_773_594_776_160_8).abs() < 1e-14);
        // E1(5) = 0.001148295591275325
        assert!((scaled_exp1(5.0) - 5f64.exp() * 0.001_148_295_591_275_325).abs() < 1e-13);
    }

    #[test]
    fn branches_agree_at_switch() {
        let below = scaled_exp1(1.0 - 1e-12);
        let above = scaled_exp1(1.0 + 1e-12);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn small_and_large_gamma() {
        assert_eq!(exp_log_expectation(0.0), 0.0);
        let g = 1e-6;
        assert!((exp_log_expectation(g) / g - 1.0).abs() < 1e-3);
        let g = 1e-10;
        assert!((exp_log_expectation(g) / g - 1.0).abs() < 1e-9);
        // ln(gamma) - Euler gamma for large gamma
        let g = 1e12;
        assert!((exp_log_expectation(g) - (g.ln() - EULER_GAMMA)).abs() < 1e-9);
    }
}
