//! Doppler spectrum of a Gauss-Markov channel, how much of it survives
//! pilot-rate sampling, and the longest period before replicas overlap.

use std::f64::consts::PI;

use psam::spectrum::{alias_safe_period, gm_psd, power_fraction, sample_undersampled};
use psam::ChannelParams;

fn main() -> psam::Result<()> {
    for alpha in [0.90, 0.95, 0.99] {
        let ch = ChannelParams::new(alpha, 1.0, 1.0)?;
        let m90 = alias_safe_period(&ch, 0.9)?;
        println!(
            "alpha={alpha}: S(0)={:.1}, S(pi)={:.2e}, 90% of power within pi/{m90} ({:.4})",
            gm_psd(&ch, 0.0),
            gm_psd(&ch, PI),
            power_fraction(&ch, PI / m90 as f64)?,
        );
    }

    // Pilot-rate spectrum of position m = 3 in a period of 8.
    let ch = ChannelParams::new(0.99, 1.0, 1.0)?;
    println!("\n    w        Re S_3(w)     Im S_3(w)");
    for s in sample_undersampled(&ch, 8, 3, 9)? {
        println!("{:+.4}  {:+.6e}  {:+.6e}", s.w, s.value.re, s.value.im);
    }
    Ok(())
}
