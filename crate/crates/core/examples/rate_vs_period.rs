//! Achievable rate against the training period at several SNRs, with the
//! pilot power optimized for every period.

use psam::{db_to_linear, optimize_period, AliasMode, ChannelParams, FilterKind};

fn main() -> psam::Result<()> {
    let ch = ChannelParams::new(0.99, 1.0, 1.0)?;
    for alias in [AliasMode::Considered, AliasMode::Ignored] {
        println!("noncausal filter, aliasing {alias:?}");
        for snr_db in [0.0, 5.0, 10.0, 20.0] {
            let p = db_to_linear(snr_db) * ch.sigma_n_sq;
            let opt = optimize_period(&ch, p, 2..=100, FilterKind::Noncausal, alias)?;
            println!(
                "  {snr_db:>4} dB: M*={:3}  P_t*={:8.3}  rate={:.4} bits",
                opt.period, opt.pilot_power, opt.best.rate_bits
            );
        }
    }
    Ok(())
}
