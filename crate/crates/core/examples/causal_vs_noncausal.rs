//! Optimal period and rate over SNR for the noncausal and causal filters.

use psam::optimize::sweep_snr;
use psam::{db_to_linear, AliasMode, ChannelParams, FilterKind};

fn main() -> psam::Result<()> {
    let ch = ChannelParams::new(0.99, 1.0, 1.0)?;
    let snr_db: Vec<f64> = (0..=5).map(|i| 5.0 * i as f64).collect();
    let snrs: Vec<f64> = snr_db.iter().map(|&d| db_to_linear(d)).collect();
    let nc = sweep_snr(&ch, &snrs, 2..=100, FilterKind::Noncausal, AliasMode::Ignored)?;
    let c = sweep_snr(&ch, &snrs, 2..=100, FilterKind::Causal, AliasMode::Ignored)?;
    println!("SNR(dB)  M*nc  rate_nc   M*c  rate_c");
    for ((db, a), b) in snr_db.iter().zip(&nc).zip(&c) {
        match (&a.outcome, &b.outcome) {
            (Ok(a), Ok(b)) => println!(
                "{db:6.1}  {:4}  {:.4}  {:4}  {:.4}",
                a.period, a.best.rate_bits, b.period, b.best.rate_bits
            ),
            (a, b) => println!("{db:6.1}  failed: {:?} {:?}", a.as_ref().err(), b.as_ref().err()),
        }
    }
    Ok(())
}
