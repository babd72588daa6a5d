//! Pilot power and per-symbol data powers optimized together. With aliasing
//! accounted for, symbols far from both pilots are estimated worst and get
//! the least power.

use psam::optimize::optimize_pilot_and_profile;
use psam::{AliasMode, ChannelParams, FilterKind};

fn main() -> psam::Result<()> {
    let ch = ChannelParams::new(0.90, 1.0, 1.0)?;
    let opt = optimize_pilot_and_profile(&ch, 5, 1.0, FilterKind::Noncausal, AliasMode::Considered)?;
    println!("alpha=0.90, SNR=0 dB, M=5: rate {:.4} bits", opt.result.rate_bits);
    println!("position 0 (pilot): {:.6}", opt.pilot_power);
    for (m, (p, e)) in opt
        .allocation
        .powers
        .iter()
        .zip(&opt.result.quality.err_var)
        .enumerate()
    {
        println!("position {}: {p:.6}   (error variance {e:.4})", m + 1);
    }
    println!("KKT residual {:.2e}", opt.allocation.kkt_residual);
    Ok(())
}
