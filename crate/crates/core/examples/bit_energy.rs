//! Energy per bit over SNR and the SNR at which it is smallest.

use psam::{db_to_linear, linear_to_db, minimum_bit_energy, AliasMode, ChannelParams, FilterKind};

fn main() -> psam::Result<()> {
    let ch = ChannelParams::new(0.99, 1.0, 1.0)?;
    let grid: Vec<f64> = (0..=40).map(|i| db_to_linear(-10.0 + 0.5 * i as f64)).collect();
    for filter in [FilterKind::Noncausal, FilterKind::Causal] {
        let curve = minimum_bit_energy(&ch, &grid, 2..=100, filter, AliasMode::Ignored)?;
        let best = curve.minimum();
        println!(
            "{filter:?}: minimum Eb/N0 {:.3} dB at SNR {:.1} dB (M*={}, {:.4} bits)",
            linear_to_db(best.eb_n0),
            linear_to_db(best.snr),
            best.period,
            best.rate_bits
        );
    }
    Ok(())
}
