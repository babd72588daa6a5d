//! Simulates a fading trace with pilots and measures the error of a
//! finite-window interpolator against its exact value.

use psam::oracle::{empirical_mmse, finite_window_mmse, simulate_channel};
use psam::{ChannelParams, FilterKind};

fn main() -> psam::Result<()> {
    let ch = ChannelParams::new(0.99, 1.0, 1.0)?;
    let trace = simulate_channel(&ch, 200_000, 16, 16.0, 7)?;
    println!(
        "{} symbols, sample variance {:.4}, lag-1 correlation {:.4}",
        trace.len(),
        trace.empirical_variance(),
        trace.empirical_autocovariance(1) / trace.empirical_variance()
    );
    for filter in [FilterKind::Noncausal, FilterKind::Causal] {
        let exact = finite_window_mmse(&ch, 16, 8, 16.0, 20, filter)?;
        let sample = empirical_mmse(&trace, 8, 20, filter)?;
        println!(
            "{filter:?}: exact {exact:.5}, simulated {:.5} +- {:.5} ({} events)",
            sample.mean, sample.standard_error, sample.events
        );
    }
    Ok(())
}
