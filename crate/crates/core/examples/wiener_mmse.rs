//! Channel-estimation error at each data position of a training period,
//! for the noncausal filter with and without spectral aliasing and for the
//! causal filter.

use psam::wiener::{
    causal_mmse_no_alias, gm_canonical_factors, noncausal_mmse_aliased_all,
    noncausal_mmse_no_alias,
};
use psam::ChannelParams;

fn main() -> psam::Result<()> {
    let ch = ChannelParams::new(0.99, 1.0, 1.0)?;
    let (period, pilot_power) = (16, 16.0);

    let aliased = noncausal_mmse_aliased_all(&ch, period, pilot_power)?;
    let ignored = noncausal_mmse_no_alias(&ch, period, pilot_power)?;
    let causal = causal_mmse_no_alias(&ch, period, pilot_power)?;
    let f = gm_canonical_factors(&ch, period, pilot_power)?;

    println!("alpha=0.99, M={period}, P_t={pilot_power}");
    println!("canonical factors: r_f={:.6} u={:.6}", f.r_f, f.u);
    println!(" m   aliased    no-alias");
    for (m, e) in aliased.iter().enumerate() {
        println!("{:2}   {e:.6}   {ignored:.6}", m + 1);
    }
    let mean = aliased.iter().sum::<f64>() / aliased.len() as f64;
    println!("mean {mean:.6}   causal (no alias) {causal:.6}");
    Ok(())
}
