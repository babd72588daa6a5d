//! Noncausal interpolation error for a spectrum supplied as a closure: a
//! flat band-limited spectrum, which suffers no aliasing while the pilot
//! rate covers its band.

use std::f64::consts::PI;

use psam::spectrum::SpectrumFn;
use psam::wiener::noncausal_mmse_aliased_with;

fn main() -> psam::Result<()> {
    let band = PI / 8.0;
    let flat = SpectrumFn::new(move |w: f64| if w.abs() <= band { PI / band } else { 0.0 })?;
    for period in [4, 8, 12] {
        let errs = noncausal_mmse_aliased_with(&flat, 1.0, period, period as f64)?;
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        println!("M={period:2}: mean error {mean:.5}, worst {:.5}", errs.iter().cloned().fold(0.0, f64::max));
    }
    Ok(())
}
