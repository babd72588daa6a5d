//! Runs the analytic-versus-oracle suite and prints a summary per group.

use std::collections::BTreeMap;

use psam::validate::run_validation;

fn main() -> psam::Result<()> {
    let cases = run_validation(42)?;
    let mut groups: BTreeMap<String, (usize, usize, f64)> = BTreeMap::new();
    for c in &cases {
        let g = groups.entry(format!("{:?}", c.group)).or_default();
        g.0 += 1;
        g.1 += c.pass as usize;
        g.2 = g.2.max(c.abs_diff);
    }
    for (name, (n, ok, worst)) in groups {
        println!("{name:16} {ok}/{n} pass, largest difference {worst:.3e}");
    }
    for c in cases.iter().filter(|c| !c.pass) {
        println!("FAIL {}: {:.6} vs {:.6}", c.label, c.analytic, c.oracle);
    }
    Ok(())
}
