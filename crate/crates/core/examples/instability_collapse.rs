//! Change probabilities of the Boolean crossing on the rescaled time axis
//! for several box sizes.

use percospec::experiments::{instability_collapse, Alpha4Cache};
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let cache = Alpha4Cache::in_memory();
    let c = instability_collapse(&[2.0, 4.0, 8.0], &[0.1, 10.0], 500, 2000, &SeedSpec::new(14, "collapse-example"), &cache)?;
    for r in &c.rows {
        println!("L {:3} u {:5}: t {:.4}, P(change) {:.3}", r.l, r.u, r.t, r.p_change.estimate);
    }
    println!("spread {:?}", c.spread);
    Ok(())
}
