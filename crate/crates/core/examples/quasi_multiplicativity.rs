//! Ratios alpha4(r1, r2) alpha4(r2, r3) / alpha4(r1, r3) for the Boolean
//! model.

use percospec::experiments::{band_factor, quasimult_table, Model};
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let rows = quasimult_table(Model::Boolean, &[(1.0, 2.0, 8.0), (1.0, 4.0, 8.0)], 3000, &SeedSpec::new(12, "qm-example"))?;
    for q in &rows {
        println!("r2 = {}: ratio {:.3} +- {:.3}", q.r2, q.ratio.estimate, q.ratio.stderr);
    }
    println!("band factor {:.3}", band_factor(&rows));
    Ok(())
}
