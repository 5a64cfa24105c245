//! Raster approximation of the Boolean model: the vacant top-bottom crossing
//! of the raster against the exact occupied left-right crossing.

use percospec::experiments::{duality_check, Model};
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    for h in [0.1, 0.05, 0.02] {
        let r = duality_check(Model::Boolean, 4.0, h, 400, &SeedSpec::new(6, "raster-example"))?;
        println!("h = {h}: mismatch rate {:.4}", r.mismatch_rate());
    }
    Ok(())
}
