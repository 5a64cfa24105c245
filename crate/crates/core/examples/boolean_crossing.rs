//! Exact left-right crossing of the Boolean model at the critical intensity
//! and its pivotal disks.

use percospec::boolean::{crossing_pivotals, occupied_crossing};
use percospec::model::sample_poisson;
use percospec::{Rect, Region, SeedSpec, LAMBDA_C};

fn main() -> percospec::Result<()> {
    let seed = SeedSpec::new(1, "boolean-crossing-example");
    let bx = Rect::square(4.0);
    let n = 400;
    let mut crossed = 0;
    let mut pivotals = 0;
    for i in 0..n {
        let cfg = sample_poisson(LAMBDA_C, &Region::square(5.0), false, &seed.replica(i))?;
        if occupied_crossing(&cfg, &bx).crossed {
            crossed += 1;
        }
        pivotals += crossing_pivotals(&cfg, &bx).len();
    }
    println!("crossing frequency of W_4 at lambda_c: {:.3}", crossed as f64 / n as f64);
    println!("mean number of pivotal disks: {:.3}", pivotals as f64 / n as f64);
    Ok(())
}
