//! Voronoi percolation: black left-right and white top-bottom crossings are
//! complementary, and the crossing probability at p = 1/2 is one half.

use percospec::experiments::{duality_check, Model};
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let r = duality_check(Model::Voronoi, 4.0, 0.0, 1000, &SeedSpec::new(5, "voronoi-example"))?;
    println!(
        "P(black crossing of W_4) = {:.3} +- {:.3}, duality exceptions {} of {}",
        r.crossing.estimate, r.crossing.stderr, r.mismatches, r.n
    );
    Ok(())
}
