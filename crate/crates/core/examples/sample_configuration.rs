//! Samples a marked Poisson configuration and shows that the same seed
//! reproduces it exactly.

use percospec::model::sample_poisson;
use percospec::{Region, SeedSpec};

fn main() -> percospec::Result<()> {
    let seed = SeedSpec::new(42, "sample-example");
    let window = Region::square(4.0);
    let cfg = sample_poisson(1.0, &window, true, &seed.replica(0))?;
    let again = sample_poisson(1.0, &window, true, &seed.replica(0))?;
    assert_eq!(cfg.points, again.points);
    let black = cfg.signs().iter().filter(|s| s.is_black()).count();
    println!("{} points in [-4, 4]^2 (expected 64), {black} black", cfg.len());
    for p in cfg.points.iter().take(5) {
        println!("  ({:7.3}, {:7.3}) mark {:+}", p.pos.x, p.pos.y, p.mark.value());
    }
    Ok(())
}
