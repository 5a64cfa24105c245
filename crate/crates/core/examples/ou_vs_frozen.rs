//! Covariances of the Voronoi crossing under OU and frozen dynamics.

use percospec::experiments::ou_vs_frozen_covariance;
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let rows = ou_vs_frozen_covariance(3.0, &[0.0, 0.1, 0.5], 600, &SeedSpec::new(11, "ouf-example"))?;
    for r in rows {
        println!(
            "t {:.2}: OU {:.3} +- {:.3}, frozen {:.3} +- {:.3}, pass {}",
            r.t, r.ou.estimate, r.ou.stderr, r.frozen.estimate, r.frozen.stderr, r.pass
        );
    }
    Ok(())
}
