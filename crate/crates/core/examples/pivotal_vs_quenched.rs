//! Factorial moments of pivotal and quenched pivotal counts of the Voronoi
//! crossing.

use percospec::experiments::Model;
use percospec::hoeffding::pivotal_vs_quenched_factors;
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let (f, bg) = Model::Voronoi.crossing(2.0)?;
    let sampler = |s: &SeedSpec| bg.sample(s);
    let factors = pivotal_vs_quenched_factors(f.as_ref(), &[1, 2], sampler, 1000, &SeedSpec::new(8, "pq-example"))?;
    for p in factors {
        println!(
            "k = {}: pivotal {:.3}, quenched {:.3}, ratio {:.3} +- {:.3} (compare {})",
            p.k, p.pivotal.estimate, p.quenched.estimate, p.ratio.estimate, p.ratio.stderr, p.expected
        );
    }
    Ok(())
}
