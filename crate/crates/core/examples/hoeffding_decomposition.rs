//! Hoeffding decomposition of the Voronoi crossing over the colorings of a
//! small configuration, and the exact identity suite.

use percospec::functional::VoronoiCrossing;
use percospec::hoeffding::{exact_suite_replica, hoeffding_decompose};
use percospec::model::sample_binomial;
use percospec::{Rect, SeedSpec};

fn main() -> percospec::Result<()> {
    let seed = SeedSpec::new(7, "hoeffding-example");
    let cfg = sample_binomial(10, &Rect::square(2.0), true, &seed)?;
    let f = VoronoiCrossing { l: 1.0, certify: false };
    let table = hoeffding_decompose(&f, &cfg)?;
    println!("energy {:.6} (a sign has energy 1)", table.energy());
    for (k, e) in table.level_energies().iter().enumerate().filter(|(_, e)| **e > 0.0) {
        println!("  level {k}: {e:.6}");
    }
    let report = exact_suite_replica(10, &seed.replica(1))?;
    println!(
        "suite: reconstruction gap {:.2e}, parseval gap {:.2e}, psi1 {:.4} <= phi1 {:.4}, exact {}",
        report.reconstruction_gap,
        report.parseval_gap,
        report.psi1,
        report.phi1,
        report.exact()
    );
    Ok(())
}
