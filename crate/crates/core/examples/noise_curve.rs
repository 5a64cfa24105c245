//! Change probability and covariance of the Boolean crossing under OU
//! dynamics, with the rescaled time axis.

use percospec::experiments::{noise_curve, Alpha4Cache, Dynamics, Model};
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let ts = [0.0, 0.05, 0.2, 1.0];
    let cache = Alpha4Cache::in_memory();
    let c = noise_curve(Model::Boolean, Dynamics::Ou, 4.0, &ts, 1000, &SeedSpec::new(10, "noise-example"), 2000, &cache)?;
    let u = c.u.clone().unwrap_or_default();
    for (j, t) in ts.iter().enumerate() {
        println!(
            "t {t:5.2}  u {:8.3}  P(change) {:.3}  cov {:.3}",
            u.get(j).copied().unwrap_or(f64::NAN),
            c.p_change[j].estimate,
            c.cov[j].estimate
        );
    }
    println!("monotonicity violations: {}", c.monotonicity_violations());
    Ok(())
}
