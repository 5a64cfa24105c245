//! Log-log fit of the half-plane three-arm probability.

use percospec::experiments::half_plane_three_arm_exponent;
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let fit = half_plane_three_arm_exponent(2.0, &[4.0, 8.0, 16.0], 3000, &SeedSpec::new(13, "three-arm-example"))?;
    for (r, p) in fit.radii.iter().zip(&fit.probabilities) {
        println!("R {r:4}: {:.4} +- {:.4}", p.estimate, p.stderr);
    }
    println!("exponent {:.3} +- {:.3}", fit.exponent, fit.exponent_stderr);
    Ok(())
}
