//! Four-arm probabilities of the Boolean model with exact and raster
//! detection, and of Voronoi percolation.

use percospec::boolean::estimate::ArmDetector;
use percospec::boolean::{estimate_arm_probability, ArmEventSpec};
use percospec::voronoi::estimate_voronoi_arm_probability;
use percospec::{SeedSpec, LAMBDA_C};

fn main() -> percospec::Result<()> {
    let seed = SeedSpec::new(3, "arm-example");
    for big_r in [4.0, 8.0] {
        let spec = ArmEventSpec::four_arm(1.0, big_r)?;
        let exact = estimate_arm_probability(&spec, LAMBDA_C, ArmDetector::Exact, 2000, &seed)?.result;
        let raster = estimate_arm_probability(&spec, LAMBDA_C, ArmDetector::Raster(0.05), 2000, &seed)?.result;
        println!(
            "Boolean alpha4(1, {big_r}): exact {:.4} +- {:.4}, raster {:.4} +- {:.4}",
            exact.estimate, exact.stderr, raster.estimate, raster.stderr
        );
    }
    let spec = ArmEventSpec::four_arm(2.0, 8.0)?;
    let v = estimate_voronoi_arm_probability(&spec, 1.0, 1000, &seed)?;
    println!("Voronoi alpha4(2, 8): {:.4} +- {:.4}", v.result.estimate, v.result.stderr);
    Ok(())
}
