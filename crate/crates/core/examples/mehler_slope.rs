//! Small-time change probability of the Boolean crossing against the
//! expected spectral size.

use percospec::experiments::mehler_slope;
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let m = mehler_slope(4.0, 0.1, 1000, 4000, &SeedSpec::new(15, "mehler-example"))?;
    println!("E|gamma| {:.3} +- {:.3}, t* {:.5}", m.gamma.estimate, m.gamma.stderr, m.t_star);
    println!("ratio {:.3} +- {:.3}, pass {}", m.ratio.estimate, m.ratio.stderr, m.pass);
    Ok(())
}
