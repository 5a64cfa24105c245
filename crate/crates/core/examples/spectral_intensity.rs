//! Expected spectral size of the Boolean crossing of W_4 by the uniform
//! add-one route and the pivotal-count route.

use percospec::experiments::Model;
use percospec::spectral::spectral_intensity_integral;
use percospec::SeedSpec;

fn main() -> percospec::Result<()> {
    let (f, bg) = Model::Boolean.crossing(4.0)?;
    let b = bg.window.bounding_rect();
    let e = spectral_intensity_integral(f.as_ref(), &b, &bg, 2000, &SeedSpec::new(9, "intensity-example"))?;
    println!("uniform route {:.3} +- {:.3}", e.uniform.estimate, e.uniform.stderr);
    println!("pivotal route {:.3} +- {:.3}", e.mecke.estimate, e.mecke.stderr);
    println!("discrepancy {:.2} sigma", e.discrepancy_sigma);
    Ok(())
}
