//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! with a failure status if any criterion fails.

use std::time::Instant;

use percospec::cli::cli_main;
use percospec::experiments::{
    band_factor, duality_check, half_plane_three_arm_exponent, instability_collapse, mehler_slope,
    ou_vs_frozen_covariance, quasimult_table, Alpha4Cache, Model,
};
use percospec::functional::VoronoiCrossing;
use percospec::hoeffding::{exact_suite_replica, pivotal_vs_quenched_factors, two_point_comparison};
use percospec::model::sample_poisson;
use percospec::spectral::spectral_intensity_integral;
use percospec::stats::try_replica_map;
use percospec::{Point2, Region, Result, SeedSpec};

const MASTER_SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn seed(name: &str) -> SeedSpec {
    SeedSpec::new(MASTER_SEED, name)
}

fn exact_algebra() -> Result<Outcome> {
    let s = seed("exact-algebra");
    let reports = try_replica_map(200, |i| exact_suite_replica(1 + (i as usize % 12), &s.replica(i)))?;
    let failed = reports.iter().filter(|r| !r.exact()).count();
    let worst = reports.iter().map(|r| r.reconstruction_gap.max(r.parseval_gap)).fold(0.0, f64::max);
    let nine = reports.iter().map(|r| r.bound9_colorings).sum::<usize>();
    let f = VoronoiCrossing { l: 1.0, certify: false };
    let w = Region::square(2.0);
    let pairs = [((-0.2, 0.0), (0.2, 0.0)), ((-0.6, 0.0), (0.6, 0.0)), ((0.0, -0.5), (0.0, 0.5)), ((-0.5, -0.5), (0.5, 0.5))];
    let mut annealed_ok = true;
    let mut worst_margin = f64::NEG_INFINITY;
    for (k, (x, y)) in pairs.into_iter().enumerate() {
        let sampler = |t: &SeedSpec| sample_poisson(1.0, &w, true, t);
        let c = two_point_comparison(&f, Point2::new(x.0, x.1), Point2::new(y.0, y.1), sampler, 20_000, &s.child(&format!("pair{k}")))?;
        annealed_ok &= c.holds() && c.bound12_violations == 0;
        worst_margin = worst_margin.max(c.margin.estimate / c.margin.stderr);
    }
    Ok(Outcome {
        pass: failed == 0 && annealed_ok,
        detail: format!(
            "{failed} of 200 replicas inexact, worst reconstruction/Parseval gap {worst:.1e}; two-point comparison averaged over backgrounds holds at 4 pairs (largest margin {worst_margin:.1} se), per-coloring nine-fold form broken on {nine} colorings"
        ),
    })
}

fn pivotal_factor() -> Result<Outcome> {
    let (f, bg) = Model::Voronoi.crossing(4.0)?;
    let p = pivotal_vs_quenched_factors(f.as_ref(), &[1, 2], |s: &SeedSpec| bg.sample(s), 20_000, &seed("pivotal-factor"))?;
    let pass = p.iter().all(|q| q.sigma() <= 3.0);
    let detail = p
        .iter()
        .map(|q| format!("k={} ratio {:.4} +- {:.4} vs {} ({:.1} sigma)", q.k, q.ratio.estimate, q.ratio.stderr, q.expected, q.sigma()))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome { pass, detail })
}

fn intensity_identity() -> Result<Outcome> {
    let (f, bg) = Model::Boolean.crossing(8.0)?;
    let e = spectral_intensity_integral(f.as_ref(), &bg.window.bounding_rect(), &bg, 4000, &seed("intensity"))?;
    let pass = e.discrepancy_sigma <= 3.0 && e.uniform.relative_stderr() <= 0.05 && e.mecke.relative_stderr() <= 0.05;
    Ok(Outcome {
        pass,
        detail: format!(
            "add-one {:.3} +- {:.3}, pivotal count {:.3} +- {:.3}, {:.2} sigma apart",
            e.uniform.estimate, e.uniform.stderr, e.mecke.estimate, e.mecke.stderr, e.discrepancy_sigma
        ),
    })
}

fn mehler() -> Result<Outcome> {
    let m = mehler_slope(8.0, 0.1, 4000, 16_000, &seed("mehler"))?;
    Ok(Outcome {
        pass: m.pass,
        detail: format!("ratio {:.3} +- {:.3} at t* = {:.5}", m.ratio.estimate, m.ratio.stderr, m.t_star),
    })
}

fn duality() -> Result<Outcome> {
    let b = duality_check(Model::Boolean, 8.0, 0.05, 10_000, &seed("duality-boolean"))?;
    let v8 = duality_check(Model::Voronoi, 8.0, 0.0, 10_000, &seed("duality-voronoi-8"))?;
    let v16 = duality_check(Model::Voronoi, 16.0, 0.0, 10_000, &seed("duality-voronoi-16"))?;
    let half = |c: &percospec::stats::EstimatorResult| (c.estimate - 0.5).abs() <= 3.0 * c.stderr;
    let pass = b.mismatch_rate() < 0.01 && v8.mismatches == 0 && v16.mismatches == 0 && half(&v8.crossing) && half(&v16.crossing);
    Ok(Outcome {
        pass,
        detail: format!(
            "Boolean mismatch rate {:.4}; Voronoi exceptions {} and {}; Voronoi P(crossing) {:.4} +- {:.4} (L=8), {:.4} +- {:.4} (L=16)",
            b.mismatch_rate(),
            v8.mismatches,
            v16.mismatches,
            v8.crossing.estimate,
            v8.crossing.stderr,
            v16.crossing.estimate,
            v16.crossing.stderr
        ),
    })
}

fn three_arm() -> Result<Outcome> {
    let fit = half_plane_three_arm_exponent(2.0, &[8.0, 16.0, 32.0, 64.0], 100_000, &seed("three-arm"))?;
    Ok(Outcome {
        pass: (1.5..=2.5).contains(&fit.exponent),
        detail: format!("exponent {:.3} +- {:.3}", fit.exponent, fit.exponent_stderr),
    })
}

fn quasi_multiplicativity() -> Result<Outcome> {
    let rows = quasimult_table(Model::Boolean, &[(1.0, 4.0, 32.0), (1.0, 8.0, 32.0)], 20_000, &seed("quasimult"))?;
    let band = band_factor(&rows);
    let detail = rows
        .iter()
        .map(|q| format!("r2={} ratio {:.3} +- {:.3}", q.r2, q.ratio.estimate, q.ratio.stderr))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome { pass: band <= 4.0, detail: format!("{detail}; band factor {band:.3}") })
}

fn instability() -> Result<Outcome> {
    let c = instability_collapse(
        &[8.0, 16.0, 32.0],
        &[0.01, 0.1, 1.0, 10.0],
        10_000,
        20_000,
        &seed("collapse"),
        &Alpha4Cache::in_memory(),
    )?;
    let at = |u: f64| {
        c.rows.iter().filter(|r| r.u == u).map(|r| format!("{:.3}", r.p_change.estimate)).collect::<Vec<_>>().join("/")
    };
    let spread = c.spread.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    Ok(Outcome {
        pass: c.pass(),
        detail: format!("P(change) at u=0.01: {}, at u=10: {}, largest spread {spread:.3}", at(0.01), at(10.0)),
    })
}

fn ou_vs_frozen() -> Result<Outcome> {
    let rows = ou_vs_frozen_covariance(8.0, &[0.0, 0.05, 0.1, 0.2, 0.5, 1.0], 4000, &seed("ou-vs-frozen"))?;
    let failed: Vec<f64> = rows.iter().filter(|r| !r.pass).map(|r| r.t).collect();
    let worst = rows
        .iter()
        .map(|r| (r.ou.estimate - r.frozen.estimate) / r.ou.stderr.hypot(r.frozen.stderr).max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        pass: failed.is_empty(),
        detail: format!("failing times {failed:?}, largest (OU - frozen)/se {worst:.2}"),
    })
}

fn determinism() -> Result<Outcome> {
    let dir = std::env::temp_dir().join(format!("percospec-acceptance-{}", std::process::id()));
    let commands: [&[&str]; 4] = [
        &["hoeffding-check", "--n-points", "12", "--replicas", "200"],
        &["ou-vs-frozen", "--l", "4", "--replicas", "300"],
        &["quasimult", "--replicas", "2000"],
        &["spectral-intensity", "--l", "4", "--replicas", "500"],
    ];
    let mut differing = Vec::new();
    for (k, c) in commands.iter().enumerate() {
        let mut files = Vec::new();
        for threads in ["1", "2"] {
            let out = dir.join(format!("{k}-{threads}.csv"));
            let mut argv = vec!["percospec"];
            argv.extend_from_slice(c);
            let o = out.to_str().unwrap().to_string();
            argv.extend(["--threads", threads, "--output", &o]);
            if cli_main(argv) != 0 {
                return Err(percospec::Error::Invalid(format!("{} did not run", c[0])));
            }
            files.push(std::fs::read(&out)?);
        }
        if files[0] != files[1] {
            differing.push(c[0]);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(Outcome {
        pass: differing.is_empty(),
        detail: format!("{} commands rerun at 1 and 2 threads, differing: {differing:?}", commands.len()),
    })
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("exact algebra suite", exact_algebra),
        ("pivotal/quenched factor", pivotal_factor),
        ("intensity identity", intensity_identity),
        ("Mehler slope", mehler),
        ("duality cross-checks", duality),
        ("half-plane three-arm exponent", three_arm),
        ("quasi-multiplicativity", quasi_multiplicativity),
        ("instability trend", instability),
        ("OU vs frozen", ou_vs_frozen),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("{} {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
