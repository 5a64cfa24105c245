//! Command-line interface. Each subcommand reads an optional JSON config,
//! applies flag overrides, runs, and writes a CSV table with a JSON sidecar.
//!
//! Exit codes: 0 success, 2 invalid input or usage, 3 failed `--check`,
//! 1 any other failure.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::boolean::estimate::ArmDetector;
use crate::boolean::{calibrate_lambda_c, estimate_arm_probability, ArmColor, ArmEventSpec};
use crate::error::{invalid, Error, Result};
use crate::experiments::{
    band_factor, duality_check, half_plane_three_arm_exponent, instability_collapse, nested_arm_probabilities,
    noise_curve, ou_vs_frozen_covariance, quasimult_table, Alpha4Cache, Dynamics, Model,
};
use crate::hoeffding::exact_suite_replica;
use crate::io::{config_hash, num, write_outputs, Metadata, RunConfig, Table};
use crate::model::sample_poisson;
use crate::rng::SeedSpec;
use crate::spectral::spectral_intensity_integral;
use crate::stats::{try_replica_map, with_threads};
use crate::voronoi::estimate_voronoi_arm_probability;
use crate::{Region, LAMBDA_C};

#[derive(Parser, Debug)]
#[command(name = "percospec", version, about = "Spectral and pivotal processes of planar continuum percolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample Poisson configurations.
    Sample(RunArgs),
    /// Crossing probability of W_L with the duality check.
    CrossingProb(RunArgs),
    /// Arm event probabilities; with --radii, nested events and a log-log fit.
    ArmProb(RunArgs),
    /// Expected spectral size by the add-one and the pivotal-count routes.
    SpectralIntensity(RunArgs),
    /// Change probability and covariance under OU or frozen dynamics.
    NoiseCurve(RunArgs),
    /// Quasi-multiplicativity ratios of the four-arm probability.
    Quasimult(RunArgs),
    /// Change probabilities on the rescaled time axis for several sizes.
    Collapse(RunArgs),
    /// Exact Hoeffding identities on small marked configurations.
    HoeffdingCheck(RunArgs),
    /// Critical intensity of the Boolean model from crossing curves.
    CalibrateLambda(RunArgs),
    /// OU against frozen covariances for the Voronoi crossing.
    OuVsFrozen(RunArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path; the metadata goes next to it with a .json extension.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Evaluate the acceptance check and exit with 3 when it fails.
    #[arg(long)]
    check: bool,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, value_enum)]
    dynamics: Option<Dynamics>,
    /// Half side of the box W_L.
    #[arg(long)]
    l: Option<f64>,
    /// Several box sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    ls: Option<Vec<f64>>,
    /// Inner radius.
    #[arg(long)]
    r: Option<f64>,
    /// Outer radius.
    #[arg(long = "R")]
    big_r: Option<f64>,
    /// Several outer radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Middle scales, comma separated.
    #[arg(long, value_delimiter = ',')]
    r2s: Option<Vec<f64>>,
    /// Raster resolution.
    #[arg(long)]
    h: Option<f64>,
    /// Arm pattern: four, three_half, two_quarter, two, one.
    #[arg(long)]
    arms: Option<String>,
    #[arg(long)]
    intensity: Option<f64>,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',')]
    ts: Option<Vec<f64>>,
    /// Rescaled times, comma separated.
    #[arg(long, value_delimiter = ',')]
    us: Option<Vec<f64>>,
    #[arg(long)]
    alpha_replicas: Option<u64>,
    #[arg(long)]
    n_points: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> RunConfig {
        RunConfig {
            model: self.model,
            dynamics: self.dynamics,
            l: self.l,
            ls: self.ls.clone(),
            r: self.r,
            big_r: self.big_r,
            radii: self.radii.clone(),
            r2s: self.r2s.clone(),
            h: self.h,
            arms: self.arms.clone(),
            intensity: self.intensity,
            ts: self.ts.clone(),
            us: self.us.clone(),
            replicas: self.replicas,
            alpha_replicas: self.alpha_replicas,
            n_points: self.n_points,
            seed: self.seed,
            output: self.output.clone(),
            ..Default::default()
        }
    }
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Sample(a) => ("sample", a),
            Command::CrossingProb(a) => ("crossing-prob", a),
            Command::ArmProb(a) => ("arm-prob", a),
            Command::SpectralIntensity(a) => ("spectral-intensity", a),
            Command::NoiseCurve(a) => ("noise-curve", a),
            Command::Quasimult(a) => ("quasimult", a),
            Command::Collapse(a) => ("collapse", a),
            Command::HoeffdingCheck(a) => ("hoeffding-check", a),
            Command::CalibrateLambda(a) => ("calibrate-lambda", a),
            Command::OuVsFrozen(a) => ("ou-vs-frozen", a),
        }
    }
}

/// What a command produced.
struct Outcome {
    table: Table,
    check: bool,
    notes: Vec<String>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return invalid(format!("{name} must be positive, got {v}"));
    }
    Ok(v)
}

fn at_least(name: &str, v: u64, min: u64) -> Result<u64> {
    if v < min {
        return invalid(format!("{name} must be at least {min}, got {v}"));
    }
    Ok(v)
}

fn nonempty(name: &str, v: Vec<f64>) -> Result<Vec<f64>> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return invalid(format!("{name} must be a nonempty list of finite numbers"));
    }
    Ok(v)
}

fn arm_spec(kind: &str, r: f64, big_r: f64) -> Result<ArmEventSpec> {
    match kind {
        "four" => ArmEventSpec::four_arm(r, big_r),
        "three_half" => ArmEventSpec::three_arm_half(r, big_r),
        "two_quarter" => ArmEventSpec::two_arm_quarter(r, big_r),
        "two" => ArmEventSpec::two_arm(r, big_r),
        "one" => ArmEventSpec::one_arm(r, big_r, ArmColor::Occupied),
        _ => invalid(format!("unknown arm pattern {kind}")),
    }
}

/// Fills defaults and validates, then runs `command`.
fn run(command: &str, cfg: &mut RunConfig) -> Result<Outcome> {
    let seed = SeedSpec::new(cfg.seed.unwrap_or(1), command);
    let model = *cfg.model.get_or_insert(Model::Boolean);
    let mut notes = Vec::new();
    macro_rules! default {
        ($f:ident, $v:expr) => {
            cfg.$f.get_or_insert_with(|| $v).clone()
        };
    }
    match command {
        "sample" => {
            let l = positive("l", default!(l, 8.0))?;
            let n = at_least("replicas", default!(replicas, 1), 1)?;
            let intensity = positive("intensity", default!(intensity, model.intensity()))?;
            let window = Region::square(l);
            let cfgs = try_replica_map(n, |i| sample_poisson(intensity, &window, model == Model::Voronoi, &seed.replica(i)))?;
            let mut t = Table::new(&["replica", "x", "y", "mark"]);
            for (i, c) in cfgs.iter().enumerate() {
                for p in &c.points {
                    t.push(vec![i.to_string(), num(p.pos.x), num(p.pos.y), num(p.mark.value())])?;
                }
            }
            Ok(Outcome { table: t, check: true, notes })
        }
        "crossing-prob" => {
            let l = positive("l", default!(l, 8.0))?;
            let h = positive("h", default!(h, 0.05))?;
            let n = at_least("replicas", default!(replicas, 1000), 2)?;
            let d = duality_check(model, l, h, n, &seed)?;
            let mut t = Table::new(&["model", "l", "h", "n", "estimate", "stderr", "duality_mismatches"]);
            let hs = if model == Model::Boolean { num(h) } else { "exact".into() };
            t.push(vec![
                model.name().into(),
                num(l),
                hs,
                n.to_string(),
                num(d.crossing.estimate),
                num(d.crossing.stderr),
                d.mismatches.to_string(),
            ])?;
            let check = match model {
                Model::Boolean => d.mismatch_rate() < 0.01,
                Model::Voronoi => d.mismatches == 0 && (d.crossing.estimate - 0.5).abs() <= 3.0 * d.crossing.stderr,
            };
            Ok(Outcome { table: t, check, notes })
        }
        "arm-prob" => {
            let kind = default!(arms, "four".into());
            let r = positive("r", default!(r, 1.0))?;
            let n = at_least("replicas", default!(replicas, 1000), 2)?;
            let mut t = Table::new(&["model", "r", "R", "h", "n", "estimate", "stderr"]);
            let hs = cfg.h.map_or("exact".to_string(), num);
            if let Some(radii) = cfg.radii.clone() {
                let radii = nonempty("radii", radii)?;
                let specs = radii.iter().map(|&b| arm_spec(&kind, r, b)).collect::<Result<Vec<_>>>()?;
                if cfg.h.is_some() {
                    return invalid("nested arm probabilities use exact detection; drop h");
                }
                let est = nested_arm_probabilities(model, &specs, n, &seed)?;
                for (b, e) in radii.iter().zip(&est) {
                    t.push(vec![model.name().into(), num(r), num(*b), hs.clone(), n.to_string(), num(e.estimate), num(e.stderr)])?;
                }
                let mut check = true;
                if kind == "three_half" && model == Model::Boolean && radii.len() >= 2 {
                    let fit = half_plane_three_arm_exponent(r, &radii, n, &seed)?;
                    notes.push(format!("exponent {} +- {}", fit.exponent, fit.exponent_stderr));
                    check = (1.5..=2.5).contains(&fit.exponent);
                }
                return Ok(Outcome { table: t, check, notes });
            }
            let big_r = positive("R", default!(big_r, 8.0))?;
            let spec = arm_spec(&kind, r, big_r)?;
            let e = match model {
                Model::Boolean => {
                    let det = match cfg.h {
                        Some(h) => ArmDetector::Raster(positive("h", h)?),
                        None => ArmDetector::Exact,
                    };
                    estimate_arm_probability(&spec, cfg.intensity.unwrap_or(LAMBDA_C), det, n, &seed)?.result
                }
                Model::Voronoi => {
                    let v = estimate_voronoi_arm_probability(&spec, cfg.intensity.unwrap_or(1.0), n, &seed)?;
                    notes.extend(v.warning);
                    v.result
                }
            };
            t.push(vec![model.name().into(), num(r), num(big_r), hs, n.to_string(), num(e.estimate), num(e.stderr)])?;
            Ok(Outcome { table: t, check: true, notes })
        }
        "spectral-intensity" => {
            let l = positive("l", default!(l, 8.0))?;
            let n = at_least("replicas", default!(replicas, 2000), 2)?;
            let (f, bg) = model.crossing(l)?;
            let b = bg.window.bounding_rect();
            let e = spectral_intensity_integral(f.as_ref(), &b, &bg, n, &seed)?;
            let mut t = Table::new(&[
                "model", "l", "n", "uniform", "uniform_stderr", "mecke", "mecke_stderr", "discrepancy_sigma",
            ]);
            t.push(vec![
                model.name().into(),
                num(l),
                n.to_string(),
                num(e.uniform.estimate),
                num(e.uniform.stderr),
                num(e.mecke.estimate),
                num(e.mecke.stderr),
                num(e.discrepancy_sigma),
            ])?;
            let check = e.discrepancy_sigma < 3.0
                && e.uniform.relative_stderr() <= 0.05
                && e.mecke.relative_stderr() <= 0.05;
            Ok(Outcome { table: t, check, notes })
        }
        "noise-curve" => {
            let dynamics = *cfg.dynamics.get_or_insert(Dynamics::Ou);
            let l = positive("l", default!(l, 8.0))?;
            let ts = nonempty("ts", default!(ts, vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0]))?;
            let n = at_least("replicas", default!(replicas, 2000), 2)?;
            let an = default!(alpha_replicas, 5000);
            let cache = Alpha4Cache::from_env()?;
            let c = noise_curve(model, dynamics, l, &ts, n, &seed, an, &cache)?;
            let mut t = Table::new(&["model", "dynamics", "l", "t", "u", "p_change", "p_stderr", "cov", "cov_stderr"]);
            for j in 0..ts.len() {
                let u = c.u.as_ref().map_or(String::new(), |u| num(u[j]));
                t.push(vec![
                    model.name().into(),
                    dynamics.name().into(),
                    num(l),
                    num(ts[j]),
                    u,
                    num(c.p_change[j].estimate),
                    num(c.p_change[j].stderr),
                    num(c.cov[j].estimate),
                    num(c.cov[j].stderr),
                ])?;
            }
            let zero_ok = ts.iter().zip(&c.p_change).all(|(t, p)| *t != 0.0 || p.estimate == 0.0);
            Ok(Outcome { table: t, check: zero_ok && c.monotonicity_violations() == 0, notes })
        }
        "quasimult" => {
            let r1 = positive("r", default!(r, 1.0))?;
            let r3 = positive("R", default!(big_r, 32.0))?;
            let r2s = nonempty("r2s", default!(r2s, vec![4.0, 8.0]))?;
            let n = at_least("replicas", default!(replicas, 20000), 2)?;
            let triples: Vec<(f64, f64, f64)> = r2s.iter().map(|&m| (r1, m, r3)).collect();
            let rows = quasimult_table(model, &triples, n, &seed)?;
            let mut t = Table::new(&[
                "model", "r1", "r2", "r3", "n", "inner", "outer", "full", "ratio", "ratio_stderr", "independence_gap",
                "independence_gap_stderr",
            ]);
            for q in &rows {
                t.push(vec![
                    model.name().into(),
                    num(q.r1),
                    num(q.r2),
                    num(q.r3),
                    n.to_string(),
                    num(q.inner.estimate),
                    num(q.outer.estimate),
                    num(q.full.estimate),
                    num(q.ratio.estimate),
                    num(q.ratio.stderr),
                    num(q.independence_gap.estimate),
                    num(q.independence_gap.stderr),
                ])?;
            }
            let band = band_factor(&rows);
            notes.push(format!("band factor {band}"));
            let indep = rows.iter().all(|q| q.independence_gap.estimate <= 3.0 * q.independence_gap.stderr);
            Ok(Outcome { table: t, check: band <= 4.0 && indep, notes })
        }
        "collapse" => {
            let ls = nonempty("ls", default!(ls, vec![8.0, 16.0, 32.0]))?;
            let us = nonempty("us", default!(us, vec![0.01, 0.1, 1.0, 10.0]))?;
            let n = at_least("replicas", default!(replicas, 10000), 2)?;
            let an = at_least("alpha_replicas", default!(alpha_replicas, 20000), 2)?;
            let cache = Alpha4Cache::from_env()?;
            let c = instability_collapse(&ls, &us, n, an, &seed, &cache)?;
            let mut t = Table::new(&["l", "u", "t", "alpha4", "alpha4_stderr", "p_change", "p_stderr"]);
            for r in &c.rows {
                t.push(vec![
                    num(r.l),
                    num(r.u),
                    num(r.t),
                    num(r.alpha4.estimate),
                    num(r.alpha4.stderr),
                    num(r.p_change.estimate),
                    num(r.p_change.stderr),
                ])?;
            }
            for (u, s) in &c.spread {
                notes.push(format!("spread at u={u}: {s}"));
            }
            Ok(Outcome { table: t, check: c.pass(), notes })
        }
        "hoeffding-check" => {
            let k = default!(n_points, 10);
            let n = at_least("replicas", default!(replicas, 200), 1)?;
            let reps = try_replica_map(n, |i| exact_suite_replica(k, &seed.replica(i)))?;
            let mut t = Table::new(&[
                "replica", "n_points", "reconstruction_gap", "parseval_gap", "projection_gap", "alternating_gap",
                "outside_support", "psi1", "phi1", "psi2", "phi2", "one_point_defects", "psi_above_phi",
                "z_identity_gap", "z_table_violations", "bound12_violations", "bound9_colorings", "event_probability",
                "two_point_bound", "exact",
            ]);
            for (i, r) in reps.iter().enumerate() {
                t.push(vec![
                    i.to_string(),
                    r.n.to_string(),
                    num(r.reconstruction_gap),
                    num(r.parseval_gap),
                    num(r.projection_gap),
                    num(r.alternating_gap),
                    num(r.outside_support),
                    num(r.psi1),
                    num(r.phi1),
                    num(r.psi2),
                    num(r.phi2),
                    r.one_point_defects.to_string(),
                    r.psi_above_phi.to_string(),
                    num(r.z_identity_gap),
                    r.z_table_violations.to_string(),
                    r.bound12_violations.to_string(),
                    r.bound9_colorings.to_string(),
                    num(r.event_probability),
                    r.two_point_bound.to_string(),
                    r.exact().to_string(),
                ])?;
            }
            Ok(Outcome { table: t, check: reps.iter().all(|r| r.exact()), notes })
        }
        "calibrate-lambda" => {
            let sizes = nonempty("ls", default!(ls, vec![8.0, 16.0, 32.0]))?;
            let bracket = default!(bracket, (0.30, 0.42));
            let n = at_least("replicas", default!(replicas, 2000), 64)?;
            let c = calibrate_lambda_c(&sizes, bracket, n, &seed)?;
            let mut t = Table::new(&["lambda_c", "stderr", "replicas", "reference"]);
            t.push(vec![num(c.lambda_c), num(c.stderr), n.to_string(), num(LAMBDA_C)])?;
            Ok(Outcome { table: t, check: (c.lambda_c - LAMBDA_C).abs() <= 3.0 * c.stderr, notes })
        }
        "ou-vs-frozen" => {
            let l = positive("l", default!(l, 8.0))?;
            let ts = nonempty("ts", default!(ts, vec![0.0, 0.05, 0.1, 0.2, 0.5, 1.0]))?;
            let n = at_least("replicas", default!(replicas, 2000), 2)?;
            let rows = ou_vs_frozen_covariance(l, &ts, n, &seed)?;
            let mut t = Table::new(&[
                "l", "t", "n", "cov_ou", "cov_ou_stderr", "cov_frozen", "cov_frozen_stderr", "paired_difference",
                "paired_difference_stderr", "pass",
            ]);
            for r in &rows {
                t.push(vec![
                    num(l),
                    num(r.t),
                    n.to_string(),
                    num(r.ou.estimate),
                    num(r.ou.stderr),
                    num(r.frozen.estimate),
                    num(r.frozen.stderr),
                    num(r.paired_difference.estimate),
                    num(r.paired_difference.stderr),
                    r.pass.to_string(),
                ])?;
            }
            Ok(Outcome { table: t, check: rows.iter().all(|r| r.pass), notes })
        }
        other => invalid(format!("unknown command {other}")),
    }
}

fn execute(command: &str, args: &RunArgs) -> Result<bool> {
    let start = Instant::now();
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p).map_err(|e| Error::Invalid(format!("config {}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    cfg.merge(args.overrides());
    if command == "ou-vs-frozen" {
        if cfg.model == Some(Model::Boolean) {
            return invalid("ou-vs-frozen compares dynamics of the Voronoi model");
        }
        cfg.model = Some(Model::Voronoi);
    }
    if let Some(0) = args.threads {
        return invalid("thread count must be positive");
    }
    let outcome = match args.threads {
        Some(t) => with_threads(t, || run(command, &mut cfg))??,
        None => run(command, &mut cfg)?,
    };
    let output = cfg.output.clone().unwrap_or_else(|| PathBuf::from(format!("{command}.csv")));
    let meta = Metadata {
        command: command.to_string(),
        seed: cfg.seed.unwrap_or(1),
        // the output path does not change results, so it is left out of the hash
        config_hash: config_hash(&RunConfig { output: None, ..cfg.clone() })?,
        config: cfg,
        version: env!("CARGO_PKG_VERSION").to_string(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        check: args.check.then_some(outcome.check),
        notes: outcome.notes,
    };
    write_outputs(&output, &outcome.table, &meta)?;
    for n in &meta.notes {
        eprintln!("{command}: {n}");
    }
    Ok(!args.check || outcome.check)
}

/// Runs the command line and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, args) = cli.command.parts();
    match execute(name, args) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("{name}: check failed");
            3
        }
        Err(e) => {
            eprintln!("{name}: {e}");
            match e {
                Error::Invalid(_) | Error::Json(_) => 2,
                _ => 1,
            }
        }
    }
}
