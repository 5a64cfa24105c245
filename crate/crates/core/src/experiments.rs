//! Experiment drivers: noise curves under both dynamics, the covariance
//! comparison, quasi-multiplicativity, the half-plane three-arm exponent, the
//! collapse of instability curves and the small-time slope of the noise
//! curve. Four-arm probabilities used to rescale time are cached.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::boolean::estimate::ARM_PADDING;
use crate::boolean::{arm_event_exact, ArmEventSpec};
use crate::difference::pivotal_points;
use crate::dynamics::{evolve_frozen, evolve_ou};
use crate::error::{invalid, Error, Result};
use crate::functional::{BooleanCrossing, Functional, VoronoiCrossing};
use crate::geometry::{Rect, Region};
use crate::model::{sample_poisson, voronoi_padding, PointConfiguration};
use crate::rng::SeedSpec;
use crate::spectral::Background;
use crate::stats::{batch_means, batch_stderr, covariance, mean, try_replica_map, weighted_slope, EstimatorResult};
use crate::voronoi::{voronoi_arm_event, VoronoiTessellation};
use crate::LAMBDA_C;

/// Environment variable naming the directory of the persistent cache.
pub const CACHE_ENV: &str = "PERCOSPEC_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Boolean,
    Voronoi,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Boolean => "boolean",
            Model::Voronoi => "voronoi",
        }
    }

    /// Default intensity: critical for the Boolean model, 1 for Voronoi.
    pub fn intensity(self) -> f64 {
        match self {
            Model::Boolean => LAMBDA_C,
            Model::Voronoi => 1.0,
        }
    }

    /// Margin sampled around a box so that the box is decided exactly.
    pub fn padding(self) -> f64 {
        match self {
            Model::Boolean => 1.0,
            Model::Voronoi => voronoi_padding(1.0),
        }
    }

    /// The crossing functional of `W_L` and the background it is evaluated on.
    pub fn crossing(self, l: f64) -> Result<(Box<dyn Functional>, Background)> {
        if !(l > 0.0 && l.is_finite()) {
            return invalid("box size must be positive");
        }
        let window = Region::square(l + self.padding());
        Ok(match self {
            Model::Boolean => (Box::new(BooleanCrossing { l }), Background::new(LAMBDA_C, window, false)?),
            Model::Voronoi => (Box::new(VoronoiCrossing { l, certify: true }), Background::new(1.0, window, true)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Ou,
    Frozen,
}

impl Dynamics {
    pub fn name(self) -> &'static str {
        match self {
            Dynamics::Ou => "ou",
            Dynamics::Frozen => "frozen",
        }
    }
}

/// Identity of a cached four-arm probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alpha4Key {
    pub model: Model,
    pub intensity: f64,
    pub r: f64,
    pub big_r: f64,
    /// Raster resolution; `None` for exact detection.
    pub h: Option<f64>,
    pub seed_family: String,
    pub replicas: u64,
}

impl Alpha4Key {
    pub fn id(&self) -> String {
        let h = self.h.map_or("exact".to_string(), |h| h.to_string());
        format!(
            "{}|{}|{}|{}|{}|{}|{}",
            self.model.name(),
            self.intensity,
            self.r,
            self.big_r,
            h,
            self.seed_family,
            self.replicas
        )
    }
}

/// Four-arm probabilities keyed by [`Alpha4Key`], kept in memory and, when a
/// directory is set, in `alpha4.json` there.
#[derive(Debug, Default)]
pub struct Alpha4Cache {
    dir: Option<PathBuf>,
    entries: Mutex<BTreeMap<String, EstimatorResult>>,
}

impl Alpha4Cache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Cache persisted in `dir`, loading existing entries.
    pub fn at(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let path = dir.join("alpha4.json");
        let entries = if path.exists() {
            serde_json::from_str(&std::fs::read_to_string(&path)?)?
        } else {
            BTreeMap::new()
        };
        Ok(Alpha4Cache { dir: Some(dir), entries: Mutex::new(entries) })
    }

    /// Persistent when [`CACHE_ENV`] is set, in memory otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::at(PathBuf::from(d)),
            _ => Ok(Self::in_memory()),
        }
    }

    pub fn get(&self, key: &Alpha4Key) -> Option<EstimatorResult> {
        self.entries.lock().unwrap().get(&key.id()).copied()
    }

    pub fn insert(&self, key: &Alpha4Key, v: EstimatorResult) -> Result<()> {
        let mut e = self.entries.lock().unwrap();
        e.insert(key.id(), v);
        if let Some(dir) = &self.dir {
            std::fs::create_dir_all(dir)?;
            let tmp = dir.join("alpha4.json.tmp");
            std::fs::write(&tmp, serde_json::to_string_pretty(&*e)?)?;
            std::fs::rename(tmp, dir.join("alpha4.json"))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn seed_family(seed: &SeedSpec) -> String {
    format!("{}:{}", seed.master_seed, seed.experiment)
}

/// Points of `cfg` inside `r`.
fn restrict(cfg: &PointConfiguration, r: &Rect) -> PointConfiguration {
    let mut c = cfg.clone();
    c.points.retain(|p| r.contains(p.pos));
    c
}

/// Indicators of nested arm events `specs[0] ⊇ specs[1] ⊇ ...` on one
/// configuration, stopping at the first failure.
fn nested_indicators(model: Model, cfg: &PointConfiguration, specs: &[ArmEventSpec]) -> Result<Vec<bool>> {
    let mut out = vec![false; specs.len()];
    let tess = match model {
        Model::Voronoi => Some(VoronoiTessellation::build(cfg)?),
        Model::Boolean => None,
    };
    for (k, s) in specs.iter().enumerate() {
        let hit = match &tess {
            Some(t) => voronoi_arm_event(t, s)?,
            None => arm_event_exact(&restrict(cfg, &s.region.bounding_rect().inflate(ARM_PADDING)), s),
        };
        if !hit {
            break;
        }
        out[k] = true;
    }
    Ok(out)
}

fn arm_window(model: Model, specs: &[ArmEventSpec]) -> Region {
    let pad = match model {
        Model::Boolean => ARM_PADDING,
        Model::Voronoi => voronoi_padding(1.0),
    };
    let mut b = specs[0].region.bounding_rect();
    for s in specs {
        let r = s.region.bounding_rect();
        b = Rect::new(b.x0.min(r.x0), b.y0.min(r.y0), b.x1.max(r.x1), b.y1.max(r.y1));
    }
    Region::Rect(b.inflate(pad))
}

/// Probabilities of nested arm events, sharing replicas sampled on one window
/// covering the largest. Each event is assumed to contain the next one, so
/// later events are only checked while earlier ones hold.
pub fn nested_arm_probabilities(
    model: Model,
    specs: &[ArmEventSpec],
    n: u64,
    seed: &SeedSpec,
) -> Result<Vec<EstimatorResult>> {
    if specs.is_empty() || n < 2 {
        return invalid("need at least one event and two replicas");
    }
    let window = arm_window(model, specs);
    let hits = try_replica_map(n, |i| {
        let cfg = sample_poisson(model.intensity(), &window, model == Model::Voronoi, &seed.replica(i))?;
        nested_indicators(model, &cfg, specs)
    })?;
    Ok((0..specs.len())
        .map(|k| {
            let v: Vec<f64> = hits.iter().map(|h| h[k] as u8 as f64).collect();
            crate::stats::bernoulli(v.iter().filter(|&&x| x == 1.0).count(), v.len())
        })
        .collect())
}

/// `alpha4(r, R)` for each `R` in `radii` (increasing), served from the cache
/// when present and estimated with shared nested replicas otherwise.
pub fn alpha4_nested(
    model: Model,
    r: f64,
    radii: &[f64],
    n: u64,
    seed: &SeedSpec,
    cache: &Alpha4Cache,
) -> Result<Vec<EstimatorResult>> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("radii must be increasing");
    }
    let key = |big_r: f64| Alpha4Key {
        model,
        intensity: model.intensity(),
        r,
        big_r,
        h: None,
        seed_family: seed_family(seed),
        replicas: n,
    };
    let cached: Vec<Option<EstimatorResult>> = radii.iter().map(|&b| cache.get(&key(b))).collect();
    if cached.iter().all(Option::is_some) {
        return Ok(cached.into_iter().map(Option::unwrap).collect());
    }
    let specs = radii.iter().map(|&b| ArmEventSpec::four_arm(r, b)).collect::<Result<Vec<_>>>()?;
    let est = nested_arm_probabilities(model, &specs, n, seed)?;
    for (&b, e) in radii.iter().zip(&est) {
        cache.insert(&key(b), *e)?;
    }
    Ok(est)
}

/// Probability that the crossing changes and covariance of the crossing with
/// its evolution, along a grid of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCurve {
    pub model: Model,
    pub dynamics: Dynamics,
    pub l: f64,
    pub ts: Vec<f64>,
    pub p_change: Vec<EstimatorResult>,
    pub cov: Vec<EstimatorResult>,
    /// `t * L^2 * alpha4(1, L)`, when the four-arm probability is known.
    pub u: Option<Vec<f64>>,
    pub alpha4: Option<EstimatorResult>,
    /// Variance of the crossing at time 0.
    pub variance: EstimatorResult,
    /// Functional evaluations made.
    pub evaluations: u64,
}

impl NoiseCurve {
    /// Grid points where the change probability drops below the previous
    /// one by more than three combined standard errors.
    pub fn monotonicity_violations(&self) -> usize {
        self.p_change
            .windows(2)
            .filter(|w| w[0].estimate - w[1].estimate > 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt())
            .count()
    }
}

/// Per-replica values `f(eta)` and `f(eta^t)` for every `t`, with `eta^t`
/// coupled across the grid. `f(eta)` is evaluated once per replica.
pub fn paired_values<F: Functional + ?Sized>(
    f: &F,
    bg: &Background,
    dynamics: Dynamics,
    ts: &[f64],
    n: u64,
    seed: &SeedSpec,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if dynamics == Dynamics::Frozen && !bg.marked {
        return invalid("frozen dynamics needs a marked model");
    }
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return invalid("times must be finite and nonnegative");
    }
    try_replica_map(n, |i| {
        let s = seed.replica(i);
        let base = bg.sample(&s)?;
        let ds = s.child("dynamics");
        match dynamics {
            Dynamics::Ou => {
                let f0 = f.eval(&base)?;
                let ft = ts
                    .iter()
                    .map(|&t| f.eval(&evolve_ou(&base, t, bg.intensity, &ds)?.evolved))
                    .collect::<Result<Vec<_>>>()?;
                Ok((f0, ft))
            }
            Dynamics::Frozen => {
                let mut ev = f.mark_evaluator(&base)?;
                let f0 = ev(&base.signs())?;
                let ft = ts
                    .iter()
                    .map(|&t| ev(&evolve_frozen(&base, t, &ds)?.evolved.signs()))
                    .collect::<Result<Vec<_>>>()?;
                Ok((f0, ft))
            }
        }
    })
}

fn curve_stats(pairs: &[(f64, Vec<f64>)], k: usize) -> (Vec<EstimatorResult>, Vec<EstimatorResult>) {
    let f0: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut p = Vec::with_capacity(k);
    let mut c = Vec::with_capacity(k);
    for j in 0..k {
        let ft: Vec<f64> = pairs.iter().map(|q| q.1[j]).collect();
        let ch: Vec<f64> = f0.iter().zip(&ft).map(|(a, b)| (a != b) as u8 as f64).collect();
        p.push(batch_means(&ch));
        c.push(covariance(&f0, &ft));
    }
    (p, c)
}

/// Noise curve of a given functional; see [`noise_curve`].
pub fn noise_curve_of<F: Functional + ?Sized>(
    f: &F,
    bg: &Background,
    model: Model,
    dynamics: Dynamics,
    l: f64,
    ts: &[f64],
    n: u64,
    seed: &SeedSpec,
    alpha4: Option<EstimatorResult>,
) -> Result<NoiseCurve> {
    if n < 2 {
        return invalid("at least two replicas are needed");
    }
    let pairs = paired_values(f, bg, dynamics, ts, n, seed)?;
    let (p_change, cov) = curve_stats(&pairs, ts.len());
    let f0: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let variance = covariance(&f0, &f0);
    let u = alpha4.map(|a| ts.iter().map(|t| t * l * l * a.estimate).collect());
    Ok(NoiseCurve {
        model,
        dynamics,
        l,
        ts: ts.to_vec(),
        p_change,
        cov,
        u,
        alpha4,
        variance,
        evaluations: n * (1 + ts.len() as u64),
    })
}

/// Noise curve of the crossing of `W_L` for the given model and dynamics,
/// with the time axis rescaled by `L^2 alpha4(1, L)` estimated from
/// `alpha_replicas` replicas when positive.
pub fn noise_curve(
    model: Model,
    dynamics: Dynamics,
    l: f64,
    ts: &[f64],
    n: u64,
    seed: &SeedSpec,
    alpha_replicas: u64,
    cache: &Alpha4Cache,
) -> Result<NoiseCurve> {
    let (f, bg) = model.crossing(l)?;
    let alpha = if alpha_replicas > 0 {
        Some(alpha4_nested(model, 1.0, &[l], alpha_replicas, &seed.child("alpha4"), cache)?[0])
    } else {
        None
    };
    noise_curve_of(f.as_ref(), &bg, model, dynamics, l, ts, n, &seed.child("curve"), alpha)
}

/// One grid time of [`ou_vs_frozen_covariance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub t: f64,
    pub ou: EstimatorResult,
    pub frozen: EstimatorResult,
    /// `cov_ou - cov_frozen` from the paired replicas.
    pub paired_difference: EstimatorResult,
    /// `cov_ou <= cov_frozen + 3 sqrt(se_ou^2 + se_frozen^2)`.
    pub pass: bool,
}

/// Covariances of the Voronoi crossing of `W_L` with its evolution under
/// both dynamics, on shared base configurations.
pub fn ou_vs_frozen_covariance(l: f64, ts: &[f64], n: u64, seed: &SeedSpec) -> Result<Vec<CovarianceRow>> {
    if n < 2 {
        return invalid("at least two replicas are needed");
    }
    let (f, bg) = Model::Voronoi.crossing(l)?;
    let ou = paired_values(f.as_ref(), &bg, Dynamics::Ou, ts, n, seed)?;
    let fr = paired_values(f.as_ref(), &bg, Dynamics::Frozen, ts, n, seed)?;
    let f0: Vec<f64> = ou.iter().map(|p| p.0).collect();
    debug_assert!(fr.iter().zip(&ou).all(|(a, b)| a.0 == b.0));
    let (_, cov_ou) = curve_stats(&ou, ts.len());
    let (_, cov_fr) = curve_stats(&fr, ts.len());
    Ok(ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let d: Vec<f64> = ou.iter().zip(&fr).map(|(a, b)| a.1[j] - b.1[j]).collect();
            let paired = covariance(&f0, &d);
            let (a, b) = (cov_ou[j], cov_fr[j]);
            let pass = a.estimate - b.estimate <= 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            CovarianceRow { t, ou: a, frozen: b, paired_difference: paired, pass }
        })
        .collect())
}

/// One scale triple of [`quasimult_table`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasimultRow {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub inner: EstimatorResult,
    pub outer: EstimatorResult,
    pub full: EstimatorResult,
    /// `alpha(r1, r2) alpha(r2, r3) / alpha(r1, r3)`.
    pub ratio: EstimatorResult,
    /// `alpha(r1, r3) - alpha(r1, r2 - 1) alpha(r2, r3)`, at most zero up to
    /// noise because the two outer events are independent.
    pub independence_gap: EstimatorResult,
}

/// Quasi-multiplicativity ratios of the four-arm probability for
/// `r1 <= r2 <= r3`, on replicas shared by all triples. `alpha(r, r) = 1`.
pub fn quasimult_table(model: Model, triples: &[(f64, f64, f64)], n: u64, seed: &SeedSpec) -> Result<Vec<QuasimultRow>> {
    if n < 2 {
        return invalid("at least two replicas are needed");
    }
    for &(a, b, c) in triples {
        if !(1.0 <= a && a <= b && b <= c) {
            return invalid(format!("scales must satisfy 1 <= r1 <= r2 <= r3, got ({a}, {b}, {c})"));
        }
    }
    // the events of each triple: (r1, r2), (r2, r3), (r1, r3), (r1, r2 - 1)
    let mut events: Vec<(f64, f64)> = Vec::new();
    let idx = |p: (f64, f64), events: &mut Vec<(f64, f64)>| {
        if p.0 >= p.1 {
            return None;
        }
        Some(events.iter().position(|&e| e == p).unwrap_or_else(|| {
            events.push(p);
            events.len() - 1
        }))
    };
    let ids: Vec<[Option<usize>; 4]> = triples
        .iter()
        .map(|&(a, b, c)| {
            [idx((a, b), &mut events), idx((b, c), &mut events), idx((a, c), &mut events), idx((a, b - 1.0), &mut events)]
        })
        .collect();
    let specs = events.iter().map(|&(r, big)| ArmEventSpec::four_arm(r, big)).collect::<Result<Vec<_>>>()?;
    let window = arm_window(model, &specs);
    let hits = try_replica_map(n, |i| {
        let cfg = sample_poisson(model.intensity(), &window, model == Model::Voronoi, &seed.replica(i))?;
        let tess = match model {
            Model::Voronoi => Some(VoronoiTessellation::build(&cfg)?),
            Model::Boolean => None,
        };
        specs
            .iter()
            .map(|s| match &tess {
                Some(t) => voronoi_arm_event(t, s).map(|b| b as u8 as f64),
                None => Ok(arm_event_exact(&restrict(&cfg, &s.region.bounding_rect().inflate(ARM_PADDING)), s) as u8 as f64),
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let col = |k: Option<usize>| -> Vec<f64> {
        match k {
            Some(k) => hits.iter().map(|h| h[k]).collect(),
            None => vec![1.0; hits.len()],
        }
    };
    let mut rows = Vec::with_capacity(triples.len());
    for (&(r1, r2, r3), id) in triples.iter().zip(&ids) {
        let (a, b, c, d) = (col(id[0]), col(id[1]), col(id[2]), col(id[3]));
        let (ma, mb, mc, md) = (mean(&a), mean(&b), mean(&c), mean(&d));
        if mc == 0.0 || ma == 0.0 || mb == 0.0 {
            return Err(Error::Degenerate(format!(
                "no four-arm event observed for ({r1}, {r2}, {r3}); more replicas are needed"
            )));
        }
        let r = ma * mb / mc;
        let psi: Vec<f64> = (0..a.len()).map(|i| r * (a[i] / ma + b[i] / mb - c[i] / mc)).collect();
        let ratio = EstimatorResult { estimate: r, stderr: batch_stderr(&psi), n: a.len() };
        let gap: Vec<f64> = (0..a.len()).map(|i| c[i] - (mb * d[i] + md * b[i]) + md * mb).collect();
        let independence_gap =
            EstimatorResult { estimate: mc - md * mb, stderr: batch_stderr(&gap), n: a.len() };
        rows.push(QuasimultRow {
            r1,
            r2,
            r3,
            inner: batch_means(&a),
            outer: batch_means(&b),
            full: batch_means(&c),
            ratio,
            independence_gap,
        });
    }
    Ok(rows)
}

/// Ratio of the largest to the smallest ratio after moving each by three
/// standard errors toward the others.
pub fn band_factor(rows: &[QuasimultRow]) -> f64 {
    let hi = rows.iter().map(|r| r.ratio.estimate - 3.0 * r.ratio.stderr).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.ratio.estimate + 3.0 * r.ratio.stderr).fold(f64::INFINITY, f64::min);
    (hi / lo).max(1.0)
}

/// Log-log fit of an arm probability against the outer radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub radii: Vec<f64>,
    pub probabilities: Vec<EstimatorResult>,
    /// `-d log alpha / d log R`.
    pub exponent: f64,
    pub exponent_stderr: f64,
}

/// Exponent of `alpha3+(r, R)` over the outer radii, from nested events on
/// shared Boolean replicas and a weighted least-squares fit.
pub fn half_plane_three_arm_exponent(r: f64, radii: &[f64], n: u64, seed: &SeedSpec) -> Result<ExponentFit> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= r {
        return invalid("need at least two increasing outer radii above the inner one");
    }
    let specs = radii.iter().map(|&b| ArmEventSpec::three_arm_half(r, b)).collect::<Result<Vec<_>>>()?;
    let probabilities = nested_arm_probabilities(Model::Boolean, &specs, n, seed)?;
    if let Some(k) = probabilities.iter().position(|p| p.estimate == 0.0) {
        return Err(Error::Degenerate(format!("no three-arm event up to radius {}; more replicas are needed", radii[k])));
    }
    let x: Vec<f64> = radii.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = probabilities.iter().map(|p| p.estimate.ln()).collect();
    let sd: Vec<f64> = probabilities.iter().map(|p| p.relative_stderr()).collect();
    let (slope, se) = weighted_slope(&x, &y, &sd);
    Ok(ExponentFit { radii: radii.to_vec(), probabilities, exponent: -slope, exponent_stderr: se })
}

/// One `(L, u)` cell of [`instability_collapse`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub l: f64,
    pub u: f64,
    pub t: f64,
    pub alpha4: EstimatorResult,
    pub p_change: EstimatorResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseTable {
    pub rows: Vec<CollapseRow>,
    /// Largest minus smallest change probability across sizes, per `u`.
    pub spread: Vec<(f64, f64)>,
    /// Every change probability at `u <= 0.01` is at most 0.05.
    pub small_u_pass: bool,
    /// Every change probability at `u >= 10` is at least 0.1.
    pub large_u_pass: bool,
    /// Every spread is at most 0.15.
    pub spread_pass: bool,
}

impl CollapseTable {
    pub fn pass(&self) -> bool {
        self.small_u_pass && self.large_u_pass && self.spread_pass
    }
}

/// Change probabilities of the Boolean crossing under OU dynamics at
/// `t = u / (L^2 alpha4(1, L))`, for each size and rescaled time.
pub fn instability_collapse(
    ls: &[f64],
    us: &[f64],
    n: u64,
    alpha_replicas: u64,
    seed: &SeedSpec,
    cache: &Alpha4Cache,
) -> Result<CollapseTable> {
    if ls.len() < 3 {
        return invalid("the collapse needs at least three sizes");
    }
    let mut sorted = ls.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alphas = alpha4_nested(Model::Boolean, 1.0, &sorted, alpha_replicas, &seed.child("alpha4"), cache)?;
    let mut rows = Vec::new();
    for &l in ls {
        let a = alphas[sorted.iter().position(|&x| x == l).unwrap()];
        if a.estimate == 0.0 {
            return Err(Error::Degenerate(format!("no four-arm event up to radius {l}; more replicas are needed")));
        }
        let ts: Vec<f64> = us.iter().map(|u| u / (l * l * a.estimate)).collect();
        let (f, bg) = Model::Boolean.crossing(l)?;
        let pairs = paired_values(f.as_ref(), &bg, Dynamics::Ou, &ts, n, &seed.child(&format!("L{l}")))?;
        let (p, _) = curve_stats(&pairs, ts.len());
        for (j, &u) in us.iter().enumerate() {
            rows.push(CollapseRow { l, u, t: ts[j], alpha4: a, p_change: p[j] });
        }
    }
    let spread: Vec<(f64, f64)> = us
        .iter()
        .map(|&u| {
            let v: Vec<f64> = rows.iter().filter(|r| r.u == u).map(|r| r.p_change.estimate).collect();
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            (u, hi - lo)
        })
        .collect();
    let small_u_pass = rows.iter().filter(|r| r.u <= 0.01).all(|r| r.p_change.estimate <= 0.05);
    let large_u_pass = rows.iter().filter(|r| r.u >= 10.0).all(|r| r.p_change.estimate >= 0.1);
    let spread_pass = spread.iter().all(|&(_, s)| s <= 0.15);
    Ok(CollapseTable { rows, spread, small_u_pass, large_u_pass, spread_pass })
}

/// Small-time slope of the change probability against the expected spectral
/// size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerCheck {
    /// `E|gamma_L|`, four times the expected number of pivotal points.
    pub gamma: EstimatorResult,
    pub t_star: f64,
    pub p_change: EstimatorResult,
    /// `2 P(f != f^t*) / (t* E|gamma_L|)`.
    pub ratio: EstimatorResult,
    /// The ratio's 3-sigma interval meets `[0.7, 1.05]`.
    pub pass: bool,
}

/// Chooses `t*` with `t* E|gamma_L| = target` and compares
/// `2 P(f_L != f_L^t*)` with `t* E|gamma_L|` for the Boolean crossing under OU
/// dynamics.
pub fn mehler_slope(l: f64, target: f64, n_gamma: u64, n: u64, seed: &SeedSpec) -> Result<MehlerCheck> {
    if !(target > 0.0 && target < 1.0) {
        return invalid("target must lie in (0, 1)");
    }
    let (f, bg) = Model::Boolean.crossing(l)?;
    let counts = try_replica_map(n_gamma, |i| {
        let cfg = bg.sample(&seed.child("gamma").replica(i))?;
        Ok(4.0 * pivotal_points(f.as_ref(), &cfg)?.len() as f64)
    })?;
    let gamma = batch_means(&counts);
    if gamma.estimate == 0.0 {
        return Err(Error::Degenerate("no pivotal points observed".into()));
    }
    let t_star = target / gamma.estimate;
    let pairs = paired_values(f.as_ref(), &bg, Dynamics::Ou, &[t_star], n, &seed.child("noise"))?;
    let (p, _) = curve_stats(&pairs, 1);
    let p_change = p[0];
    let r = 2.0 * p_change.estimate / target;
    let rel = ((p_change.stderr / p_change.estimate).powi(2) + gamma.relative_stderr().powi(2)).sqrt();
    let ratio = EstimatorResult { estimate: r, stderr: r * rel, n: n as usize };
    let pass = r + 3.0 * ratio.stderr >= 0.7 && r - 3.0 * ratio.stderr <= 1.05;
    Ok(MehlerCheck { gamma, t_star, p_change, ratio, pass })
}

/// Crossing probability of `W_L` with the count of configurations where the
/// left-right occupied crossing and the top-bottom vacant crossing are both
/// present or both absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub crossing: EstimatorResult,
    pub mismatches: usize,
    pub n: u64,
}

impl DualityReport {
    pub fn mismatch_rate(&self) -> f64 {
        self.mismatches as f64 / self.n as f64
    }
}

/// Boolean model: exact occupied crossing against the vacant crossing of a
/// raster of resolution `h`. Voronoi: black left-right against white
/// top-bottom cell crossings, both exact.
pub fn duality_check(model: Model, l: f64, h: f64, n: u64, seed: &SeedSpec) -> Result<DualityReport> {
    use crate::boolean::{occupied_crossing, vacant_crossing_raster};
    use crate::model::Sign;
    use crate::voronoi::{voronoi_crossing, Axis};

    if n < 2 {
        return invalid("at least two replicas are needed");
    }
    let (_, bg) = model.crossing(l)?;
    let bx = Rect::square(l);
    let pairs = try_replica_map(n, |i| {
        let cfg = bg.sample(&seed.replica(i))?;
        match model {
            Model::Boolean => {
                Ok((occupied_crossing(&cfg, &bx).crossed, vacant_crossing_raster(&cfg, &bx, h)?))
            }
            Model::Voronoi => {
                let t = VoronoiTessellation::build(&cfg)?;
                Ok((
                    voronoi_crossing(&t, &bx, Sign::Plus, Axis::LeftRight, true)?,
                    voronoi_crossing(&t, &bx, Sign::Minus, Axis::TopBottom, true)?,
                ))
            }
        }
    })?;
    let hits = pairs.iter().filter(|p| p.0).count();
    let mismatches = pairs.iter().filter(|p| p.0 == p.1).count();
    Ok(DualityReport { crossing: crate::stats::bernoulli(hits, n as usize), mismatches, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::FnFunctional;
    use std::sync::atomic::{AtomicU64, Ordering};

    #[test]
    fn zero_time_never_changes_and_covariance_is_variance() {
        let c = noise_curve(Model::Voronoi, Dynamics::Frozen, 2.0, &[0.0, 0.5], 200, &SeedSpec::new(1, "nc"), 0, &Alpha4Cache::in_memory())
            .unwrap();
        assert_eq!(c.p_change[0].estimate, 0.0);
        assert_eq!(c.cov[0].estimate.to_bits(), c.variance.estimate.to_bits());
        assert!(c.u.is_none());
        let b = noise_curve(Model::Boolean, Dynamics::Ou, 2.0, &[0.0], 100, &SeedSpec::new(1, "nc"), 0, &Alpha4Cache::in_memory())
            .unwrap();
        assert_eq!(b.p_change[0].estimate, 0.0);
    }

    #[test]
    fn frozen_boolean_is_rejected() {
        let r = noise_curve(Model::Boolean, Dynamics::Frozen, 2.0, &[0.1], 10, &SeedSpec::new(1, "x"), 0, &Alpha4Cache::in_memory());
        assert!(matches!(r, Err(Error::Invalid(_))));
    }

    #[test]
    fn long_time_decorrelates() {
        let c = noise_curve(Model::Boolean, Dynamics::Ou, 3.0, &[50.0], 2000, &SeedSpec::new(2, "dec"), 0, &Alpha4Cache::in_memory())
            .unwrap();
        assert!(c.cov[0].estimate.abs() < 3.0 * c.cov[0].stderr, "{:?}", c.cov[0]);
    }

    #[test]
    fn base_functional_is_evaluated_once_per_replica() {
        let calls = AtomicU64::new(0);
        let inner = BooleanCrossing { l: 2.0 };
        let f = FnFunctional {
            name: "counting".into(),
            props: inner.props(),
            f: |c: &PointConfiguration| {
                calls.fetch_add(1, Ordering::Relaxed);
                inner.eval(c)
            },
        };
        let (_, bg) = Model::Boolean.crossing(2.0).unwrap();
        let ts = [0.1, 0.2, 0.4];
        let c = noise_curve_of(&f, &bg, Model::Boolean, Dynamics::Ou, 2.0, &ts, 50, &SeedSpec::new(3, "cnt"), None).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 50 * 4);
        assert_eq!(c.evaluations, 50 * 4);
    }

    #[test]
    fn ou_coupling_makes_change_probability_monotone() {
        let c = noise_curve(Model::Boolean, Dynamics::Ou, 3.0, &[0.05, 0.1, 0.3, 1.0, 3.0], 1000, &SeedSpec::new(4, "mono"), 0, &Alpha4Cache::in_memory())
            .unwrap();
        assert_eq!(c.monotonicity_violations(), 0);
        assert!(c.p_change.iter().all(|p| (0.0..=1.0).contains(&p.estimate)));
    }

    #[test]
    fn covariance_comparison_at_time_zero() {
        let rows = ou_vs_frozen_covariance(2.0, &[0.0, 0.3], 200, &SeedSpec::new(5, "cmp")).unwrap();
        assert_eq!(rows[0].ou.estimate.to_bits(), rows[0].frozen.estimate.to_bits());
        assert!(rows.iter().all(|r| r.pass));
    }

    #[test]
    fn alpha4_is_cached_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let seed = SeedSpec::new(6, "a4");
        let cache = Alpha4Cache::at(dir.path()).unwrap();
        let a = alpha4_nested(Model::Boolean, 1.0, &[3.0, 4.0], 100, &seed, &cache).unwrap();
        assert_eq!(cache.len(), 2);
        let again = Alpha4Cache::at(dir.path()).unwrap();
        assert_eq!(again.len(), 2);
        assert_eq!(alpha4_nested(Model::Boolean, 1.0, &[3.0, 4.0], 100, &seed, &again).unwrap(), a);
        assert!(alpha4_nested(Model::Boolean, 1.0, &[4.0, 3.0], 100, &seed, &again).is_err());
    }

    #[test]
    fn nested_early_stop_agrees_with_full_evaluation() {
        let specs: Vec<ArmEventSpec> = [3.0, 5.0, 8.0].iter().map(|&b| ArmEventSpec::four_arm(1.0, b).unwrap()).collect();
        let window = arm_window(Model::Boolean, &specs);
        for i in 0..300 {
            let cfg = sample_poisson(LAMBDA_C, &window, false, &SeedSpec::new(7, "nest").replica(i)).unwrap();
            let full: Vec<bool> = specs.iter().map(|s| arm_event_exact(&cfg, s)).collect();
            assert!(full.windows(2).all(|w| w[0] || !w[1]), "events are not nested: {full:?}");
            assert_eq!(nested_indicators(Model::Boolean, &cfg, &specs).unwrap(), full);
        }
    }

    #[test]
    fn degenerate_scale_triple_has_ratio_one() {
        let rows = quasimult_table(Model::Boolean, &[(2.0, 2.0, 4.0)], 400, &SeedSpec::new(8, "qm")).unwrap();
        assert_eq!(rows[0].ratio.estimate, 1.0);
        assert!(quasimult_table(Model::Boolean, &[(2.0, 1.0, 4.0)], 10, &SeedSpec::new(8, "qm")).is_err());
    }

    #[test]
    fn exponent_fit_needs_radii() {
        assert!(half_plane_three_arm_exponent(2.0, &[8.0], 10, &SeedSpec::new(9, "e")).is_err());
        let fit = half_plane_three_arm_exponent(2.0, &[4.0, 8.0], 2000, &SeedSpec::new(9, "e")).unwrap();
        assert!(fit.exponent > 0.0);
    }

    #[test]
    fn crossings_are_dual() {
        let v = duality_check(Model::Voronoi, 3.0, 0.0, 200, &SeedSpec::new(11, "dual")).unwrap();
        assert_eq!(v.mismatches, 0);
        // raster error shrinks with the resolution
        let coarse = duality_check(Model::Boolean, 3.0, 0.05, 200, &SeedSpec::new(11, "dual")).unwrap();
        let fine = duality_check(Model::Boolean, 3.0, 0.01, 200, &SeedSpec::new(11, "dual")).unwrap();
        assert_eq!(coarse.crossing, fine.crossing);
        assert!(fine.mismatches < coarse.mismatches);
        assert!(fine.mismatch_rate() < 0.03);
    }

    #[test]
    fn collapse_needs_three_sizes() {
        let c = Alpha4Cache::in_memory();
        assert!(instability_collapse(&[4.0, 8.0], &[1.0], 10, 10, &SeedSpec::new(10, "c"), &c).is_err());
    }
}
