//! Run configuration, CSV tables with a JSON metadata sidecar, and loaders
//! for both.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::experiments::{Dynamics, Model};

/// Parameters of one run. Every field is optional; each command validates the
/// ones it needs and fills in defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub dynamics: Option<Dynamics>,
    /// Half side of the observation box.
    pub l: Option<f64>,
    /// Several box sizes.
    pub ls: Option<Vec<f64>>,
    /// Inner and outer radii of an annulus.
    pub r: Option<f64>,
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    /// Several outer radii.
    pub radii: Option<Vec<f64>>,
    /// Middle scales of quasi-multiplicativity triples.
    pub r2s: Option<Vec<f64>>,
    /// Raster resolution.
    pub h: Option<f64>,
    /// Arm pattern: `four`, `three_half`, `two_quarter`, `two`, `one`.
    pub arms: Option<String>,
    pub intensity: Option<f64>,
    pub rho: Option<f64>,
    /// Time grid.
    pub ts: Option<Vec<f64>>,
    /// Rescaled time grid.
    pub us: Option<Vec<f64>>,
    pub replicas: Option<u64>,
    /// Replicas for the four-arm probabilities used to rescale time.
    pub alpha_replicas: Option<u64>,
    pub n_points: Option<usize>,
    /// Calibration intensity bracket.
    pub bracket: Option<(f64, f64)>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Fields set in `other` replace those here.
    pub fn merge(&mut self, other: RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            model, dynamics, l, ls, r, big_r, radii, r2s, h, arms, intensity, rho, ts, us, replicas, alpha_replicas,
            n_points, bracket, seed, output
        );
    }
}

/// Hex SHA-256 of the JSON form of the configuration.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let json = serde_json::to_string(cfg)?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// A table of text cells with a header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return invalid(format!("row has {} cells, header has {}", row.len(), self.header.len()));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

/// Formats a number so it reads back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Metadata written next to every table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
    pub runtime_seconds: f64,
    /// Outcome of the acceptance check, when one was requested.
    pub check: Option<bool>,
    /// Notes such as estimator warnings.
    pub notes: Vec<String>,
}

/// Path of the JSON sidecar of a CSV file.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `table` with `seed` and `config_hash` columns appended to every
/// row, and the metadata sidecar.
pub fn write_outputs(path: &Path, table: &Table, meta: &Metadata) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header = table.header.clone();
    header.extend(["seed".to_string(), "config_hash".to_string()]);
    w.write_record(&header)?;
    for row in &table.rows {
        let mut r = row.clone();
        r.extend([meta.seed.to_string(), meta.config_hash.clone()]);
        w.write_record(&r)?;
    }
    w.flush()?;
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(())
}

/// Reads a CSV written by [`write_outputs`].
pub fn load_table(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(Table { header, rows })
}

pub fn load_metadata(path: &Path) -> Result<Metadata> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(cfg: RunConfig) -> Metadata {
        Metadata {
            command: "test".into(),
            config_hash: config_hash(&cfg).unwrap(),
            config: cfg,
            seed: 7,
            version: "0".into(),
            runtime_seconds: 0.5,
            check: Some(true),
            notes: vec![],
        }
    }

    #[test]
    fn tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("t.csv");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(0.1), "x,y \"q\"".into()]).unwrap();
        t.push(vec![num(1e-300), "".into()]).unwrap();
        assert!(t.push(vec!["1".into()]).is_err());
        let cfg = RunConfig { l: Some(8.0), ts: Some(vec![0.0, 0.5]), ..Default::default() };
        let m = meta(cfg);
        write_outputs(&path, &t, &m).unwrap();
        let back = load_table(&path).unwrap();
        assert_eq!(back.header, vec!["a", "b", "seed", "config_hash"]);
        assert_eq!(back.rows[0][..2], t.rows[0][..]);
        assert_eq!(back.column("a").unwrap()[1].parse::<f64>().unwrap(), 1e-300);
        assert_eq!(back.column("seed").unwrap(), vec!["7", "7"]);
        assert_eq!(load_metadata(&sidecar_path(&path)).unwrap(), m);
    }

    #[test]
    fn config_parsing_and_merging() {
        let mut a: RunConfig = serde_json::from_str(r#"{"model":"voronoi","l":8,"R":16,"seed":3}"#).unwrap();
        assert_eq!(a.big_r, Some(16.0));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus":1}"#).is_err());
        a.merge(RunConfig { l: Some(4.0), ..Default::default() });
        assert_eq!((a.l, a.seed), (Some(4.0), Some(3)));
    }

    #[test]
    fn hash_changes_with_the_config() {
        let a = RunConfig { l: Some(8.0), ..Default::default() };
        let b = RunConfig { l: Some(16.0), ..Default::default() };
        assert_eq!(config_hash(&a).unwrap(), config_hash(&a.clone()).unwrap());
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }
}
