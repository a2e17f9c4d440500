//! Golden CSV files: each entry in `goldens.toml` names a sweep config and
//! the CSV it must reproduce. Entries without tolerances must match byte for
//! byte; listed columns are compared numerically within an absolute tolerance.
//!
//! ```toml
//! [[golden]]
//! name = "moments"
//! config = "moments.toml"
//! expected = "moments.csv"
//! tolerance = { mc_mean = 1e-9 }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::config::{ConfigError, SweepConfig};
use crate::sweep::run_sweep;

pub const MANIFEST: &str = "goldens.toml";

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error("missing golden file {0}")]
    MissingGolden(PathBuf),
    #[error("{name}: mismatch at {location}\n  expected: {expected}\n  found:    {found}")]
    Mismatch { name: String, location: String, expected: String, found: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("bad manifest {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenEntry {
    pub name: String,
    pub config: PathBuf,
    pub expected: PathBuf,
    #[serde(default)]
    pub tolerance: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    golden: Vec<GoldenEntry>,
}

#[derive(Debug)]
pub struct GoldenReport {
    pub outcomes: Vec<(String, Result<(), GoldenError>)>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|(_, r)| r.is_ok())
    }
}

impl fmt::Display for GoldenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, r) in &self.outcomes {
            match r {
                Ok(()) => writeln!(f, "PASS {name}")?,
                Err(e) => writeln!(f, "FAIL {name}: {e}")?,
            }
        }
        Ok(())
    }
}

pub fn load_manifest(dir: &Path) -> Result<Vec<GoldenEntry>, GoldenError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|_| GoldenError::MissingGolden(path.clone()))?;
    let m: Manifest =
        toml::from_str(&text).map_err(|e| GoldenError::Manifest { path: path.clone(), detail: e.to_string() })?;
    Ok(m.golden)
}

/// Re-run every golden config in `dir` and compare against the stored CSVs.
pub fn verify_goldens(dir: &Path) -> Result<GoldenReport, GoldenError> {
    let entries = load_manifest(dir)?;
    let outcomes = entries.iter().map(|e| (e.name.clone(), verify_entry(dir, e))).collect();
    Ok(GoldenReport { outcomes })
}

/// Regenerate the expected CSVs from their configs.
pub fn bless_goldens(dir: &Path) -> Result<Vec<PathBuf>, GoldenError> {
    let mut written = Vec::new();
    for e in load_manifest(dir)? {
        let cfg = load_config(dir, &e)?;
        let path = dir.join(&e.expected);
        std::fs::write(&path, run_sweep(&cfg)?.to_csv_string())
            .map_err(|source| GoldenError::Write { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}

fn load_config(dir: &Path, entry: &GoldenEntry) -> Result<SweepConfig, GoldenError> {
    let path = dir.join(&entry.config);
    if !path.exists() {
        return Err(GoldenError::MissingGolden(path));
    }
    Ok(SweepConfig::load(&path)?)
}

fn verify_entry(dir: &Path, entry: &GoldenEntry) -> Result<(), GoldenError> {
    let cfg = load_config(dir, entry)?;
    let path = dir.join(&entry.expected);
    let expected = std::fs::read_to_string(&path).map_err(|_| GoldenError::MissingGolden(path.clone()))?;
    let found = run_sweep(&cfg)?.to_csv_string();
    compare_csv(&entry.name, &expected, &found, &entry.tolerance)
}

/// Compare two sweep CSVs; `tolerance` lists numeric columns and their
/// absolute tolerances, every other field must match exactly.
pub fn compare_csv(
    name: &str,
    expected: &str,
    found: &str,
    tolerance: &BTreeMap<String, f64>,
) -> Result<(), GoldenError> {
    if expected == found {
        return Ok(());
    }
    let mismatch = |location: String, e: &str, f: &str| GoldenError::Mismatch {
        name: name.to_string(),
        location,
        expected: e.to_string(),
        found: f.to_string(),
    };
    let (el, fl): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), found.lines().collect());
    if tolerance.is_empty() || el.len() != fl.len() {
        let i = el.iter().zip(&fl).position(|(a, b)| a != b).unwrap_or(el.len().min(fl.len()));
        return Err(mismatch(
            format!("line {}", i + 1),
            el.get(i).copied().unwrap_or("<end of file>"),
            fl.get(i).copied().unwrap_or("<end of file>"),
        ));
    }
    let parse = |text: &str| -> Vec<csv::StringRecord> {
        csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes())
            .records()
            .filter_map(Result::ok)
            .collect()
    };
    let comments = |lines: &[&str]| lines.iter().filter(|l| l.starts_with('#')).map(|l| l.to_string()).collect::<Vec<_>>();
    if comments(&el) != comments(&fl) {
        return Err(mismatch("schema line".into(), &comments(&el).join(" "), &comments(&fl).join(" ")));
    }
    let (er, fr) = (parse(expected), parse(found));
    let header = er.first().cloned().unwrap_or_default();
    if fr.first() != Some(&header) {
        let fh = fr.first().map(|r| r.iter().collect::<Vec<_>>().join(",")).unwrap_or_default();
        return Err(mismatch("header".into(), &header.iter().collect::<Vec<_>>().join(","), &fh));
    }
    for (row, (a, b)) in er.iter().zip(&fr).enumerate().skip(1) {
        for (col, ((x, y), h)) in a.iter().zip(b.iter()).zip(header.iter()).enumerate() {
            let ok = match tolerance.get(h) {
                Some(&tol) => match (x.parse::<f64>(), y.parse::<f64>()) {
                    (Ok(u), Ok(v)) => (u - v).abs() <= tol || u == v,
                    _ => x == y,
                },
                None => x == y,
            };
            if !ok {
                return Err(mismatch(format!("row {row}, column {} ({h})", col + 1), x, y));
            }
        }
        if a.len() != b.len() {
            return Err(mismatch(format!("row {row}"), &a.len().to_string(), &b.len().to_string()));
        }
    }
    Ok(())
}
