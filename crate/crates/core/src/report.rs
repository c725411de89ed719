//! CSV serialization of diagnostic reports.
//!
//! Every file starts with `# key=value` metadata lines, followed by a header
//! row and data rows. Floats use Rust's shortest round-trip formatting, so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::clt::{ConditionalClt, LindebergReport, MixingCltRow, PathEnsembleStat};
use crate::error::{Error, Result};
use crate::linear::{LinearVarianceReport, Verdict};
use crate::martingale::ApproximationErrorReport;
use crate::variance::VarianceProfile;

pub const MODULE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column layouts of the fixed report kinds.
pub mod schema {
    pub const ERROR_BOUND: &[&str] = &["n", "k", "error", "bound", "sigma_n", "method"];
    pub const VARIANCE_PROFILE: &[&str] = &["n", "sigma_sq", "ell", "cond_mean_norm", "ratio4"];
    pub const LINEAR: &[&str] = &["n", "sigma1_sq", "sigma2_sq", "ratio9", "truncation_J", "tail_bound", "verdict"];
    pub const CLT: &[&str] = &["state", "n", "levy", "pi_weight", "integrated"];
    pub const LINDEBERG: &[&str] = &["n", "mean_V", "sd_V", "sup_dev_median", "eps", "truncated_mean"];
    pub const REMAINDER: &[&str] = &["n", "eps", "prob"];
    pub const EXAMPLE3: &[&str] = &["n", "median_stat", "q90_stat"];
    pub const MIXING_CLT: &[&str] = &["n", "alpha", "unconditional_levy", "conditional_integrated"];

    /// `(name, columns)` for lookup by file stem.
    pub const ALL: &[(&str, &[&str])] = &[
        ("error_bound", ERROR_BOUND),
        ("variance_profile", VARIANCE_PROFILE),
        ("linear", LINEAR),
        ("clt", CLT),
        ("lindeberg", LINDEBERG),
        ("remainder", REMAINDER),
        ("example3", EXAMPLE3),
        ("mixing_clt", MIXING_CLT),
    ];

    pub fn lookup(name: &str) -> Option<&'static [&'static str]> {
        ALL.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
    }
}

/// Ordered `key=value` pairs written ahead of the header.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata(Vec<(String, String)>);

impl Metadata {
    /// `model_hash`, `n`, `ensemble`, `root_seed` and `module_version`, in that order.
    pub fn standard(model_hash: &str, n: impl ToString, ensemble: usize, root_seed: u64) -> Self {
        Metadata::default()
            .with("model_hash", model_hash)
            .with("n", n)
            .with("ensemble", ensemble)
            .with("root_seed", root_seed)
            .with("module_version", MODULE_VERSION)
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    /// Replaces an existing key in place or appends.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        match self.0.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Metadata,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

impl CsvTable {
    pub fn new(metadata: Metadata, header: &[&str]) -> Self {
        Self { metadata, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.metadata.entries() {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Metadata::default();
        let mut header: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::ModelParse { line: i + 1, message: "metadata line without '='".into() })?;
                metadata.set(k.trim(), v.trim());
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            match &header {
                None => header = Some(fields),
                Some(h) if h.len() != fields.len() => {
                    return Err(Error::ModelParse {
                        line: i + 1,
                        message: format!("{} fields, header has {}", fields.len(), h.len()),
                    })
                }
                Some(_) => rows.push(fields),
            }
        }
        let header = header.ok_or_else(|| Error::ModelParse { line: 0, message: "no header row".into() })?;
        Ok(Self { metadata, header, rows })
    }

    /// Column values parsed as `f64`.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[idx].parse().ok()).collect()
    }

    pub fn matches_schema(&self, columns: &[&str]) -> bool {
        self.header.len() == columns.len() && self.header.iter().zip(columns).all(|(a, b)| a == b)
    }
}

pub fn error_bound_csv(reports: &[ApproximationErrorReport], metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::ERROR_BOUND);
    for r in reports {
        for (i, e) in r.per_k_errors.iter().enumerate() {
            t.push(vec![
                r.n.to_string(),
                (i + 1).to_string(),
                fmt_f64(*e),
                fmt_f64(r.bound),
                fmt_f64(r.sigma_n),
                r.method.label().to_string(),
            ]);
        }
    }
    t
}

pub fn variance_profile_csv(profile: &VarianceProfile, metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::VARIANCE_PROFILE);
    let ratio = profile.ratio4();
    for i in 0..profile.n_grid.len() {
        t.push(vec![
            profile.n_grid[i].to_string(),
            fmt_f64(profile.sigma_sq[i]),
            fmt_f64(profile.ell[i]),
            fmt_f64(profile.cond_mean_norm[i]),
            fmt_f64(ratio[i]),
        ]);
    }
    t
}

/// The verdict applies to the whole grid and is repeated on each row.
pub fn linear_csv(rows: &[LinearVarianceReport], verdict: Verdict, metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::LINEAR);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            fmt_f64(r.sigma1_sq),
            fmt_f64(r.sigma2_sq),
            fmt_f64(r.ratio9),
            r.truncation_j.to_string(),
            fmt_f64(r.tail_bound),
            verdict.to_string(),
        ]);
    }
    t
}

/// One row per state and `n`; `integrated` repeats the `π`-weighted sum.
pub fn clt_csv(results: &[ConditionalClt], states: &[String], metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::CLT);
    for r in results {
        for (x, levy) in r.per_state_levy.iter().enumerate() {
            let name = states.get(x).cloned().unwrap_or_else(|| x.to_string());
            t.push(vec![name, r.n.to_string(), fmt_f64(*levy), fmt_f64(r.pi[x]), fmt_f64(r.integrated)]);
        }
    }
    t
}

/// One row per `(n, ε)`.
pub fn lindeberg_csv(reports: &[LindebergReport], metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::LINDEBERG);
    for r in reports {
        for (eps, tm) in &r.truncated {
            t.push(vec![
                r.n.to_string(),
                fmt_f64(r.mean_v),
                fmt_f64(r.sd_v),
                fmt_f64(r.sup_dev.median),
                fmt_f64(*eps),
                fmt_f64(*tm),
            ]);
        }
    }
    t
}

pub fn remainder_csv(stats: &[PathEnsembleStat], metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::REMAINDER);
    for s in stats {
        for (eps, p) in &s.exceedance {
            t.push(vec![s.n.to_string(), fmt_f64(*eps), fmt_f64(*p)]);
        }
    }
    t
}

pub fn example3_csv(stats: &[PathEnsembleStat], metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::EXAMPLE3);
    for s in stats {
        t.push(vec![s.n.to_string(), fmt_f64(s.median), fmt_f64(s.q90)]);
    }
    t
}

pub fn mixing_clt_csv(rows: &[MixingCltRow], metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, schema::MIXING_CLT);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.unconditional_levy),
            fmt_f64(r.conditional_integrated),
        ]);
    }
    t
}

/// Free-form numeric table for experiments without a fixed schema.
pub fn series_csv(header: &[&str], rows: &[Vec<f64>], metadata: Metadata) -> CsvTable {
    let mut t = CsvTable::new(metadata, header);
    for r in rows {
        t.push(r.iter().map(|x| fmt_f64(*x)).collect());
    }
    t
}
