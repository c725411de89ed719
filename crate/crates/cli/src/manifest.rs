//! Run records (`<kind>.run.json`) and the manifest that collects them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{io_err, CliError};
use crate::experiments::{self, Check, CsvEntry, RunOutcome};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: String,
    pub root_seed: u64,
    pub config_hash: String,
    pub config: RunConfig,
    pub csv: Vec<CsvEntry>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub kind: String,
    pub root_seed: u64,
    pub config_hash: String,
    pub config: RunConfig,
    pub csv: Vec<CsvEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u64,
    pub entries: Vec<ManifestEntry>,
}

pub fn run_record_path(out: &Path, kind: &str) -> PathBuf {
    out.join(format!("{kind}.run.json"))
}

pub(crate) fn write_run_record(cfg: &RunConfig, outcome: &RunOutcome, out: &Path) -> Result<(), CliError> {
    let record = RunRecord {
        kind: cfg.kind.clone(),
        root_seed: cfg.root_seed,
        config_hash: cfg.hash(),
        config: cfg.clone(),
        csv: outcome.csv.clone(),
        checks: outcome.checks.clone(),
    };
    let path = run_record_path(out, &cfg.kind);
    let text = serde_json::to_string_pretty(&record).expect("record serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))
}

/// Collects every `*.run.json` in `dir` (sorted by name) into `dir/manifest.json`.
pub fn seed_manifest(dir: &Path) -> Result<Manifest, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".run.json")))
        .collect();
    paths.sort();
    let mut entries = Vec::new();
    for p in &paths {
        let text = std::fs::read_to_string(p).map_err(io_err(p))?;
        let r: RunRecord = serde_json::from_str(&text)
            .map_err(|e| CliError::Manifest { field: p.display().to_string(), message: e.to_string() })?;
        entries.push(ManifestEntry { kind: r.kind, root_seed: r.root_seed, config_hash: r.config_hash, config: r.config, csv: r.csv });
    }
    let manifest = Manifest { format: MANIFEST_FORMAT, entries };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Manifest { field: field.into(), message: message.into() }
}

fn get<'a>(obj: &'a Value, key: &str, at: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| field_err(format!("{at}{key}"), "missing"))
}

fn get_str<'a>(obj: &'a Value, key: &str, at: &str) -> Result<&'a str, CliError> {
    get(obj, key, at)?.as_str().ok_or_else(|| field_err(format!("{at}{key}"), "expected a string"))
}

fn is_sha256(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| b.is_ascii_hexdigit())
}

/// Parses and checks a manifest field by field, so that errors name the bad field.
pub fn validate_manifest(text: &str) -> Result<Manifest, CliError> {
    let root: Value = serde_json::from_str(text).map_err(|e| field_err("<root>", format!("not valid JSON: {e}")))?;
    let format = get(&root, "format", "")?.as_u64().ok_or_else(|| field_err("format", "expected an integer"))?;
    if format != MANIFEST_FORMAT {
        return Err(field_err("format", format!("unsupported format {format}")));
    }
    let list = get(&root, "entries", "")?.as_array().ok_or_else(|| field_err("entries", "expected an array"))?;
    let mut entries = Vec::new();
    for (i, e) in list.iter().enumerate() {
        let at = format!("entries[{i}].");
        let kind = get_str(e, "kind", &at)?;
        crate::catalog::lookup(kind).map_err(|err| field_err(format!("{at}kind"), err.to_string()))?;
        let root_seed =
            get(e, "root_seed", &at)?.as_u64().ok_or_else(|| field_err(format!("{at}root_seed"), "expected an unsigned integer"))?;
        let config_hash = get_str(e, "config_hash", &at)?;
        if !is_sha256(config_hash) {
            return Err(field_err(format!("{at}config_hash"), "expected 64 hex digits"));
        }
        let config: RunConfig = serde_json::from_value(get(e, "config", &at)?.clone())
            .map_err(|err| field_err(format!("{at}config"), err.to_string()))?;
        config.validate().map_err(|err| field_err(format!("{at}config"), err.to_string()))?;
        if config.kind != kind {
            return Err(field_err(format!("{at}kind"), format!("{kind:?} differs from config kind {:?}", config.kind)));
        }
        if config.root_seed != root_seed {
            return Err(field_err(format!("{at}root_seed"), "differs from config.root_seed"));
        }
        if config.hash() != config_hash {
            return Err(field_err(format!("{at}config_hash"), "does not match the config"));
        }
        let csv_list = get(e, "csv", &at)?.as_array().ok_or_else(|| field_err(format!("{at}csv"), "expected an array"))?;
        let mut csv = Vec::new();
        for (j, c) in csv_list.iter().enumerate() {
            let cat = format!("{at}csv[{j}].");
            let file = get_str(c, "file", &cat)?;
            if file.contains('/') || file.contains('\\') || !file.ends_with(".csv") {
                return Err(field_err(format!("{cat}file"), "expected a bare .csv file name"));
            }
            let sha = get_str(c, "sha256", &cat)?;
            if !is_sha256(sha) {
                return Err(field_err(format!("{cat}sha256"), "expected 64 hex digits"));
            }
            csv.push(CsvEntry { file: file.to_string(), sha256: sha.to_string() });
        }
        entries.push(ManifestEntry { kind: kind.to_string(), root_seed, config_hash: config_hash.to_string(), config, csv });
    }
    Ok(Manifest { format, entries })
}

pub fn load_manifest(path: &Path) -> Result<Manifest, CliError> {
    validate_manifest(&std::fs::read_to_string(path).map_err(io_err(path))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerunResult {
    pub kind: String,
    pub mismatched: Vec<String>,
}

/// Re-runs each entry into `out` and compares CSV digests with the manifest.
pub fn rerun(manifest: &Manifest, out: &Path) -> Result<Vec<RerunResult>, CliError> {
    manifest
        .entries
        .iter()
        .map(|e| {
            let outcome = experiments::run(&e.config, out)?;
            let mismatched = e
                .csv
                .iter()
                .filter(|want| !outcome.csv.iter().any(|got| got == *want))
                .map(|c| c.file.clone())
                .collect();
            Ok(RerunResult { kind: e.kind.clone(), mismatched })
        })
        .collect()
}
