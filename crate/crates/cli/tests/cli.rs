use std::path::Path;
use std::process::Command;

use martapprox_cli::manifest::{self, MANIFEST_FILE};
use martapprox_cli::{CliError, ExperimentConfig, Overrides, RunConfig};

fn cfg(kind: &str, grid: Option<&str>) -> RunConfig {
    RunConfig::resolve(
        ExperimentConfig::default(),
        Overrides { kind: Some(kind.into()), grid: grid.map(str::to_string), ..Default::default() },
    )
    .unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_martapprox"))
}

#[test]
fn bound_run_writes_schema_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = martapprox_cli::run(&cfg("theorem1_bound", None), dir.path()).unwrap();
    assert!(out.all_pass());
    let text = std::fs::read_to_string(dir.path().join("theorem1_bound.csv")).unwrap();
    let table = martapprox::report::CsvTable::parse(&text).unwrap();
    assert!(table.matches_schema(martapprox::report::schema::ERROR_BOUND));
    assert_eq!(table.metadata.get("kind"), Some("theorem1_bound"));
    assert!(dir.path().join("theorem1_bound.run.json").exists());
}

#[test]
fn harmonic_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = martapprox_cli::run(&cfg("example1_harmonic", Some("2^10..2^13")), dir.path()).unwrap();
    let c = out.checks.iter().find(|c| c.name == "condition9").unwrap();
    assert!(c.pass, "{}", c.detail);
    assert!(c.detail.contains("HOLDS"));
}

#[test]
fn model_file_without_kernel_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.model");
    std::fs::write(&path, "[states]\n0 1\n[pi]\n0.5 0.5\n[g]\n-1 1\n").unwrap();
    let mut c = cfg("theorem1_bound", None);
    c.model = Some(path.display().to_string());
    match martapprox_cli::run(&c, dir.path()) {
        Err(CliError::Model(martapprox::Error::ModelParse { line, message })) => {
            assert_eq!(line, 6);
            assert!(message.contains("[kernel]"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn manifest_and_bitwise_rerun() {
    let dir = tempfile::tempdir().unwrap();
    martapprox_cli::run(&cfg("theorem1_bound", None), dir.path()).unwrap();
    let mut c = cfg("v_sup", Some("2^6,2^8"));
    c.ensemble = 50;
    c.root_seed = 11;
    martapprox_cli::run(&c, dir.path()).unwrap();
    let m = manifest::seed_manifest(dir.path()).unwrap();
    assert_eq!(m.entries.len(), 2);

    let loaded = manifest::load_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(loaded, m);
    let again = tempfile::tempdir().unwrap();
    for r in manifest::rerun(&loaded, again.path()).unwrap() {
        assert!(r.mismatched.is_empty(), "{r:?}");
    }
    for e in &m.entries {
        for f in &e.csv {
            let a = std::fs::read(dir.path().join(&f.file)).unwrap();
            let b = std::fs::read(again.path().join(&f.file)).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn corrupted_manifest_names_field() {
    let dir = tempfile::tempdir().unwrap();
    martapprox_cli::run(&cfg("alpha_mixing", Some("1..3")), dir.path()).unwrap();
    manifest::seed_manifest(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();

    v["entries"][0]["root_seed"] = serde_json::json!("seven");
    match manifest::validate_manifest(&v.to_string()) {
        Err(CliError::Manifest { field, .. }) => assert_eq!(field, "entries[0].root_seed"),
        other => panic!("{other:?}"),
    }
    v["entries"][0]["root_seed"] = serde_json::json!(0);
    v["entries"][0]["config"]["ensemble"] = serde_json::json!(3);
    match manifest::validate_manifest(&v.to_string()) {
        Err(CliError::Manifest { field, .. }) => assert_eq!(field, "entries[0].config_hash"),
        other => panic!("{other:?}"),
    }
    v["entries"][0]["config"]["ensemble"] = serde_json::json!(0);
    v["entries"][0]["csv"][0]["sha256"] = serde_json::json!("xyz");
    match manifest::validate_manifest(&v.to_string()) {
        Err(CliError::Manifest { field, .. }) => assert_eq!(field, "entries[0].csv[0].sha256"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_kind_suggests() {
    let out = bin().args(["run", "lindberg", "--out"]).arg(std::env::temp_dir()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("did you mean \"lindeberg\""), "{err}");
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin().args(["run", "alpha_mixing", "--grid", "1..4", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("PASS"));

    let cfg_path = dir.path().join("strict.toml");
    std::fs::write(&cfg_path, "kind = \"equivalence_gap\"\ngrid = \"2^3..2^5\"\n[thresholds]\nequivalence_final = 1e-9\n").unwrap();
    let fail = bin().args(["run", "--config"]).arg(&cfg_path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(fail.status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"lindeberg\"\n\n\nensemble = -3\n").unwrap();
    let err = bin().args(["run", "--config"]).arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(err.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&err.stderr).contains("line 4"));

    let m = bin().arg("manifest").arg(dir.path()).output().unwrap();
    assert_eq!(m.status.code(), Some(0));
    assert!(Path::new(&dir.path().join(MANIFEST_FILE)).exists());
}
