use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use martapprox_cli::catalog;
use martapprox_cli::manifest::{self, MANIFEST_FILE};
use martapprox_cli::{ExperimentConfig, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "martapprox", version, about = "Martingale approximation diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSVs.
    Run {
        /// Experiment kind; see `list`. May also come from the config.
        kind: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "MARTAPPROX_OUT", default_value = "martapprox-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// e.g. `2^3..2^12`, `8,16,32` or `1..10`
        #[arg(long)]
        grid: Option<String>,
        /// Preset name or model file.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        ensemble: Option<usize>,
    },
    /// Print the experiment catalog.
    List,
    /// Write manifest.json for the runs in a directory.
    Manifest {
        #[arg(env = "MARTAPPROX_OUT", default_value = "martapprox-out")]
        dir: PathBuf,
    },
    /// Re-run every entry of a manifest and compare CSV digests.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run_cmd(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::List => {
            print!("{}", catalog::catalog_text());
            Ok(true)
        }
        Command::Run { kind, config, out, seed, grid, model, ensemble } => {
            let file = match &config {
                Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
                None => ExperimentConfig::default(),
            };
            let cfg = RunConfig::resolve(file, Overrides { kind, grid, root_seed: seed, model, ensemble })?;
            let outcome = martapprox_cli::run(&cfg, &out).with_context(|| format!("running {}", cfg.kind))?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for c in &outcome.checks {
                println!("{} {}/{}: {}", if c.pass { "PASS" } else { "FAIL" }, cfg.kind, c.name, c.detail);
            }
            for c in &outcome.csv {
                eprintln!("wrote {}", out.join(&c.file).display());
            }
            Ok(outcome.all_pass())
        }
        Command::Manifest { dir } => {
            let m = manifest::seed_manifest(&dir)?;
            println!("{} with {} entries", dir.join(MANIFEST_FILE).display(), m.entries.len());
            Ok(true)
        }
        Command::Rerun { manifest: path, out } => {
            let m = manifest::load_manifest(&path)?;
            let results = manifest::rerun(&m, &out)?;
            let mut ok = true;
            for r in &results {
                if r.mismatched.is_empty() {
                    println!("PASS rerun/{}: identical CSVs", r.kind);
                } else {
                    ok = false;
                    println!("FAIL rerun/{}: differs in {}", r.kind, r.mismatched.join(", "));
                }
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cmd(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
