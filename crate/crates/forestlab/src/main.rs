use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use forestlab::config::ExperimentConfig;
use forestlab::experiments::{self, Outcome};
use forestlab::manifest::RunManifest;

/// Exact computations on spanning-forest measures: decomposition reports,
/// marginals, samplers, monotone couplings, and convergence studies along
/// quotient towers and lattice exhaustions.
#[derive(Parser)]
#[command(name = "forestlab", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dimensions and residuals of the star/cycle/harmonic splitting.
    Decompose(RunArgs),
    /// Per-edge marginals of both forest measures, with references.
    Marginals(RunArgs),
    /// Sampler fidelity against exact probabilities.
    Sample(RunArgs),
    /// Monotone coupling, group averaging, invariance, window lift.
    Couple(RunArgs),
    /// Lifted marginals along a quotient tower.
    Tower(RunArgs),
    /// Wired/free box marginals along a lattice exhaustion.
    Exhaust(RunArgs),
    /// Connectivity and winding of free-measure outcomes on a torus.
    Topology(RunArgs),
    /// Window-subspace stabilization along a tower.
    Sot(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Seed for experiments that sample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; artifacts and the manifest are written next to it.
    #[arg(long)]
    out: PathBuf,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Decompose(_) => "decompose",
            Cmd::Marginals(_) => "marginals",
            Cmd::Sample(_) => "sample",
            Cmd::Couple(_) => "couple",
            Cmd::Tower(_) => "tower",
            Cmd::Exhaust(_) => "exhaust",
            Cmd::Topology(_) => "topology",
            Cmd::Sot(_) => "sot",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Cmd::Decompose(a)
            | Cmd::Marginals(a)
            | Cmd::Sample(a)
            | Cmd::Couple(a)
            | Cmd::Tower(a)
            | Cmd::Exhaust(a)
            | Cmd::Topology(a)
            | Cmd::Sot(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("RESULT fail");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: &Cmd) -> Result<bool> {
    let args = cmd.args();
    let (cfg, config_text) = ExperimentConfig::load(&args.config)?;
    ensure!(
        cfg.experiment == cmd.name(),
        "config names experiment {:?} but the subcommand is {:?}",
        cfg.experiment,
        cmd.name()
    );
    let outcome = experiments::run(&cfg, args.seed)?;
    let outputs = write_outputs(&args.out, &outcome)?;

    let mut manifest = RunManifest::new(cmd.name(), &config_text, args.seed);
    manifest.passed = outcome.passed;
    manifest.outputs = outputs;
    let manifest_path = sibling(&args.out, "manifest.json");
    std::fs::write(&manifest_path, manifest.to_json())
        .with_context(|| format!("writing {}", manifest_path.display()))?;

    for line in &outcome.notes {
        println!("{line}");
    }
    println!("manifest: {}", manifest_path.display());
    println!("RESULT {}", if outcome.passed { "pass" } else { "fail" });
    Ok(outcome.passed)
}

/// Write the table to `out` and each artifact to `out`'s stem plus the
/// artifact name; return everything written.
fn write_outputs(out: &Path, outcome: &Outcome) -> Result<Vec<String>> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut outputs = Vec::new();
    std::fs::write(out, outcome.table.to_csv_string())
        .with_context(|| format!("writing {}", out.display()))?;
    outputs.push(out.display().to_string());
    for artifact in &outcome.artifacts {
        let path = sibling(out, &artifact.name);
        std::fs::write(&path, &artifact.content)
            .with_context(|| format!("writing {}", path.display()))?;
        outputs.push(path.display().to_string());
    }
    Ok(outputs)
}

/// `results/tower.csv` + "manifest.json" -> `results/tower.manifest.json`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.{suffix}"))
}
