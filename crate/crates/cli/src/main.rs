use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use equilibra::driver::{run_adaptive, write_summary, Benchmark, Material, MeshSource, RunConfig};

/// Adaptive P2/P1 elasticity with guaranteed error bounds.
///
/// Settings are taken from the built-in defaults, then the config file, then
/// the command-line flags.
#[derive(Debug, Parser)]
#[command(name = "equilibra", version)]
struct Args {
    /// `key = value` config file; `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cook, manufactured-smooth, manufactured-divfree or patch-test.
    #[arg(long)]
    benchmark: Option<Benchmark>,
    /// Poisson ratio in (0, 0.5].
    #[arg(long)]
    nu: Option<f64>,
    /// Dörfler parameter in (0, 1].
    #[arg(long)]
    theta: Option<f64>,
    /// Maximum number of refinement steps.
    #[arg(long)]
    steps: Option<usize>,
    /// default, cook, unit-square:N, cook-structured:NXxNY or a mesh file.
    #[arg(long)]
    mesh: Option<MeshSource>,
    /// CSV output path, written after every step.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the per-step table.
    #[arg(long, short)]
    quiet: bool,
}

fn build_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_file(p).with_context(|| format!("reading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(b) = args.benchmark {
        cfg.benchmark = b;
    }
    if let Some(nu) = args.nu {
        cfg.material = Material::Nu(nu);
    }
    if let Some(t) = args.theta {
        cfg.theta = t;
    }
    if let Some(s) = args.steps {
        cfg.steps = s;
    }
    if let Some(m) = &args.mesh {
        cfg.mesh = m.clone();
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> Result<()> {
    let args = Args::parse();
    let cfg = build_config(&args)?;
    let record = run_adaptive(&cfg)?;
    if !args.quiet {
        write_summary(&record, &mut std::io::stdout())?;
    }
    let last = record.rows.len().min(6);
    match record.bound_slope(last) {
        Some(s) => println!("{}: {} steps, bound slope over the last {last} {s:.3}", cfg.benchmark, record.rows.len()),
        None => println!("{}: {} step(s)", cfg.benchmark, record.rows.len()),
    }
    if let Some(o) = &cfg.out {
        println!("wrote {}", o.display());
    }
    Ok(())
}
