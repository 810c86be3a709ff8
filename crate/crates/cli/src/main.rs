//! `oscillab` — command-line laboratory for mean-oscillation experiments on
//! elliptic coefficient fields: oscillation profiles, weighted Dini
//! functionals, counterexample verification, Dirichlet solves, replacement
//! cascades, and estimate reports.
//!
//! Exit status: 0 when the run and all its asserted invariants pass, 2 for
//! configuration problems, 3 for numerical failures or failed assertions.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "oscillab",
    version,
    about = "Numerical laboratory for mean oscillation of elliptic coefficients",
    long_about = None
)]
struct Cli {
    /// Key = value configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Example name or synthetic:<modulus-spec>.
    #[arg(long, global = true)]
    field: Option<String>,

    /// Ambient dimension for field construction.
    #[arg(long, global = true)]
    dimension: Option<usize>,

    /// Oscillation exponent p.
    #[arg(long, global = true)]
    p: Option<f64>,

    /// Radius grid: auto, dyadic:<base>:<kmin>:<kmax>, or list:v1,v2,…
    #[arg(long, global = true)]
    radii: Option<String>,

    /// sup-over-centers or origin-only.
    #[arg(long, global = true)]
    estimator: Option<String>,

    /// Quadrature rule: product-polar, grid, or lowdisc.
    #[arg(long, global = true)]
    quadrature: Option<String>,

    /// Per-ball quadrature budget (0 = automatic).
    #[arg(long = "quad-points", global = true)]
    quad_points: Option<usize>,

    /// Seed for the seeded quadrature rules.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cells per grid side for the finite-element solves (power of two).
    #[arg(long, global = true)]
    cells: Option<usize>,

    /// Conjugate-gradient relative tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Conjugate-gradient iteration cap.
    #[arg(long = "max-iterations", global = true)]
    max_iterations: Option<usize>,

    /// Deepest cascade level.
    #[arg(long, global = true)]
    kmax: Option<usize>,

    /// Constant inside the weighted functional's exponential.
    #[arg(long = "c-value", global = true)]
    c_value: Option<f64>,

    /// Comma-separated candidate constants for estimate fits.
    #[arg(long = "c-grid", global = true)]
    c_grid: Option<String>,

    /// Outer radius R.
    #[arg(long = "big-r", global = true)]
    big_r: Option<f64>,

    /// Modulus spec: const:c, powlog:k, loglog:b, or table:<csv>.
    #[arg(long, global = true)]
    modulus: Option<String>,

    /// Estimate selector for `report`: est1, est2, est3, or hrep.
    #[arg(long, global = true)]
    estimate: Option<String>,

    /// Number of dyadic scales in estimate sweeps.
    #[arg(long, global = true)]
    depth: Option<usize>,

    /// Output directory for CSV/JSON/summary artifacts.
    #[arg(long = "out-dir", global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure an oscillation profile of the coefficient field.
    Modulus,
    /// Evaluate the Dini integral and the weighted functional for a modulus.
    Dini,
    /// Check a named example: radial residual, eigenvalues, ellipticity.
    VerifyExample {
        /// Example name (defaults to the configured field); `prop-c2` runs
        /// the two-reading disambiguation.
        name: Option<String>,
    },
    /// Run one Dirichlet solve on the configured example.
    Solve,
    /// Run the dyadic harmonic-replacement cascade.
    Cascade,
    /// Produce an estimate report (est1/est2/est3/hrep).
    Report,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(config::ConfigError(format!(
                    "reading {}: {e}",
                    path.display()
                )))
            })?;
            ExperimentConfig::from_kv(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let mut set = |key: &str, value: Option<String>| -> Result<(), CliError> {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
        Ok(())
    };
    set("field", cli.field.clone())?;
    set("dimension", cli.dimension.map(|v| v.to_string()))?;
    set("p", cli.p.map(|v| oscillab_core::io::fmt_float(v)))?;
    set("radii", cli.radii.clone())?;
    set("estimator", cli.estimator.clone())?;
    set("quadrature", cli.quadrature.clone())?;
    set("quad-points", cli.quad_points.map(|v| v.to_string()))?;
    set("seed", cli.seed.map(|v| v.to_string()))?;
    set("cells", cli.cells.map(|v| v.to_string()))?;
    set("tol", cli.tol.map(|v| oscillab_core::io::fmt_float(v)))?;
    set("max-iterations", cli.max_iterations.map(|v| v.to_string()))?;
    set("kmax", cli.kmax.map(|v| v.to_string()))?;
    set(
        "c-value",
        cli.c_value.map(|v| oscillab_core::io::fmt_float(v)),
    )?;
    set("c-grid", cli.c_grid.clone())?;
    set("big-r", cli.big_r.map(|v| oscillab_core::io::fmt_float(v)))?;
    set("modulus", cli.modulus.clone())?;
    set("estimate", cli.estimate.clone())?;
    set("depth", cli.depth.map(|v| v.to_string()))?;
    set(
        "out-dir",
        cli.out_dir.as_ref().map(|v| v.display().to_string()),
    )?;
    Ok(cfg)
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("OSCILLAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                // Ignore failure: the global pool can only be set once.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::Modulus => commands::run_modulus(&cfg),
        Command::Dini => commands::run_dini(&cfg),
        Command::VerifyExample { name } => commands::run_verify(&cfg, name.as_deref()),
        Command::Solve => commands::run_solve(&cfg),
        Command::Cascade => commands::run_cascade(&cfg),
        Command::Report => commands::run_report(&cfg),
    }
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            print!("{summary}");
        }
        Err(err @ CliError::Config(_)) => {
            eprintln!("{err}");
            std::process::exit(2);
        }
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(3);
        }
    }
}
