//! `gpe`: ground states, collapse thresholds and real-time dynamics of
//! attractive condensates, written as CSV.

mod commands;
mod config;
mod output;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

/// Bad invocation: unknown keys, malformed config, missing values.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "gpe", version, about = "Attractive condensates in cigar-shaped traps", arg_required_else_help = true)]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "GPE_THREADS", value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GridArgs {
    /// line | cylindrical | spherical
    #[arg(long)]
    pub geometry: Option<gpe_core::Geometry>,
    #[arg(long)]
    pub n_rho: Option<usize>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub n_s: Option<usize>,
    /// Axial half-extent; the default scales with the soliton width.
    #[arg(long)]
    pub s_half: Option<f64>,
    #[arg(long)]
    pub n_r: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct DescentArgs {
    /// preconditioned | gradient
    #[arg(long)]
    pub method: Option<gpe_core::groundstate::DescentMethod>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub energy_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub collapse_guard: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct PotentialArgs {
    /// External potential V(rho, s), e.g. "0.01*s" or "A*exp(-(s-s0)^2/w^2)".
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    /// Parameter binding for the potential; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GroundArgs {
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda_z: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub descent: DescentArgs,
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// State CSV; the summary and manifest are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda_z: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// ground (relaxed first) | composite | gaussian
    #[arg(long)]
    pub initial: Option<String>,
    #[command(flatten)]
    pub descent: DescentArgs,
    /// Galilean boost velocity applied to the initial state.
    #[arg(long, allow_hyphen_values = true)]
    pub boost: Option<f64>,
    /// Axial displacement applied to the initial state.
    #[arg(long, allow_hyphen_values = true)]
    pub displace: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub observe_every: Option<usize>,
    /// split-step | semi-implicit
    #[arg(long)]
    pub scheme: Option<gpe_core::dynamics::Scheme>,
    /// Absorbing layer width at the grid edges.
    #[arg(long)]
    pub sponge_width: Option<f64>,
    #[arg(long)]
    pub sponge_strength: Option<f64>,
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Comma-separated times at which to write state snapshots.
    #[arg(long)]
    pub snapshots: Option<String>,
    /// Trajectory CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CollapseArgs {
    /// cylindrical | spherical
    #[arg(long)]
    pub geometry: Option<gpe_core::Geometry>,
    #[arg(long)]
    pub lambda_z: Option<f64>,
    #[arg(long)]
    pub q_min: Option<f64>,
    #[arg(long)]
    pub q_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub descent: DescentArgs,
    /// Comma-separated lambda_z values: run the optimality scan instead.
    #[arg(long)]
    pub scan: Option<String>,
    /// Comma-separated grid refinement factors for a resolution study.
    #[arg(long)]
    pub refine: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda_z: Option<f64>,
    /// Comma-separated Q values for the width table.
    #[arg(long)]
    pub q_list: Option<String>,
    /// Comma-separated lambda_z values for the Gaussian-bound table.
    #[arg(long)]
    pub lambda_list: Option<String>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UnitsArgs {
    /// Comma-separated particle numbers.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated dimensionless interaction strengths.
    #[arg(long)]
    pub q: Option<String>,
    /// Scattering length in angstrom (negative).
    #[arg(long, allow_hyphen_values = true)]
    pub a_angstrom: Option<f64>,
    /// Radial trap frequency in Hz.
    #[arg(long)]
    pub nu_hz: Option<f64>,
    /// Atomic mass in unified atomic mass units.
    #[arg(long)]
    pub mass_u: Option<f64>,
    /// angular (omega = 2 pi nu) | linear (omega = nu)
    #[arg(long)]
    pub convention: Option<gpe_core::units::FrequencyConvention>,
    #[arg(long)]
    pub lambda_z: Option<f64>,
    /// CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[command(flatten)]
    pub descent: DescentArgs,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relax to the ground state and write the state and a summary row.
    #[command(allow_negative_numbers = true)]
    Ground(GroundArgs),
    /// Propagate in real time and write the observable trajectory.
    #[command(allow_negative_numbers = true)]
    Evolve(EvolveArgs),
    /// Bisect for the critical interaction strength.
    #[command(allow_negative_numbers = true)]
    Collapse(CollapseArgs),
    /// Tables of the closed-form profiles, widths and Gaussian bounds.
    #[command(allow_negative_numbers = true)]
    Analytic(AnalyticArgs),
    /// Convert between particle numbers and Q.
    #[command(allow_negative_numbers = true)]
    Units(UnitsArgs),
    /// Data sets behind the section and comparison figures.
    Figures(FiguresArgs),
}

fn configure_threads(n: Option<usize>) -> Result<()> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(UsageError("--threads must be at least 1".into()).into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("cannot configure thread pool: {e}"))?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("warning: built without the `parallel` feature; running on one thread");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    let mut cfg = config::Resolver::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ground(a) => commands::ground(&mut cfg, a),
        Command::Evolve(a) => commands::evolve(&mut cfg, a),
        Command::Collapse(a) => commands::collapse(&mut cfg, a),
        Command::Analytic(a) => commands::analytic(&mut cfg, a),
        Command::Units(a) => commands::units(&mut cfg, a),
        Command::Figures(a) => commands::figures(&mut cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
