//! `beltrami`: solve Beltrami, Dirichlet and conductivity problems on
//! sampled grids and evaluate solvability diagnostics.
//!
//! Exit status: 0 on success, 1 on invalid input or domain errors, 2 when an
//! iterative solver fails to converge.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;

const FORMATS: &str = "File formats: fields BELTRAMI-FIELD v1, domains BELTRAMI-DOMAIN v1, \
boundary data CSV (component,x,y,value), probes CSV (x,y), reports `key: value` lines. \
Files with another version are rejected.";

#[derive(Parser, Debug)]
#[command(name = "beltrami", version, about, after_help = FORMATS)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "BELTRAMI_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized solution f = z + o(1) of f_z̄ = μ f_z.
    #[command(after_help = FORMATS)]
    SolveBeltrami {
        #[arg(long)]
        mu: PathBuf,
        /// Output directory for f, fz, fzbar and the report.
        #[arg(long)]
        out: PathBuf,
        /// Use the O(N⁴) direct quadrature instead of FFT transforms.
        #[arg(long)]
        direct_quadrature: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Dirichlet problem for the Beltrami equation on a domain.
    #[command(after_help = FORMATS)]
    SolveDirichlet {
        /// Beltrami coefficient; zero when omitted.
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write CSV grids of u, v, |f| and the boundary error profile.
        #[arg(long)]
        emit_plots: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Dirichlet problem for div(A∇u) = 0.
    #[command(after_help = FORMATS)]
    SolvePotential {
        #[arg(long = "A", visible_alias = "a")]
        a: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        emit_plots: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solvability criteria at probe points.
    #[command(after_help = FORMATS)]
    Diagnose {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        /// Probe CSV; boundary vertices and an interior lattice when omitted.
        #[arg(long)]
        probes: Option<PathBuf>,
        /// Exponent α in ∫ exp(α K).
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Radii per shrinking ladder.
        #[arg(long, default_value_t = 12)]
        rings: usize,
        /// Report path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Convert between Beltrami coefficients and conductivity matrices.
    #[command(after_help = FORMATS)]
    ConvertMuA {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weak-form residuals of div(A∇u) = 0 against seeded bumps.
    #[command(after_help = FORMATS)]
    Verify {
        #[arg(long)]
        u: PathBuf,
        #[arg(long = "A", visible_alias = "a")]
        a: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, default_value_t = 10)]
        bumps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Annuli r₀ < |z| < 1 with data 0 inside and 1 outside, r₀ → 0.
    #[command(after_help = FORMATS)]
    DemoPuncturedDisk {
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-4])]
        radii: Vec<f64>,
        /// Radial and angular nodes of the log-polar solver.
        #[arg(long, default_value_t = 256)]
        radial: usize,
        #[arg(long, default_value_t = 64)]
        angular: usize,
        /// Grid used to check whether the hole is resolvable.
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Boundary error above which a warning is logged.
    #[arg(long, default_value_t = 1e-2)]
    boundary_tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    Mu2a,
    A2mu,
}

impl SolverArgs {
    fn config(&self, out: &std::path::Path) -> RunConfig {
        RunConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            boundary_tol: self.boundary_tol,
            out: Some(out.to_path_buf()),
            ..RunConfig::default()
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::SolveBeltrami {
            mu,
            out,
            direct_quadrature,
            solver,
        } => commands::solve_beltrami(&mu, direct_quadrature, &solver.config(&out)),
        Command::SolveDirichlet {
            mu,
            domain,
            phi,
            out,
            emit_plots,
            solver,
        } => commands::solve_dirichlet(mu.as_deref(), &domain, &phi, emit_plots, &solver.config(&out)),
        Command::SolvePotential {
            a,
            domain,
            phi,
            out,
            emit_plots,
            solver,
        } => commands::solve_potential(&a, &domain, &phi, emit_plots, &solver.config(&out)),
        Command::Diagnose {
            mu,
            domain,
            probes,
            alpha,
            rings,
            report,
        } => commands::diagnose(
            &mu,
            &domain,
            &RunConfig {
                probes,
                alpha,
                rings,
                report,
                ..RunConfig::default()
            },
        ),
        Command::ConvertMuA { input, direction, out } => {
            commands::convert_mu_a(&input, matches!(direction, Direction::Mu2a), &out)
        }
        Command::Verify {
            u,
            a,
            domain,
            bumps,
            seed,
            report,
        } => commands::verify(
            &u,
            &a,
            &domain,
            bumps,
            &RunConfig {
                seed,
                report,
                ..RunConfig::default()
            },
        ),
        Command::DemoPuncturedDisk {
            radii,
            radial,
            angular,
            n,
            report,
        } => commands::demo_punctured_disk(&radii, radial, angular, n, report.as_deref()),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let converged = err
        .chain()
        .filter_map(|e| e.downcast_ref::<beltrami_core::Error>())
        .any(|e| e.is_convergence_failure());
    if converged {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
