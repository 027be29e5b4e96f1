//! Command line interface for certified Hausdorff dimension brackets.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hausdim_cli::commands::{
    cmd_cantor, cmd_complex, cmd_perturbed, cmd_reproduce, print_reproduce_report, TableId,
};
use hausdim_cli::config::{
    jobs_from_env, parse_config_file, ComplexSetName, OutputFormat, PartialConfig,
};

#[derive(Parser)]
#[command(
    name = "hausdim",
    version,
    about = "Certified upper and lower bounds for Hausdorff dimension of self-conformal sets"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Optional key=value configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Append the result to this ledger file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Ledger format: json (NDJSON) or csv.
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<OutputFormat>,
    /// Worker threads (default: all cores; HAUSDIM_JOBS also works).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Width tolerance for the dimension bracket endpoints.
    #[arg(long, global = true, value_name = "TOL")]
    tol_s: Option<f64>,
    /// Relative tolerance for the eigenvalue estimate.
    #[arg(long, global = true, value_name = "TOL")]
    tol_eig: Option<f64>,
    /// Multiplier (>= 1) applied to interpolation error corrections.
    #[arg(long, global = true, value_name = "F")]
    safety_factor: Option<f64>,
    /// Extra rings of planar mesh nodes beyond the folded images.
    #[arg(long, global = true, value_name = "N")]
    margin_rings: Option<usize>,
    /// Interval subdivision depth before 1D mesh construction.
    #[arg(long, global = true, value_name = "N")]
    refine_depth: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Bounded-digit continued fraction set, e.g. --digits 1,2
    Cantor {
        /// Allowed partial quotients, comma separated, distinct.
        #[arg(long, value_delimiter = ',', required = true)]
        digits: Vec<u32>,
        /// Mesh spacing on the unit interval.
        #[arg(long)]
        h: Option<f64>,
        /// Write the certifying upper matrix (coordinate form) here.
        #[arg(long, value_name = "PATH")]
        dump_matrix: Option<PathBuf>,
    },
    /// Nonlinear perturbation of the middle-thirds construction.
    Perturbed {
        /// Perturbation strength in [0, 1].
        #[arg(long)]
        lambda: f64,
        /// Mesh spacing on the unit interval.
        #[arg(long)]
        h: Option<f64>,
        /// Write the certifying upper matrix (coordinate form) here.
        #[arg(long, value_name = "PATH")]
        dump_matrix: Option<PathBuf>,
    },
    /// Complex continued fraction set over a Gaussian digit family.
    Complex {
        /// Digit family: i1, i2, or i3.
        #[arg(long)]
        set: ComplexSetName,
        /// Mesh spacing 1/N on the half-disk bounding box.
        #[arg(long)]
        h: Option<f64>,
        /// Digit truncation radius (i1 and i2 only; must exceed 2).
        #[arg(long, value_name = "R")]
        truncation_radius: Option<f64>,
        /// Write the certifying upper matrix (coordinate form) here.
        #[arg(long, value_name = "PATH")]
        dump_matrix: Option<PathBuf>,
    },
    /// Re-run a published reference table and compare endpoints.
    Reproduce {
        /// Table identifier: t1, t3, or t4.
        table: TableId,
        /// Only rows whose label contains this substring.
        #[arg(long)]
        subset: Option<String>,
        /// Per-row cost ceiling; costlier rows are skipped, not failed.
        #[arg(long, default_value_t = 60.0)]
        budget_secs: f64,
    },
}

fn flag_config(common: &CommonArgs) -> PartialConfig {
    PartialConfig {
        h: None,
        truncation_radius: None,
        tol_s: common.tol_s,
        tol_eig: common.tol_eig,
        margin_rings: common.margin_rings,
        refine_depth: common.refine_depth,
        safety_factor: common.safety_factor,
        jobs: common.jobs,
        out: common.out.clone(),
        format: common.format,
    }
}

/// Flags beat the config file; the config file beats HAUSDIM_JOBS.
fn resolve_options(common: &CommonArgs) -> anyhow::Result<PartialConfig> {
    let mut merged = flag_config(common);
    if let Some(path) = &common.config {
        merged = merged.or(parse_config_file(path)?);
    }
    if merged.jobs.is_none() {
        merged.jobs = jobs_from_env();
    }
    Ok(merged)
}

fn install_thread_pool(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // A second initialization in the same process is harmless; the
        // first pool wins and rayon reports an error we can ignore.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut options = resolve_options(&cli.common)?;
    install_thread_pool(options.jobs);
    match cli.command {
        Command::Cantor {
            digits,
            h,
            dump_matrix,
        } => {
            if let Some(h) = h {
                options.h = Some(h);
            }
            cmd_cantor(digits, options, dump_matrix)?;
            Ok(true)
        }
        Command::Perturbed {
            lambda,
            h,
            dump_matrix,
        } => {
            if let Some(h) = h {
                options.h = Some(h);
            }
            cmd_perturbed(lambda, options, dump_matrix)?;
            Ok(true)
        }
        Command::Complex {
            set,
            h,
            truncation_radius,
            dump_matrix,
        } => {
            if let Some(h) = h {
                options.h = Some(h);
            }
            if let Some(radius) = truncation_radius {
                options.truncation_radius = Some(radius);
            }
            cmd_complex(set, options, dump_matrix)?;
            Ok(true)
        }
        Command::Reproduce {
            table,
            subset,
            budget_secs,
        } => {
            let report = cmd_reproduce(table, subset.as_deref(), budget_secs, options)?;
            print_reproduce_report(&report);
            Ok(report.all_ok())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
