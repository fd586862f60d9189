//! `netclust`: clustering-based reduction of mass–damper and
//! mass–spring–damper networks.
//!
//! Exit codes: 0 on success, 1 when `check-aep` finds the partition is not
//! almost equitable, 2 on any error.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use netclust::partition::{DEFAULT_ENUMERATION_CAP, DEFAULT_TOL};
use netclust::KindFilter;

#[derive(Parser)]
#[command(name = "netclust", version, about = "Structure-preserving clustering reduction of network systems")]
struct Cli {
    /// Tolerance of the almost-equitability checks.
    #[arg(long, global = true, env = "NETCLUST_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a partition is almost equitable; exits 0 if so, 1 if not.
    CheckAep {
        network: PathBuf,
        partition: PathBuf,
        /// Edges defining the effective Laplacian: damper, spring or all.
        #[arg(long, default_value = "damper")]
        kind: KindFilter,
    },
    /// Cluster a network by a partition.
    Reduce {
        network: PathBuf,
        partition: PathBuf,
        /// 1 keeps only damper edges, 2 keeps springs and dampers.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Reduced network file; without it network and mapping go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Vertex-to-cell and edge-survival map (default: OUT with `.mapping.json`).
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Closed-form H2 norms and reduction error, optionally cross-checked numerically.
    H2 {
        network: PathBuf,
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Also run the numerical oracles and report residuals.
        #[arg(long)]
        oracle: bool,
    },
    /// List every almost equitable partition, by ascending reduction error.
    Enumerate {
        network: PathBuf,
        #[arg(long, default_value = "damper")]
        kind: KindFilter,
        /// Refuse networks with more vertices than this.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        max_n: usize,
    },
    /// Simulate from rest, and compare with the reduced model when a partition is given.
    ///
    /// Input signals: `zero`, `impulse:K`, `step:K` or `samples:FILE` (CSV rows
    /// `t,u_1,...` after a header). An impulse on channel K is applied as the
    /// initial state jump x0 + B e_K.
    Simulate {
        network: PathBuf,
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        #[arg(long, default_value = "impulse:1")]
        input: String,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Full trajectory as CSV.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Reduced trajectory as CSV (default: OUT_CSV with `.reduced.csv`).
        #[arg(long)]
        reduced_csv: Option<PathBuf>,
    },
    /// Build a network with a known almost equitable partition from a quotient description.
    Synth {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Partition file (default: OUT with `.partition.json`).
        #[arg(long)]
        partition_out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<u8> {
    let tol = cli.tol;
    match cli.command {
        Command::CheckAep { network, partition, kind } => commands::check_aep(&network, &partition, kind, tol),
        Command::Reduce { network, partition, order, out, mapping } => {
            commands::reduce(&network, &partition, order, out.as_deref(), mapping.as_deref())
        }
        Command::H2 { network, partition, order, oracle } => commands::h2(&network, partition.as_deref(), order, oracle, tol),
        Command::Enumerate { network, kind, max_n } => commands::enumerate(&network, kind, max_n, tol),
        Command::Simulate { network, partition, order, input, t_end, dt, out_csv, reduced_csv } => {
            commands::simulate(&commands::SimulateArgs {
                network: &network,
                partition: partition.as_deref(),
                order,
                input: &input,
                t_end,
                dt,
                out_csv: out_csv.as_deref(),
                reduced_csv: reduced_csv.as_deref(),
            })
        }
        Command::Synth { spec, out, partition_out } => commands::synth(&spec, out.as_deref(), partition_out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
