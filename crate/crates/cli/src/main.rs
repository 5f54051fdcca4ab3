//! `maslov`: Maslov indices, `Q_β` grids and the sphere example from the command line.

mod commands;
mod error;
mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use maslov_core::verify::Mutation;
use maslov_core::Orientation;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "maslov", version, about = "Maslov indices and Maslov data of circle actions")]
struct Cli {
    /// Minimum number of loop intervals; orbits are refined beyond it as needed.
    #[arg(long, global = true, default_value_t = 8)]
    samples: usize,
    /// Worker threads for point grids.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Largest accepted degree residual (at most 0.25).
    #[arg(long, global = true, default_value_t = commands::MAX_RESIDUAL)]
    tolerance: f64,
    /// Use left-handed sphere frames; flips every orientation-dependent sign.
    #[arg(long, global = true)]
    flip_orientation: bool,
    /// Write the report (or CSV for `qbeta`) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized inputs.
    #[arg(long, global = true, env = "MASLOV_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MutationArg {
    ConjugateDetSquared,
    DropSquare,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maslov index of a sampled loop of Lagrangian planes.
    Index {
        loop_file: PathBuf,
        /// Connection spec, inline JSON or a path; defaults to the flat connection.
        #[arg(long)]
        connection: Option<String>,
    },
    /// Q_beta at every point of a points file (JSON array or CSV).
    Qbeta {
        /// Action spec, inline JSON or a path.
        #[arg(long)]
        action: String,
        /// Connection spec, inline JSON or a path.
        #[arg(long)]
        connection: String,
        #[arg(long)]
        points: PathBuf,
    },
    /// The rotation action on the sphere: r, the characteristic number, pole indices and fits.
    SphereDemo {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0,1")]
        axis: Vec<f64>,
    },
    /// Run the invariant suite; exits 1 if any check fails.
    Verify {
        /// Break det² on purpose to confirm the suite notices.
        #[arg(long, hide = true)]
        mutate: Option<MutationArg>,
    },
}

pub struct Settings {
    pub samples: usize,
    pub jobs: usize,
    pub tolerance: f64,
    pub orientation: Orientation,
    pub seed: Option<u64>,
    pub mutation: Option<Mutation>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if !(cli.tolerance > 0.0 && cli.tolerance <= commands::MAX_RESIDUAL) {
        return Err(CliError::Input(format!("--tolerance must lie in (0, {}]", commands::MAX_RESIDUAL)));
    }
    if cli.jobs == 0 {
        return Err(CliError::Input("--jobs must be at least 1".into()));
    }
    let mutation = match &cli.command {
        Command::Verify { mutate: Some(MutationArg::ConjugateDetSquared) } => Some(Mutation::ConjugateDetSquared),
        Command::Verify { mutate: Some(MutationArg::DropSquare) } => Some(Mutation::DropSquare),
        _ => None,
    };
    let settings = Settings {
        samples: cli.samples,
        jobs: cli.jobs,
        tolerance: cli.tolerance,
        orientation: if cli.flip_orientation { Orientation::Reversed } else { Orientation::RightHanded },
        seed: cli.seed,
        mutation,
    };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Index { loop_file, connection } => {
            let r = commands::index(&settings, loop_file, connection.as_deref())?;
            commands::write_output(out, &r.to_json())
        }
        Command::Qbeta { action, connection, points } => {
            let (r, csv) = commands::qbeta(&settings, action, connection, points)?;
            match out {
                Some(_) => {
                    commands::write_output(out, &csv)?;
                    commands::write_output(None, &r.to_json())
                }
                None => commands::write_output(None, &csv),
            }
        }
        Command::SphereDemo { axis } => {
            let r = commands::sphere_demo(&settings, axis)?;
            commands::write_output(out, &r.to_json())
        }
        Command::Verify { .. } => {
            let v = commands::verify(&settings);
            commands::write_output(out, &v.report.to_json())?;
            if v.failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verify(v.failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("maslov: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
