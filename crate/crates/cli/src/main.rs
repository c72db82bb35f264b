mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ModelChoice, PlanMethod};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or missing input; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// A pipeline stage failed; exit code 3.
    #[error("error: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "golfbot", version, about = "Simulated golf-putting robot: surface fitting, stroke learning, planning and play")]
pub struct Cli {
    /// Scenario config (JSON). Omitted fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a polynomial surface model to a point cloud CSV (x,y,z).
    FitSurface {
        #[arg(long)]
        cloud: Option<PathBuf>,
        /// Polynomial degree in x and y.
        #[arg(long, num_args = 2, value_names = ["DX", "DY"])]
        degree: Option<Vec<usize>>,
    },
    /// Simulate random strokes and write the training dataset.
    GenData {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Train the forward and/or inverse stroke model.
    Train {
        #[arg(long, value_enum)]
        model: Option<ModelChoice>,
        /// Dataset CSV; generated from the config when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Plan the stroke velocity for the configured ball and hole.
    Plan {
        #[arg(long, value_enum)]
        method: Option<PlanMethod>,
        /// Trained model JSON matching the method.
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        ball: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        hole: Option<Vec<f64>>,
    },
    /// Closed-loop simulation of one club stroke.
    StrokeSim {
        /// Commanded club rate at impact, rad/s.
        #[arg(long, allow_negative_numbers = true)]
        phi_dot: Option<f64>,
    },
    /// Plan wheel increments that bring the club to its stroke pose.
    Position,
    /// Plan, position, swing and roll one shot.
    Play {
        /// Trained inverse model JSON; trained from the config when omitted.
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        ball: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        hole: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
