//! `roofer` — fit parametric roof primitives to building point clouds and
//! emit CityGML LoD2 models, with synthetic benchmarking subcommands.
//!
//! Exit codes: 0 success, 2 input/config error, 3 geometric/extent error,
//! 4 internal failure. Logs go to stderr; data goes to files and stdout.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{FileConfig, RunConfig};

#[derive(Parser)]
#[command(name = "roofer", version, about = "Parametric roof fitting and LoD2 reconstruction")]
struct Cli {
    /// TOML config file ([optimizer]/[noise]/[io] sections); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for batch subcommands (1 = fully serial).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Weight of the footprint term in the fitting cost.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Alpha-shape disk radius in meters (default: 1.5 x mean point spacing).
    #[arg(long, global = true)]
    alpha_radius: Option<f64>,
    /// Spatial reference system name written into outputs.
    #[arg(long, global = true)]
    srs_name: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a roof primitive to one cloud and write a parameter JSON.
    Fit {
        /// Input cloud (.xyz whitespace triples or ASCII .ply).
        input: PathBuf,
        /// Force a primitive kind instead of classifying (pyramid|gable|hip).
        #[arg(long)]
        kind: Option<String>,
        /// Input format override (xyz|ply); default follows the extension.
        #[arg(long)]
        format: Option<String>,
    },
    /// Build CityGML from parameter JSONs (or clouds, fitting first).
    Reconstruct {
        /// Parameter JSONs and/or clouds; directories are scanned.
        inputs: Vec<PathBuf>,
        /// ESRI ASCII grid DEM for ground elevations and the terrain curve.
        #[arg(long)]
        dem: Option<PathBuf>,
        /// Output file; default <out-dir>/citymodel.gml.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Wall height for the no-DEM ground fallback (meters).
        #[arg(long)]
        wall_height: Option<f64>,
    },
    /// Generate a synthetic roof cloud plus its truth parameters.
    Synth {
        /// Primitive kind (pyramid|gable|hip).
        #[arg(long, default_value = "gable")]
        kind: String,
        /// Draw dimensions randomly instead of using the --length/... flags.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 10.0)]
        length: f64,
        #[arg(long, default_value_t = 8.0)]
        width: f64,
        #[arg(long, default_value_t = 3.0)]
        height: f64,
        /// Hip ridge ratio in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        ridge_ratio: f64,
        /// Rotation about Z in radians.
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        /// Eave elevation in meters.
        #[arg(long, default_value_t = 4.0)]
        eave_z: f64,
        /// Sampling density in points per square meter.
        #[arg(long)]
        density: Option<f64>,
        /// Vertical noise RMSE in meters (0 = exact surface points).
        #[arg(long)]
        noise_rmse: Option<f64>,
        /// Output file stem.
        #[arg(long, default_value = "synthetic")]
        name: String,
    },
    /// Run the synthetic stability experiment and write its table.
    Stability {
        /// Buildings generated per roof kind.
        #[arg(long)]
        buildings: Option<usize>,
        /// Noise trials per building.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        noise_rmse: Option<f64>,
        #[arg(long)]
        density: Option<f64>,
    },
    /// Evaluate reconstruction quality over a batch of clouds.
    Eval {
        /// Cloud files or directories.
        #[arg(long, required = true, num_args = 1..)]
        clouds: Vec<PathBuf>,
        /// Parameter JSONs paired with the clouds by file stem; when absent
        /// every cloud is classified and fitted first.
        #[arg(long, num_args = 0..)]
        params: Vec<PathBuf>,
        /// JSON file mapping building id to a footprint ring [[x,y],...].
        #[arg(long)]
        footprints: Option<PathBuf>,
    },
    /// fit -> reconstruct -> eval over a directory of clouds.
    Pipeline {
        /// Directory holding .xyz / .ply clouds.
        input: PathBuf,
        #[arg(long)]
        dem: Option<PathBuf>,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        wall_height: Option<f64>,
    },
}

fn exit_code_for(err: &roofer::Error) -> u8 {
    use roofer::Error::*;
    match err {
        EmptyInput(_) | Parse { .. } | InsufficientData(_) | InvalidParameter { .. }
        | ShapeMismatch(_) | Bounds(_) | Io { .. } => 2,
        DegenerateGeometry(_) | AlphaTooSmall(_) | OutOfExtent { .. } | InvalidBase(_) => 3,
        ObjectiveEvaluation { .. } | ClassificationFailure(_) => 4,
    }
}

pub(crate) enum CliError {
    Roofer(roofer::Error),
    Usage(String),
}

impl From<roofer::Error> for CliError {
    fn from(e: roofer::Error) -> Self {
        CliError::Roofer(e)
    }
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

pub(crate) type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut run = RunConfig::default();
    if let Some(path) = &cli.config {
        match FileConfig::load(path) {
            Ok(file) => run.apply_file(&file),
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(v) = cli.seed {
        run.seed = v;
        run.noise.seed = v;
    }
    if let Some(v) = cli.jobs {
        run.jobs = v.max(1);
    }
    if let Some(v) = cli.out_dir {
        run.out_dir = v;
    }
    if let Some(v) = cli.beta {
        run.optimizer.beta = v;
    }
    if let Some(v) = cli.alpha_radius {
        run.alpha_radius = Some(v);
    }
    if let Some(v) = cli.srs_name {
        run.srs_name = Some(v);
    }

    if let Err(e) = std::fs::create_dir_all(&run.out_dir) {
        eprintln!("error: cannot create output directory {}: {e}", run.out_dir.display());
        return ExitCode::from(2);
    }

    let outcome = match cli.command {
        Command::Fit { input, kind, format } => commands::fit(&run, &input, kind, format),
        Command::Reconstruct {
            inputs,
            dem,
            out,
            wall_height,
        } => commands::reconstruct(&run, &inputs, dem, out, wall_height),
        Command::Synth {
            kind,
            random,
            length,
            width,
            height,
            ridge_ratio,
            kappa,
            eave_z,
            density,
            noise_rmse,
            name,
        } => commands::synth(
            &run,
            commands::SynthArgs {
                kind,
                random,
                length,
                width,
                height,
                ridge_ratio,
                kappa,
                eave_z,
                density,
                noise_rmse,
                name,
            },
        ),
        Command::Stability {
            buildings,
            trials,
            noise_rmse,
            density,
        } => commands::stability(&run, buildings, trials, noise_rmse, density),
        Command::Eval {
            clouds,
            params,
            footprints,
        } => commands::eval(&run, &clouds, &params, footprints),
        Command::Pipeline {
            input,
            dem,
            kind,
            wall_height,
        } => commands::pipeline(&run, &input, dem, kind, wall_height),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Roofer(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
