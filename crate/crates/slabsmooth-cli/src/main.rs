//! Command-line front end for the slabsmooth smoothing engine.
//!
//! Every run resolves its parameters from defaults, an optional
//! key=value config file, and command-line flags (in that order of
//! precedence), then writes CSV outputs plus a manifest that reproduces
//! the run byte for byte via `--config <manifest>`.

mod commands;
mod config;
mod emit;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;

use config::{parse_config_file, RunConfig};

/// Exit codes: 0 success, 2 usage, 3 data, 4 numerical.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<slabsmooth::Error> for CliError {
    fn from(err: slabsmooth::Error) -> Self {
        use slabsmooth::Error::*;
        let code = match err {
            InvalidConfig(_) => 2,
            Io(_)
            | Csv(_)
            | Input { .. }
            | TooFewPoints { .. }
            | SizeError { .. }
            | RankDeficient { .. }
            | IndexOutOfRange { .. } => 3,
            DegenerateFit
            | NonOrthogonalBasis { .. }
            | NonFiniteState { .. }
            | QuadraturePrecision { .. }
            | Domain(_)
            | TooManyFailures { .. } => 4,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "slabsmooth",
    version,
    about = "Adaptive spike-and-slab smoothing over orthogonal polynomial bases",
    after_help = "Commands: fit-global | fit-local | dof-curve | theory-density | simulate\n\
                  Values may also come from a key=value config file (--config); flags override it.\n\
                  Every run writes a manifest; `slabsmooth --config <manifest>` reproduces it exactly."
)]
struct Cli {
    /// key=value config file; '#' starts a comment
    #[arg(long)]
    config: Option<PathBuf>,
    /// fit-global | fit-local | dof-curve | theory-density | simulate
    #[arg(long)]
    command: Option<String>,
    /// CSV file with columns x, y and optional group
    #[arg(long)]
    input: Option<String>,
    /// polynomial basis dimension
    #[arg(long)]
    degree: Option<String>,
    /// nearest-neighbour bandwidth (local commands)
    #[arg(long)]
    bandwidth: Option<String>,
    /// gamma shape of the hypervariance prior
    #[arg(long)]
    a1: Option<String>,
    /// gamma rate of the hypervariance prior
    #[arg(long)]
    a2: Option<String>,
    /// spike scale in (0,1)
    #[arg(long)]
    v0: Option<String>,
    /// total Gibbs sweeps
    #[arg(long)]
    iters: Option<String>,
    /// discarded sweeps
    #[arg(long)]
    burnin: Option<String>,
    /// keep-every-k thinning
    #[arg(long)]
    thin: Option<String>,
    /// RNG seed
    #[arg(long)]
    seed: Option<String>,
    /// worker threads for per-point local fits
    #[arg(long)]
    jobs: Option<String>,
    /// output directory (default .)
    #[arg(long)]
    out: Option<PathBuf>,
    /// synthetic mean: sine | piecewise-flat | polynomial | flat-then-sine
    #[arg(long)]
    mean: Option<String>,
    /// synthetic sample size
    #[arg(long)]
    n: Option<String>,
    /// synthetic noise standard deviation
    #[arg(long)]
    noise_sd: Option<String>,
    #[arg(long)]
    x_min: Option<String>,
    #[arg(long)]
    x_max: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    frequency: Option<String>,
    #[arg(long)]
    phase: Option<String>,
    /// flat level before the split (flat-then-sine)
    #[arg(long)]
    level: Option<String>,
    /// split point (flat-then-sine)
    #[arg(long)]
    split: Option<String>,
    /// comma-separated polynomial coefficients, constant first
    #[arg(long)]
    coeffs: Option<String>,
    /// comma-separated step levels (piecewise-flat)
    #[arg(long)]
    levels: Option<String>,
    /// simulate scenario: sparse-signal | overparam | curve
    #[arg(long)]
    scenario: Option<String>,
    /// fitting pipeline for simulate curve: global | local
    #[arg(long)]
    fit: Option<String>,
    /// second basis dimension for the overparam scenario
    #[arg(long)]
    degree_alt: Option<String>,
    /// number of nonzero coefficients (sparse-signal)
    #[arg(long)]
    n_signals: Option<String>,
    /// signal size as a multiple of the noise level (sparse-signal)
    #[arg(long)]
    signal_strength: Option<String>,
    /// minimum local window size (default degree + 3)
    #[arg(long)]
    min_neighbors: Option<String>,
    /// conditioning value of the slab proportion (theory-density)
    #[arg(long)]
    w: Option<String>,
    /// comma-separated Z² values (theory-density)
    #[arg(long)]
    z_sq: Option<String>,
    /// grid resolution for density tables
    #[arg(long)]
    grid_points: Option<String>,
    /// quadrature resolution for the limiting mean
    #[arg(long)]
    quad_points: Option<String>,
    /// emit effective-kernel CSVs for this point index (fit-global)
    #[arg(long)]
    kernel_index: Option<String>,
}

impl Cli {
    /// Flags that were actually given, as config-file keys.
    fn to_settings(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        };
        put("command", &self.command);
        put("input", &self.input);
        put("degree", &self.degree);
        put("bandwidth", &self.bandwidth);
        put("a1", &self.a1);
        put("a2", &self.a2);
        put("v0", &self.v0);
        put("iters", &self.iters);
        put("burnin", &self.burnin);
        put("thin", &self.thin);
        put("seed", &self.seed);
        put("jobs", &self.jobs);
        put("mean", &self.mean);
        put("n", &self.n);
        put("noise-sd", &self.noise_sd);
        put("x-min", &self.x_min);
        put("x-max", &self.x_max);
        put("amplitude", &self.amplitude);
        put("frequency", &self.frequency);
        put("phase", &self.phase);
        put("level", &self.level);
        put("split", &self.split);
        put("coeffs", &self.coeffs);
        put("levels", &self.levels);
        put("scenario", &self.scenario);
        put("fit", &self.fit);
        put("degree-alt", &self.degree_alt);
        put("n-signals", &self.n_signals);
        put("signal-strength", &self.signal_strength);
        put("min-neighbors", &self.min_neighbors);
        put("w", &self.w);
        put("z-sq", &self.z_sq);
        put("grid-points", &self.grid_points);
        put("quad-points", &self.quad_points);
        put("kernel-index", &self.kernel_index);
        map
    }
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    let file_settings = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let cfg = RunConfig::resolve(file_settings, cli.to_settings())?;
    let output = commands::run(&cfg, &out_dir)?;
    for note in &output.notes {
        println!("{note}");
    }
    for file in &output.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = real_main(cli) {
        eprintln!("error: {}", err.message);
        std::process::exit(err.code);
    }
}
