//! Command-line surface: argument definitions and dispatch.

mod commands;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use graphwave::pose::DEFAULT_THRESHOLD;
use graphwave::wave::{DEFAULT_NOISE_SCALE, DEFAULT_SEED};

/// Stationary mode extraction and graph recovery from wave signals.
#[derive(Parser, Debug)]
#[command(name = "graphwave", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a signal panel from a built-in generator or a graph.
    Simulate(SimulateArgs),
    /// Extract modes and amplitudes from a panel.
    Extract(ExtractArgs),
    /// Recover graph weights from a panel.
    Recover(RecoverArgs),
    /// Fit modes on a training prefix and forecast beyond it.
    Forecast(ForecastArgs),
    /// Windowed graph recovery on joint-tracking data.
    Pose(PoseArgs),
    /// Laplacian spectrum of a graph.
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    /// Single series `2 sin(0.016πt) + 3 cos(0.04πt) + sin(0.6πt)/2 + 3`.
    ThreeTone,
    /// Seven-node travelling cosine on a linear trend.
    TravellingCosine,
    /// Wave on the 21-node path graph from the noisy ramp.
    PathWave,
    /// Truncated cosine-series wave on an interval.
    IntervalWave,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// `0.5, 1.5, …, n - 0.5`
    HalfInteger,
    /// `0, 1, …, n`
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Stationary,
    General,
}

/// Built-in signal generators. At most one of `--demo`, `--path`, `--graph`
/// and `--interval-wave` may be given.
#[derive(Args, Debug, Clone)]
pub struct GeneratorArgs {
    #[arg(long, value_enum, conflicts_with_all = ["path", "graph", "interval_wave"])]
    pub demo: Option<Demo>,
    /// Wave on the path graph with this many nodes.
    #[arg(long, value_name = "N", conflicts_with_all = ["graph", "interval_wave"])]
    pub path: Option<usize>,
    /// Wave on a graph read from JSON.
    #[arg(long, value_name = "FILE", conflicts_with = "interval_wave")]
    pub graph: Option<PathBuf>,
    /// Cosine-series wave on the interval `[0, nodes]`.
    #[arg(long)]
    pub interval_wave: bool,
    /// Wave speed root; generators default to 1.5.
    #[arg(long)]
    pub sqrt_c: Option<f64>,
    /// Number of integer time samples, starting at t = 1.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Scale of the uniform noise added to the ramp initial condition.
    #[arg(long, default_value_t = DEFAULT_NOISE_SCALE)]
    pub noise: f64,
    /// Node count for the interval wave.
    #[arg(long, default_value_t = 21)]
    pub nodes: usize,
    /// Cosine coefficients kept for the interval wave.
    #[arg(long, default_value_t = 11)]
    pub terms: usize,
    #[arg(long, value_enum, default_value_t = Grid::HalfInteger)]
    pub grid: Grid,
    /// Keep every k-th grid point.
    #[arg(long, default_value_t = 1)]
    pub grid_stride: usize,
}

/// Panel from a CSV file or a generator.
#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Panel CSV (`t,<labels>`).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["demo", "path", "graph", "interval_wave"])]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Number of conjugate frequency pairs.
    #[arg(long = "n-pairs", value_name = "N")]
    pub n_pairs: Option<usize>,
    /// Minimum number of time shifts.
    #[arg(long, value_name = "L")]
    pub lag: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub normalize_modes: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Also write initial-condition, graph Fourier and heatmap CSVs.
    #[arg(long)]
    pub emit_plots: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Method::Stationary)]
    pub method: Method,
    /// Polynomial degree for the general method; defaults to 2N + 1.
    #[arg(long, value_name = "M")]
    pub order: Option<usize>,
    /// Use only the first this many samples.
    #[arg(long)]
    pub train: Option<usize>,
    /// Also write the singular values of the stationary system.
    #[arg(long)]
    pub emit_plots: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub positivize: bool,
    /// Trailing samples held out for validation.
    #[arg(long, default_value_t = 0)]
    pub horizon: usize,
    /// Absolute amplitude-norm cutoff; default is relative to the largest norm.
    #[arg(long)]
    pub amp_tol: Option<f64>,
    /// Held-out MSE cutoff; default is relative to the panel variance.
    #[arg(long)]
    pub mse_tol: Option<f64>,
    /// Retry once with a larger model when validation fails.
    #[arg(long)]
    pub retry: bool,
    /// Edge list keeps weights strictly above this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Method::Stationary)]
    pub method: Method,
    #[arg(long, value_name = "M")]
    pub order: Option<usize>,
    /// Training samples; defaults to the whole input panel, or the minimal
    /// window for generators.
    #[arg(long)]
    pub train: Option<usize>,
    /// Number of time steps to forecast after the training window.
    #[arg(long, default_value_t = 0)]
    pub horizon: usize,
    /// Also write the true signal over training and forecast times when known.
    #[arg(long)]
    pub emit_plots: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PoseArgs {
    /// Joint CSV.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// `wide` (frame,j1_x,j1_y,…) or `long` (frame,joint,x,y).
    #[arg(long, default_value = "wide")]
    pub layout: graphwave::pose::JointLayout,
    #[arg(long = "n-pairs", value_name = "N", default_value_t = 5)]
    pub n_pairs: usize,
    #[arg(long, value_name = "L", default_value_t = 4)]
    pub lag: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub normalize_modes: bool,
    /// Comma-separated window start frames.
    #[arg(long, value_delimiter = ',', conflicts_with = "stride")]
    pub windows: Vec<i64>,
    /// Generate windows every this many frames.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, value_name = "N", conflicts_with = "graph", required_unless_present = "graph")]
    pub path: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Report the sampling-frequency check for this wave speed root.
    #[arg(long)]
    pub sqrt_c: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Outcome of a successful command.
pub enum Status {
    Done,
    Advisory,
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Extract(a) => commands::extract(a),
        Command::Recover(a) => commands::recover(a),
        Command::Forecast(a) => commands::forecast(a),
        Command::Pose(a) => commands::pose(a),
        Command::Spectrum(a) => commands::spectrum(a),
    };
    match result {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Advisory) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
