//! Batch front-end for wavelet-variance change-point analysis.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wavebreak::gamma::GammaMethod;
use wavebreak_cli::commands::{
    self, cmd_detect, cmd_experiment, cmd_gamma_table, cmd_simulate, DetectArgs, ExperimentArgs,
    GammaTableArgs, SimulateArgs,
};
use wavebreak_cli::pipeline::{default_kappa, AnalysisSettings};
use wavebreak_cli::CliError;

#[derive(Parser)]
#[command(
    name = "wavebreak",
    about = "Detect abrupt changes of long-range-dependence / self-similarity \
             exponents via wavelet-variance log-log regression",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic series from a scenario and write it as CSV.
    Simulate(SimulateCli),
    /// Detect change points in a series and estimate per-segment exponents.
    Detect(DetectCli),
    /// Run a scenario many times and summarize the estimates.
    Experiment(ExperimentCli),
    /// Build or extend a persisted table of asymptotic covariance matrices.
    GammaTable(GammaTableCli),
}

#[derive(Args)]
struct SimulateCli {
    /// Scenario id: farima-1cp, fbm-2cp, or custom.
    #[arg(long, default_value = "farima-1cp")]
    scenario: String,
    /// JSON spec for --scenario custom.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Series length N (indices 0..=N); defaults to the scenario's setting.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Offset each segment by the previous segment's last value (plots only).
    #[arg(long, default_value_t = false)]
    level_pasting: bool,
    /// Output CSV path; a .truth.json sidecar is written alongside.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct DetectCli {
    /// Input series CSV (header `x`, one value per line).
    #[arg(long)]
    input: PathBuf,
    /// Result JSON path; a .plot.csv companion is written alongside.
    /// Prints JSON to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Analysis regime: lrd or fbm.
    #[arg(long, default_value = "lrd")]
    regime: String,
    /// Number of change points (known in advance).
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Scale-rule exponent offset; defaults to 0.05 (lrd) or 0.01 (fbm).
    #[arg(long)]
    kappa: Option<f64>,
    /// Scale multipliers.
    #[arg(long, default_value = "1,2,3,4,5")]
    scales: String,
    #[arg(long, default_value = "poly4")]
    wavelet: String,
    /// Minimum segment length override.
    #[arg(long)]
    min_seg: Option<usize>,
    /// Candidate grid step override.
    #[arg(long)]
    grid_step: Option<usize>,
    /// Search window length override.
    #[arg(long)]
    window: Option<usize>,
    /// Rescales the refinement margin ceil(scale * N / v_N).
    #[arg(long, default_value_t = 1.0)]
    margin_scale: f64,
    /// Slope-spread override (max alpha - min alpha) for the fbm rate rule.
    #[arg(long)]
    alpha_spread: Option<f64>,
    /// Gamma table path (defaults to $WAVEBREAK_GAMMA_DIR/<auto-name>.json).
    #[arg(long)]
    gamma_table: Option<PathBuf>,
    /// Monte Carlo replicates used when gamma nodes must be computed.
    #[arg(long)]
    gamma_replicates: Option<usize>,
}

#[derive(Args)]
struct ExperimentCli {
    /// Scenario id: farima-1cp, fbm-2cp, or custom.
    #[arg(long)]
    scenario: String,
    /// JSON spec for --scenario custom.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Series length override.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Summary CSV path (a .json companion is written alongside).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    gamma_table: Option<PathBuf>,
    #[arg(long)]
    gamma_replicates: Option<usize>,
}

#[derive(Args)]
struct GammaTableCli {
    #[arg(long, default_value = "lrd")]
    regime: String,
    #[arg(long, default_value = "1,2,3,4,5")]
    scales: String,
    #[arg(long, default_value = "poly4")]
    wavelet: String,
    /// Node construction: mc or analytic (analytic is fbm-only).
    #[arg(long, default_value = "mc")]
    method: String,
    #[arg(long, default_value_t = 512)]
    replicates: usize,
    #[arg(long, default_value_t = commands::DEFAULT_GAMMA_SEED)]
    seed: u64,
    /// Restrict the precomputed slope range.
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Output path (defaults to $WAVEBREAK_GAMMA_DIR/<auto-name>.json).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => {
            commands::ensure_parent_exists(&args.output)?;
            cmd_simulate(&SimulateArgs {
                scenario: args.scenario,
                spec_path: args.spec,
                n: args.n,
                seed: args.seed,
                level_pasting: args.level_pasting,
                output: args.output,
            })
        }
        Command::Detect(args) => {
            let regime = commands::parse_regime(&args.regime)?;
            let mut settings = AnalysisSettings::new(regime, args.m);
            settings.kappa = args.kappa.unwrap_or_else(|| default_kappa(regime));
            settings.multipliers = commands::parse_multipliers(&args.scales)?;
            settings.wavelet = args.wavelet;
            settings.min_seg = args.min_seg;
            settings.grid_step = args.grid_step;
            settings.window = args.window;
            settings.margin_scale = args.margin_scale;
            settings.alpha_spread = args.alpha_spread;
            if let Some(path) = &args.output {
                commands::ensure_parent_exists(path)?;
            }
            cmd_detect(&DetectArgs {
                input: args.input,
                output: args.output,
                settings,
                gamma_table: args.gamma_table,
                gamma_replicates: args.gamma_replicates,
            })
        }
        Command::Experiment(args) => {
            if let Some(path) = &args.output {
                commands::ensure_parent_exists(path)?;
            }
            cmd_experiment(&ExperimentArgs {
                scenario: args.scenario,
                spec_path: args.spec,
                n: args.n,
                replicates: args.replicates,
                seed: args.seed,
                output: args.output,
                gamma_table: args.gamma_table,
                gamma_replicates: args.gamma_replicates,
            })
        }
        Command::GammaTable(args) => {
            let regime = commands::parse_regime(&args.regime)?;
            let method = match args.method.as_str() {
                "mc" => GammaMethod::MonteCarlo,
                "analytic" => GammaMethod::Analytic,
                other => {
                    return Err(CliError::config(
                        "bad_method",
                        format!("unknown method `{other}` (mc, analytic)"),
                    ))
                }
            };
            cmd_gamma_table(&GammaTableArgs {
                regime,
                multipliers: commands::parse_multipliers(&args.scales)?,
                wavelet: args.wavelet,
                method,
                replicates: args.replicates,
                seed: args.seed,
                alpha_min: args.alpha_min,
                alpha_max: args.alpha_max,
                output: args.output,
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let payload = serde_json::json!({
                "error": { "code": e.code, "message": e.message }
            });
            eprintln!("{payload}");
            ExitCode::from(e.class.exit_code() as u8)
        }
    }
}
