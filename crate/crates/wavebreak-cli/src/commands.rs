//! Subcommand implementations, kept callable as library functions so the
//! acceptance suite and tests drive them directly.

use crate::error::{CliError, CliResult};
use crate::io;
use crate::pipeline::{analyze, AnalysisSettings};
use crate::scenarios;
use std::path::{Path, PathBuf};
use wavebreak::gamma::{GammaCache, GammaCacheConfig, GammaMethod};
use wavebreak::synth::gen_piecewise;
use wavebreak::wvar::Regime;

/// Fixed seed of the default gamma tables, so repeated runs share their
/// cached matrices.
pub const DEFAULT_GAMMA_SEED: u64 = 340;

pub struct SimulateArgs {
    pub scenario: String,
    pub spec_path: Option<PathBuf>,
    pub n: Option<usize>,
    pub seed: u64,
    pub level_pasting: bool,
    pub output: PathBuf,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let scenario = scenarios::by_id(&args.scenario, args.spec_path.as_deref())?;
    let n = args.n.unwrap_or(scenario.default_n);
    let mut spec = scenario.spec(n, args.seed)?;
    spec.level_pasting = args.level_pasting;
    let series = gen_piecewise(&spec)?;
    io::write_series_csv(&args.output, &series)?;
    io::write_json(&io::truth_path_for(&args.output), &spec)?;
    eprintln!(
        "wrote {} samples to {} (truth sidecar alongside)",
        series.values.len(),
        args.output.display()
    );
    Ok(())
}

pub struct DetectArgs {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub settings: AnalysisSettings,
    pub gamma_table: Option<PathBuf>,
    pub gamma_replicates: Option<usize>,
}

/// Default Monte Carlo gamma configuration for a regime/scale setting.
pub fn default_gamma_config(
    regime: Regime,
    multipliers: &[f64],
    wavelet: &str,
    replicates: Option<usize>,
) -> GammaCacheConfig {
    let mut config =
        GammaCacheConfig::mc(regime, multipliers.to_vec(), wavelet, DEFAULT_GAMMA_SEED);
    if let Some(r) = replicates {
        config.replicates = r;
    }
    config
}

pub fn cmd_detect(args: &DetectArgs) -> CliResult<()> {
    let series = io::read_series_csv(&args.input)?;
    let config = default_gamma_config(
        args.settings.regime,
        &args.settings.multipliers,
        &args.settings.wavelet,
        args.gamma_replicates,
    );
    let (gamma, table_path) = io::load_gamma_cache(config, args.gamma_table.as_deref())?;

    let mut doc = analyze(&series, &args.settings, &gamma)?;
    doc.config.input = Some(args.input.display().to_string());

    if let Some(path) = &table_path {
        // persist any nodes computed during this run
        if let Err(e) = io::save_gamma_cache(&gamma, path) {
            eprintln!("warning: could not persist gamma table: {e}");
        }
    }

    match &args.output {
        Some(path) => {
            io::write_json(path, &doc)?;
            let plot_path = io::plot_path_for(path);
            std::fs::write(&plot_path, io::plot_to_csv(&doc)).map_err(|e| {
                CliError::data("io", format!("writing {}: {e}", plot_path.display()))
            })?;
            eprintln!("wrote {} and {}", path.display(), plot_path.display());
        }
        None => {
            let json = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::numerical("serialize", e.to_string()))?;
            println!("{json}");
        }
    }
    print_detect_summary(&doc);
    Ok(())
}

fn print_detect_summary(doc: &crate::pipeline::ResultDocument) {
    eprintln!(
        "breakpoints: {:?} (tau {:?}), contrast {:.6}",
        doc.detection.k_hat, doc.detection.tau_hat, doc.detection.contrast
    );
    for est in &doc.estimates {
        match &est.inference {
            Some(inf) => eprintln!(
                "segment {}: {} = {:.4} (OLS {:.4}), 95% CI [{:.4}, {:.4}], T = {:.3}, p = {:.3}",
                est.segment_index,
                inf.exponent_label,
                inf.exponent_fgls,
                inf.exponent_ols,
                inf.exponent_ci.0,
                inf.exponent_ci.1,
                inf.t_stat.unwrap_or(f64::NAN),
                inf.p_value.unwrap_or(f64::NAN),
            ),
            None => eprintln!(
                "segment {}: unusable ({})",
                est.segment_index,
                est.reason.as_deref().unwrap_or("unknown")
            ),
        }
    }
    for w in &doc.warnings {
        eprintln!("warning [{:?}]: {}", w.code, w.message);
    }
}

pub struct ExperimentArgs {
    pub scenario: String,
    pub spec_path: Option<PathBuf>,
    pub n: Option<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub gamma_table: Option<PathBuf>,
    pub gamma_replicates: Option<usize>,
}

pub fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    let scenario = scenarios::by_id(&args.scenario, args.spec_path.as_deref())?;
    let n = args.n.unwrap_or(scenario.default_n);
    let settings = scenario.settings();
    let config = default_gamma_config(
        settings.regime,
        &settings.multipliers,
        &settings.wavelet,
        args.gamma_replicates,
    );
    let (gamma, table_path) = io::load_gamma_cache(config, args.gamma_table.as_deref())?;

    let summary =
        crate::experiment::run_experiment(&scenario, n, args.replicates, args.seed, &gamma)?;

    if let Some(path) = &table_path {
        if let Err(e) = io::save_gamma_cache(&gamma, path) {
            eprintln!("warning: could not persist gamma table: {e}");
        }
    }

    print!("{}", summary.to_table());
    for msg in &summary.failure_messages {
        eprintln!("failed replicate: {msg}");
    }
    if let Some(path) = &args.output {
        std::fs::write(path, summary.to_csv())
            .map_err(|e| CliError::data("io", format!("writing {}: {e}", path.display())))?;
        io::write_json(&path.with_extension("json"), &summary)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

pub struct GammaTableArgs {
    pub regime: Regime,
    pub multipliers: Vec<f64>,
    pub wavelet: String,
    pub method: GammaMethod,
    pub replicates: usize,
    pub seed: u64,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub output: Option<PathBuf>,
}

pub fn cmd_gamma_table(args: &GammaTableArgs) -> CliResult<()> {
    let mut config = GammaCacheConfig::mc(
        args.regime,
        args.multipliers.clone(),
        &args.wavelet,
        args.seed,
    );
    config.replicates = args.replicates;
    if args.method == GammaMethod::Analytic {
        config = GammaCacheConfig::analytic_fbm(args.multipliers.clone(), &args.wavelet);
    }
    let path = io::resolve_gamma_table_path(args.output.as_deref(), &config).ok_or_else(|| {
        CliError::config(
            "no_output",
            format!("give --output PATH or set {}", io::GAMMA_DIR_ENV),
        )
    })?;

    let cache = GammaCache::<f64>::new(config.clone())?;
    if path.exists() {
        cache.load_from_path(&path)?;
    }
    let (lo, hi) = match args.regime {
        Regime::Lrd => (0.0, 1.0),
        Regime::Fbm => (1.0, 3.0),
    };
    let alpha_lo = args.alpha_min.unwrap_or(lo);
    let alpha_hi = args.alpha_max.unwrap_or(hi);
    let computed = cache.precompute(alpha_lo, alpha_hi)?;
    io::save_gamma_cache(&cache, &path)?;
    eprintln!(
        "gamma table at {} now holds {} node(s) ({computed} in range)",
        path.display(),
        cache.node_count()
    );
    Ok(())
}

/// Parses `--scales 1,2,3,4,5`.
pub fn parse_multipliers(text: &str) -> CliResult<Vec<f64>> {
    let out: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    out.map_err(|e| CliError::config("bad_scales", format!("--scales `{text}`: {e}")))
}

pub fn parse_regime(text: &str) -> CliResult<Regime> {
    match text {
        "lrd" => Ok(Regime::Lrd),
        "fbm" => Ok(Regime::Fbm),
        other => Err(CliError::config(
            "bad_regime",
            format!("unknown regime `{other}` (lrd, fbm)"),
        )),
    }
}

pub fn default_table_dir() -> Option<PathBuf> {
    std::env::var_os(io::GAMMA_DIR_ENV).map(PathBuf::from)
}

pub fn ensure_parent_exists(path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() && !dir.exists() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::data("io", format!("creating {}: {e}", dir.display())))?;
        }
    }
    Ok(())
}
