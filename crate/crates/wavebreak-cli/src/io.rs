//! File formats: single-column series CSV (header `x`), JSON documents, the
//! plot-data CSV, and gamma-table path resolution.

use crate::error::{CliError, CliResult};
use crate::pipeline::ResultDocument;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use wavebreak::gamma::{GammaCache, GammaCacheConfig, GammaMethod};
use wavebreak::synth::TimeSeries;
use wavebreak::TimeSeries64;

/// Environment variable holding the default gamma-table directory.
pub const GAMMA_DIR_ENV: &str = "WAVEBREAK_GAMMA_DIR";

/// Serializes a series as UTF-8 CSV: header `x`, one value per line, decimal
/// point, shortest round-trippable formatting (bit-exact on re-read).
pub fn series_to_csv(series: &TimeSeries64) -> String {
    let mut out = String::with_capacity(series.values.len() * 20 + 2);
    out.push_str("x\n");
    for v in &series.values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn write_series_csv(path: &Path, series: &TimeSeries64) -> CliResult<()> {
    std::fs::write(path, series_to_csv(series))
        .map_err(|e| CliError::data("io", format!("writing {}: {e}", path.display())))
}

pub fn read_series_csv(path: &Path) -> CliResult<TimeSeries64> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data("io", format!("reading {}: {e}", path.display())))?;
    parse_series_csv(&text)
        .map_err(|msg| CliError::data("bad_csv", format!("{}: {msg}", path.display())))
}

pub fn parse_series_csv(text: &str) -> Result<TimeSeries64, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "x" => {}
        Some(other) => return Err(format!("expected header `x`, found `{other}`")),
        None => return Err("empty file".to_string()),
    }
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let v: f64 = trimmed
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 2))?;
        values.push(v);
    }
    TimeSeries::from_values(values).map_err(|e| e.to_string())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::numerical("serialize", e.to_string()))?;
    std::fs::write(path, json)
        .map_err(|e| CliError::data("io", format!("writing {}: {e}", path.display())))
}

/// Plot CSV: `record,segment,x,y` rows. `point` rows carry
/// (log scale, log variance), `fit` rows the fitted line endpoints, and
/// `tau_marker` rows put the break fraction in `x` and the sample index in
/// `y`.
pub fn plot_to_csv(doc: &ResultDocument) -> String {
    let mut out = String::from("record,segment,x,y\n");
    for seg in &doc.plot.segments {
        for p in &seg.points {
            let _ = writeln!(out, "point,{},{},{}", seg.segment_index, p.x, p.y);
        }
        for p in &seg.fitted {
            let _ = writeln!(out, "fit,{},{},{}", seg.segment_index, p.x, p.y);
        }
    }
    for (j, (&tau, &k)) in doc
        .plot
        .tau_markers
        .iter()
        .zip(&doc.detection.k_hat)
        .enumerate()
    {
        let _ = writeln!(out, "tau_marker,{j},{tau},{k}");
    }
    out
}

/// Path of the plot CSV derived from the result path
/// (`result.json` → `result.plot.csv`).
pub fn plot_path_for(output: &Path) -> PathBuf {
    let mut name = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "result".to_string());
    name.push_str(".plot.csv");
    output.with_file_name(name)
}

/// Path of the ground-truth sidecar derived from the series path
/// (`series.csv` → `series.truth.json`).
pub fn truth_path_for(output: &Path) -> PathBuf {
    let mut name = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    name.push_str(".truth.json");
    output.with_file_name(name)
}

/// Stable file name for a gamma table configuration.
pub fn gamma_table_file_name(config: &GammaCacheConfig) -> String {
    let r: Vec<String> = config
        .multipliers
        .iter()
        .map(|v| {
            if v.fract() == 0.0 {
                format!("{}", *v as i64)
            } else {
                format!("{v}")
            }
        })
        .collect();
    let method = match config.method {
        GammaMethod::MonteCarlo => "mc",
        GammaMethod::Analytic => "analytic",
    };
    format!(
        "gamma_{}_{}_{}_r{}_R{}_n{}_a{}_s{}.json",
        config.regime.name(),
        method,
        config.wavelet,
        r.join("-"),
        config.replicates,
        config.n_ref,
        config.a_ref,
        config.seed
    )
}

/// Resolves where the gamma table for `config` lives: an explicit path wins,
/// then `WAVEBREAK_GAMMA_DIR`, else no persistence.
pub fn resolve_gamma_table_path(
    explicit: Option<&Path>,
    config: &GammaCacheConfig,
) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    std::env::var_os(GAMMA_DIR_ENV)
        .map(|dir| PathBuf::from(dir).join(gamma_table_file_name(config)))
}

/// Builds the gamma cache, preloading a persisted table when one exists.
pub fn load_gamma_cache(
    config: GammaCacheConfig,
    table_path: Option<&Path>,
) -> CliResult<(GammaCache<f64>, Option<PathBuf>)> {
    let path = resolve_gamma_table_path(table_path, &config);
    let cache = GammaCache::new(config)?;
    if let Some(p) = &path {
        if p.exists() {
            cache.load_from_path(p)?;
        }
    }
    Ok((cache, path))
}

/// Persists the cache back to its resolved path (best effort directory
/// creation).
pub fn save_gamma_cache(cache: &GammaCache<f64>, path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::data("io", format!("creating {}: {e}", dir.display())))?;
        }
    }
    cache.save_to_path(path).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_csv_round_trips_bitwise() {
        let series = TimeSeries::from_values(vec![
            0.1f64,
            -3.5e-12,
            2.000000000000004,
            f64::MIN_POSITIVE,
            1e300,
        ])
        .unwrap();
        let csv = series_to_csv(&series);
        assert!(csv.starts_with("x\n"));
        let parsed = parse_series_csv(&csv).unwrap();
        let bits_in: Vec<u64> = series.values.iter().map(|v| v.to_bits()).collect();
        let bits_out: Vec<u64> = parsed.values.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits_in, bits_out);
    }

    #[test]
    fn series_csv_rejects_bad_input() {
        assert!(parse_series_csv("").is_err());
        assert!(parse_series_csv("y\n1\n2\n").is_err());
        assert!(parse_series_csv("x\n1\nfoo\n").is_err());
        assert!(parse_series_csv("x\n1\nnan\n").is_err());
        assert!(parse_series_csv("x\n1\n").is_err()); // fewer than 2 samples
    }

    #[test]
    fn derived_paths() {
        assert_eq!(
            plot_path_for(Path::new("/tmp/result.json")),
            PathBuf::from("/tmp/result.plot.csv")
        );
        assert_eq!(
            truth_path_for(Path::new("out/series.csv")),
            PathBuf::from("out/series.truth.json")
        );
    }

    #[test]
    fn gamma_file_name_is_config_keyed() {
        use wavebreak::wvar::Regime;
        let a = GammaCacheConfig::mc(Regime::Lrd, vec![1.0, 2.0, 3.0], "poly4", 9);
        let mut b = a.clone();
        b.seed = 10;
        assert_ne!(gamma_table_file_name(&a), gamma_table_file_name(&b));
        assert!(gamma_table_file_name(&a).starts_with("gamma_lrd_mc_poly4_r1-2-3_"));
    }
}
