//! The full analysis pipeline shared by `detect` and `experiment`:
//! coefficient cache → contrast minimization → segment refinement →
//! per-segment estimation, assembled into a schema-versioned result document.

use serde::{Deserialize, Serialize};
use wavebreak::gamma::GammaProvider;
use wavebreak::inference::{estimate_segments, refine_segments, CI_Z_95};
use wavebreak::segmentation::{
    detect_changes_with, ContrastVariant, RegressionDesign, SearchSpace,
};
use wavebreak::wavelets::wavelet_by_name;
use wavebreak::wvar::{CoefficientCache, Regime, ScaleGrid};
use wavebreak::{
    ChangePointResult64, RefinedSegments64, Result as CoreResult, SegmentEstimate64, TimeSeries64,
    Warning,
};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Everything the pipeline needs beyond the series itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub regime: Regime,
    pub m: usize,
    pub kappa: f64,
    pub multipliers: Vec<f64>,
    pub wavelet: String,
    pub min_seg: Option<usize>,
    pub grid_step: Option<usize>,
    /// Window length of the search objective; `None` picks the default
    /// (four coarsest scales, clamped by min_seg).
    pub window: Option<usize>,
    /// Rescales the refinement margin ⌈scale · N/v_N⌉.
    pub margin_scale: f64,
    /// Detected-slope spread override for the self-similar rate rule.
    pub alpha_spread: Option<f64>,
}

impl AnalysisSettings {
    pub fn new(regime: Regime, m: usize) -> Self {
        Self {
            regime,
            m,
            kappa: default_kappa(regime),
            multipliers: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            wavelet: "poly4".to_string(),
            min_seg: None,
            grid_step: None,
            window: None,
            margin_scale: 1.0,
            alpha_spread: None,
        }
    }
}

pub fn default_kappa(regime: Regime) -> f64 {
    match regime {
        Regime::Lrd => 0.05,
        Regime::Fbm => 0.01,
    }
}

/// Echo of the effective configuration, stored inside every result document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub settings: AnalysisSettings,
    pub n: usize,
    pub base_scale: usize,
    pub scales: Vec<usize>,
    pub grid_step: usize,
    pub min_seg: usize,
    pub window: Option<usize>,
    pub input: Option<String>,
    pub seed: Option<u64>,
}

/// One (log scale, log variance) point of the plot payload.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentPlot {
    pub segment_index: usize,
    pub points: Vec<PlotPoint>,
    /// Endpoints of the fitted whole-segment regression line.
    pub fitted: [PlotPoint; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlotData {
    pub tau_markers: Vec<f64>,
    pub segments: Vec<SegmentPlot>,
}

/// Schema-versioned output of one detection run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub config: EffectiveConfig,
    pub detection: ChangePointResult64,
    pub refinement: RefinedSegments64,
    pub estimates: Vec<SegmentEstimate64>,
    pub warnings: Vec<Warning>,
    pub plot: PlotData,
}

/// Runs cache → detect → refine → estimate on a series.
pub fn analyze(
    series: &TimeSeries64,
    settings: &AnalysisSettings,
    provider: &dyn GammaProvider<f64>,
) -> CoreResult<ResultDocument> {
    let n = series.n();
    let grid = ScaleGrid::from_rule(
        settings.regime,
        settings.kappa,
        settings.multipliers.clone(),
        n,
    )?;
    let wavelet = wavelet_by_name::<f64>(&settings.wavelet)?;
    let cache = CoefficientCache::build(series, &grid, &wavelet)?;
    let design = RegressionDesign::from_cache(&cache);

    let mut space = SearchSpace::for_grid(&grid, n, settings.m, settings.min_seg)?;
    if let Some(step) = settings.grid_step {
        space = SearchSpace::from_parts(n, settings.m, step, space.min_seg)?;
    }
    let variant = match settings.window {
        Some(window) => ContrastVariant::WindowedOls { window },
        None => ContrastVariant::windowed_default(grid.coarsest_scale(), space.min_seg),
    };
    let detection = detect_changes_with(&cache, &space, &design, variant)?;

    let alpha_spread = settings
        .alpha_spread
        .unwrap_or_else(|| detection.alpha_spread());
    let refinement = refine_segments(
        &detection,
        settings.regime,
        settings.kappa,
        alpha_spread,
        settings.margin_scale,
    )?;
    let (estimates, mut warnings) = estimate_segments(
        &cache,
        &refinement,
        &design,
        settings.regime,
        provider,
        CI_Z_95,
    )?;
    let mut all_warnings = detection.warnings.clone();
    all_warnings.extend(refinement.warnings.clone());
    all_warnings.append(&mut warnings);

    let plot = build_plot(&detection, &design);
    let window = match variant {
        ContrastVariant::WindowedOls { window } => Some(window),
        ContrastVariant::SegmentOls => None,
    };
    Ok(ResultDocument {
        schema_version: RESULT_SCHEMA_VERSION,
        config: EffectiveConfig {
            settings: settings.clone(),
            n,
            base_scale: grid.base_scale,
            scales: grid.scales.clone(),
            grid_step: space.grid_step,
            min_seg: space.min_seg,
            window,
            input: None,
            seed: None,
        },
        detection,
        refinement,
        estimates,
        warnings: all_warnings,
        plot,
    })
}

fn build_plot(detection: &ChangePointResult64, design: &RegressionDesign<f64>) -> PlotData {
    let segments = detection
        .segments
        .iter()
        .enumerate()
        .map(|(idx, seg)| {
            let points: Vec<PlotPoint> = design
                .log_scales
                .iter()
                .zip(&seg.log_variances)
                .map(|(&x, &y)| PlotPoint { x, y })
                .collect();
            let x0 = *design.log_scales.first().unwrap();
            let x1 = *design.log_scales.last().unwrap();
            SegmentPlot {
                segment_index: idx,
                points,
                fitted: [
                    PlotPoint {
                        x: x0,
                        y: seg.fit.alpha * x0 + seg.fit.log_beta_eq2,
                    },
                    PlotPoint {
                        x: x1,
                        y: seg.fit.alpha * x1 + seg.fit.log_beta_eq2,
                    },
                ],
            }
        })
        .collect();
    PlotData {
        tau_markers: detection.tau_hat.clone(),
        segments,
    }
}
