//! Built-in simulation scenarios for the experiment harness, plus a
//! `custom` escape hatch loaded from a JSON spec file.

use crate::error::{CliError, CliResult};
use crate::pipeline::AnalysisSettings;
use serde::{Deserialize, Serialize};
use wavebreak::synth::{PiecewiseSpec, SegmentSpec, StationarySpec};
use wavebreak::wvar::Regime;
use wavebreak::PiecewiseSpec64;

/// A reproducible piecewise-process setting with its analysis defaults and
/// ground truth.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub default_n: usize,
    pub regime: Regime,
    pub kappa: f64,
    pub m: usize,
    /// Margin rescaling used when reproducing the summary tables; keeps the
    /// refined segments long enough for stable per-segment estimates at
    /// these sample sizes.
    pub margin_scale: f64,
    /// Slope-spread pin for the self-similar rate rule (the spread is known
    /// in simulations).
    pub alpha_spread: Option<f64>,
    pub truth_taus: Vec<f64>,
    pub truth_exponents: Vec<f64>,
    pub exponent_label: &'static str,
    segments: Vec<SegmentSpec<f64>>,
}

impl Scenario {
    pub fn spec(&self, n: usize, seed: u64) -> CliResult<PiecewiseSpec64> {
        PiecewiseSpec::new(n, self.truth_taus.clone(), self.segments.clone(), seed)
            .map_err(CliError::from)
    }

    pub fn settings(&self) -> AnalysisSettings {
        let mut s = AnalysisSettings::new(self.regime, self.m);
        s.kappa = self.kappa;
        s.margin_scale = self.margin_scale;
        s.alpha_spread = self.alpha_spread;
        s
    }
}

/// Piecewise FARIMA(0, d, 0) with one change: N = 20000, τ* = 0.75,
/// d = (0.1, 0.4), so D* = (0.2, 0.8).
pub fn farima_1cp() -> Scenario {
    Scenario {
        id: "farima-1cp".to_string(),
        default_n: 20000,
        regime: Regime::Lrd,
        kappa: 0.05,
        m: 1,
        margin_scale: 0.5,
        alpha_spread: None,
        truth_taus: vec![0.75],
        truth_exponents: vec![0.2, 0.8],
        exponent_label: "D",
        segments: vec![
            SegmentSpec::Stationary(StationarySpec::farima(0.1, 1.0).unwrap()),
            SegmentSpec::Stationary(StationarySpec::farima(0.4, 1.0).unwrap()),
        ],
    }
}

/// Piecewise fractional Brownian motion with two changes:
/// τ* = (0.3, 0.78), H* = (0.6, 0.8, 0.5); N defaults to 10000.
pub fn fbm_2cp() -> Scenario {
    Scenario {
        id: "fbm-2cp".to_string(),
        default_n: 10000,
        regime: Regime::Fbm,
        kappa: 0.01,
        m: 2,
        margin_scale: 0.5,
        // true spread: max α - min α = 2(0.8 - 0.5) = 0.6
        alpha_spread: Some(0.6),
        truth_taus: vec![0.3, 0.78],
        truth_exponents: vec![0.6, 0.8, 0.5],
        exponent_label: "H",
        segments: vec![
            SegmentSpec::Fbm {
                hurst: 0.6,
                variance_scale: 1.0,
            },
            SegmentSpec::Fbm {
                hurst: 0.8,
                variance_scale: 1.0,
            },
            SegmentSpec::Fbm {
                hurst: 0.5,
                variance_scale: 1.0,
            },
        ],
    }
}

/// On-disk format of a custom scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomScenarioFile {
    pub regime: Regime,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_margin_scale")]
    pub margin_scale: f64,
    #[serde(default)]
    pub alpha_spread: Option<f64>,
    /// Spec without the seed; seeds come from the command line / replicate
    /// derivation.
    pub n_samples: usize,
    pub change_fractions: Vec<f64>,
    pub segments: Vec<SegmentSpec<f64>>,
}

fn default_margin_scale() -> f64 {
    1.0
}

pub fn custom_from_file(path: &std::path::Path) -> CliResult<Scenario> {
    let json = std::fs::read_to_string(path)
        .map_err(|e| CliError::data("io", format!("reading {}: {e}", path.display())))?;
    let file: CustomScenarioFile = serde_json::from_str(&json)
        .map_err(|e| CliError::config("bad_scenario", format!("{}: {e}", path.display())))?;
    let truth_exponents = file
        .segments
        .iter()
        .map(|s| {
            file.regime
                .exponent_from_alpha(scenario_alpha(file.regime, s))
        })
        .collect();
    Ok(Scenario {
        id: "custom".to_string(),
        default_n: file.n_samples,
        regime: file.regime,
        kappa: file
            .kappa
            .unwrap_or(crate::pipeline::default_kappa(file.regime)),
        m: file.change_fractions.len(),
        margin_scale: file.margin_scale,
        alpha_spread: file.alpha_spread,
        truth_taus: file.change_fractions,
        truth_exponents,
        exponent_label: file.regime.exponent_label(),
        segments: file.segments,
    })
}

fn scenario_alpha(regime: Regime, seg: &SegmentSpec<f64>) -> f64 {
    // SegmentSpec::alpha is the LRD slope for stationary models and 2H+1 for
    // FBM; both already live on the regime's slope axis.
    let _ = regime;
    seg.alpha()
}

pub fn by_id(id: &str, custom_path: Option<&std::path::Path>) -> CliResult<Scenario> {
    match id {
        "farima-1cp" => Ok(farima_1cp()),
        "fbm-2cp" => Ok(fbm_2cp()),
        "custom" => {
            let path = custom_path.ok_or_else(|| {
                CliError::config("bad_scenario", "scenario `custom` requires --spec PATH")
            })?;
            custom_from_file(path)
        }
        other => Err(CliError::config(
            "bad_scenario",
            format!("unknown scenario `{other}` (farima-1cp, fbm-2cp, custom)"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_produce_valid_specs() {
        for scenario in [farima_1cp(), fbm_2cp()] {
            let spec = scenario.spec(scenario.default_n, 1).unwrap();
            assert_eq!(spec.m(), scenario.m);
            assert_eq!(spec.segments.len(), scenario.truth_exponents.len());
        }
    }

    #[test]
    fn unknown_scenario_rejected() {
        assert!(by_id("nope", None).is_err());
        assert!(by_id("custom", None).is_err());
    }
}
