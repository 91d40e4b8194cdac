//! Monte Carlo reproduction harness: runs a scenario R times with derived
//! seeds, collects the break-fraction and exponent estimates, and reports
//! mean / σ̂ / √MSE per parameter in the summary-table row layout.

use crate::error::{CliError, CliResult};
use crate::pipeline::{analyze, ResultDocument};
use crate::scenarios::Scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use wavebreak::gamma::GammaProvider;
use wavebreak::rng::derive_seed;
use wavebreak::synth::gen_piecewise;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    /// Spread around the mean (population denominator, so
    /// rmse² = bias² + sd²).
    pub sd: f64,
    pub rmse: f64,
    /// Replicates contributing to this column.
    pub n_used: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub scenario: String,
    pub n_samples: usize,
    pub replicates: usize,
    pub failed_replicates: usize,
    pub failure_messages: Vec<String>,
    pub columns: Vec<ColumnSummary>,
}

/// Per-replicate extracted values: τ̂ estimates followed by per-segment
/// exponent estimates (OLS/tilde then FGLS/bar), missing when a segment was
/// unusable.
struct ReplicateRow {
    taus: Vec<f64>,
    exp_ols: Vec<Option<f64>>,
    exp_fgls: Vec<Option<f64>>,
}

fn extract(doc: &ResultDocument, m: usize, n_segments: usize) -> ReplicateRow {
    let mut exp_ols = vec![None; n_segments];
    let mut exp_fgls = vec![None; n_segments];
    for est in &doc.estimates {
        if let Some(inf) = &est.inference {
            if est.segment_index < n_segments {
                exp_ols[est.segment_index] = Some(inf.exponent_ols);
                exp_fgls[est.segment_index] = Some(inf.exponent_fgls);
            }
        }
    }
    let mut taus = doc.detection.tau_hat.clone();
    taus.resize(m, f64::NAN);
    ReplicateRow {
        taus,
        exp_ols,
        exp_fgls,
    }
}

pub fn run_experiment(
    scenario: &Scenario,
    n: usize,
    replicates: usize,
    master_seed: u64,
    provider: &dyn GammaProvider<f64>,
) -> CliResult<ExperimentSummary> {
    if replicates < 10 {
        return Err(CliError::config(
            "bad_replicates",
            format!("need at least 10 replicates, got {replicates}"),
        ));
    }
    let settings = scenario.settings();
    let runs: Vec<Result<ReplicateRow, String>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(master_seed, r as u64);
            let spec = scenario
                .spec(n, seed)
                .map_err(|e| format!("replicate {r}: {e}"))?;
            let series = gen_piecewise(&spec).map_err(|e| format!("replicate {r}: {e}"))?;
            let doc =
                analyze(&series, &settings, provider).map_err(|e| format!("replicate {r}: {e}"))?;
            Ok(extract(&doc, scenario.m, scenario.truth_exponents.len()))
        })
        .collect();

    let mut rows = Vec::with_capacity(replicates);
    let mut failure_messages = Vec::new();
    for run in runs {
        match run {
            Ok(row) => rows.push(row),
            Err(msg) => failure_messages.push(msg),
        }
    }
    if rows.is_empty() {
        return Err(CliError::numerical(
            "all_replicates_failed",
            failure_messages
                .first()
                .cloned()
                .unwrap_or_else(|| "no replicates succeeded".to_string()),
        ));
    }

    let mut columns = Vec::new();
    for j in 0..scenario.m {
        let values: Vec<f64> = rows
            .iter()
            .map(|r| r.taus[j])
            .filter(|v| v.is_finite())
            .collect();
        columns.push(summarize(
            format!("tau_{}", j + 1),
            scenario.truth_taus[j],
            &values,
        ));
    }
    let label = scenario.exponent_label;
    for (j, &truth) in scenario.truth_exponents.iter().enumerate() {
        let ols: Vec<f64> = rows.iter().filter_map(|r| r.exp_ols[j]).collect();
        columns.push(summarize(format!("{label}{j}_ols"), truth, &ols));
        let fgls: Vec<f64> = rows.iter().filter_map(|r| r.exp_fgls[j]).collect();
        columns.push(summarize(format!("{label}{j}_fgls"), truth, &fgls));
    }

    Ok(ExperimentSummary {
        scenario: scenario.id.clone(),
        n_samples: n,
        replicates,
        failed_replicates: failure_messages.len(),
        failure_messages,
        columns,
    })
}

fn summarize(name: String, truth: f64, values: &[f64]) -> ColumnSummary {
    if values.is_empty() {
        return ColumnSummary {
            name,
            truth,
            mean: f64::NAN,
            sd: f64::NAN,
            rmse: f64::NAN,
            n_used: 0,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / n;
    ColumnSummary {
        name,
        truth,
        mean,
        sd: var.sqrt(),
        rmse: mse.sqrt(),
        n_used: values.len(),
    }
}

impl ExperimentSummary {
    pub fn column(&self, name: &str) -> Option<&ColumnSummary> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// CSV with one row per parameter.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,truth,mean,sd,rmse,n_used\n");
        for c in &self.columns {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.name, c.truth, c.mean, c.sd, c.rmse, c.n_used
            );
        }
        out
    }

    /// Human-readable table: parameters as columns, mean/σ̂/√MSE as rows.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario {} (N = {}, {} replicates, {} failed)",
            self.scenario, self.n_samples, self.replicates, self.failed_replicates
        );
        let _ = write!(out, "{:>8}", "");
        for c in &self.columns {
            let _ = write!(out, " {:>12}", c.name);
        }
        out.push('\n');
        let _ = write!(out, "{:>8}", "truth");
        for c in &self.columns {
            let _ = write!(out, " {:>12.4}", c.truth);
        }
        out.push('\n');
        let _ = write!(out, "{:>8}", "mean");
        for c in &self.columns {
            let _ = write!(out, " {:>12.4}", c.mean);
        }
        out.push('\n');
        let _ = write!(out, "{:>8}", "sd");
        for c in &self.columns {
            let _ = write!(out, " {:>12.4}", c.sd);
        }
        out.push('\n');
        let _ = write!(out, "{:>8}", "rmse");
        for c in &self.columns {
            let _ = write!(out, " {:>12.4}", c.rmse);
        }
        out.push('\n');
        out
    }
}
