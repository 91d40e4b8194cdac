//! Post-detection inference: refined segment windows, OLS/FGLS exponent
//! estimates with asymptotic covariances, confidence intervals, and the
//! chi-square goodness-of-fit statistic per segment.

use crate::error::{Error, Result, Warning, WarningCode};
use crate::gamma::{GammaMatrix, GammaProvider};
use crate::linalg::{mat2_inv, sym2_eigenvalues};
use crate::scalar::{real, Real};
use crate::segmentation::{ols_fit, ChangePointResult, OlsFit, RegressionDesign};
use crate::special::chi2_sf;
use crate::wvar::{CoefficientCache, Regime};
use serde::{Deserialize, Serialize};

/// Normal 97.5% quantile: half-width multiplier of the 95% confidence
/// intervals backed by the estimators' central limit theorems.
pub const CI_Z_95: f64 = 1.96;

/// Condition-number threshold beyond which FGLS falls back to OLS.
pub const GAMMA_CONDITION_LIMIT: f64 = 1e8;

/// Largest admissible exponent spread A in the self-similar rate rule.
pub const SPREAD_CLAMP: f64 = 0.49;

/// One detection segment shrunk by the localization margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinedSegment {
    pub index: usize,
    /// Detected boundaries [k̂_j, k̂_{j+1}).
    pub k_hat_lo: usize,
    pub k_hat_hi: usize,
    /// Refined window [k̃_j, k̃'_j).
    pub k_lo: usize,
    pub k_hi: usize,
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedSegments<T> {
    pub margin: usize,
    pub v_n: T,
    /// Exponent spread A actually used by the rate rule (H units).
    pub spread_h: T,
    pub segments: Vec<RefinedSegment>,
    pub warnings: Vec<Warning>,
}

/// Margin ⌈scale · N / v_N⌉, at least 1.
pub fn refinement_margin<T: Real>(n: usize, v_n: T, margin_scale: T) -> usize {
    let m = (margin_scale * real::<T>(n as f64) / v_n)
        .ceil()
        .to_f64_lossy();
    (m as usize).max(1)
}

/// Shrinks each detected segment by the localization margin N/v_N on both
/// sides, with v_N from the regime rule. `alpha_spread` is the detected
/// slope spread (max α̂ - min α̂); it enters only the self-similar rule,
/// as A = spread/2 clamped to [0, 0.49]. `margin_scale` rescales the margin
/// (any constant multiple of the rate sequence keeps the localization
/// guarantee); 1 reproduces the margin rule verbatim.
pub fn refine_segments<T: Real>(
    result: &ChangePointResult<T>,
    regime: Regime,
    kappa: T,
    alpha_spread: T,
    margin_scale: T,
) -> Result<RefinedSegments<T>> {
    regime.validate_kappa(kappa)?;
    if !margin_scale.is_finite() || margin_scale <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "margin_scale",
            value: margin_scale.to_f64_lossy(),
            constraint: "must be > 0",
        });
    }
    let mut warnings = Vec::new();
    let spread_h = match regime {
        Regime::Lrd => T::zero(),
        Regime::Fbm => {
            let a = alpha_spread * real::<T>(0.5);
            let clamp = real::<T>(SPREAD_CLAMP);
            if a > clamp {
                warnings.push(Warning::new(
                    WarningCode::SpreadClamped,
                    format!(
                        "exponent spread A = {} clamped to {SPREAD_CLAMP}; \
                         the rate rule requires A < 1/2",
                        a.to_f64_lossy()
                    ),
                ));
                clamp
            } else {
                a.max(T::zero())
            }
        }
    };

    let n = result.diagnostics.n;
    let rate_exp = regime.rate_exponent(kappa, spread_h);
    let v_n = real::<T>(n as f64).powf(rate_exp);
    if v_n < T::one() {
        return Err(Error::InvalidParameter {
            name: "v_n",
            value: v_n.to_f64_lossy(),
            constraint: "regime rule gives v_N < 1; reduce kappa or the spread",
        });
    }
    let margin = refinement_margin(n, v_n, margin_scale);

    let boundaries = result.boundaries();
    let mut segments = Vec::with_capacity(boundaries.len() - 1);
    let mut usable_count = 0;
    for (j, w) in boundaries.windows(2).enumerate() {
        let k_lo = w[0] + margin;
        let k_hi = w[1].saturating_sub(margin);
        let usable = k_lo < k_hi;
        if usable {
            usable_count += 1;
        } else {
            warnings.push(Warning::new(
                WarningCode::UnusableSegment,
                format!(
                    "segment {j} [{}, {}) vanishes under margin {margin}",
                    w[0], w[1]
                ),
            ));
        }
        segments.push(RefinedSegment {
            index: j,
            k_hat_lo: w[0],
            k_hat_hi: w[1],
            k_lo,
            k_hi,
            usable,
        });
    }
    if usable_count == 0 {
        return Err(Error::AllSegmentsUnusable { margin });
    }
    Ok(RefinedSegments {
        margin,
        v_n,
        spread_h,
        segments,
        warnings,
    })
}

/// Feasible GLS fit against the plug-in covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FglsFit<T> {
    pub alpha: T,
    pub log_beta_eq2: T,
    pub intercept_l1: T,
    /// Asymptotic covariance M = (L₁' Γ⁻¹ L₁)⁻¹ (the OLS sandwich Σ when the
    /// fit fell back).
    pub m_matrix: [[T; 2]; 2],
    /// Γ-weighted residual squared norm; absent when the fit fell back.
    pub weighted_rss: Option<T>,
    pub fell_back_to_ols: bool,
}

fn column_dots<T: Real>(
    xs: &[T],
    gamma_inv_x: &[T],
    gamma_inv_one: &[T],
    y: &[T],
) -> ([[T; 2]; 2], [T; 2]) {
    let mut a = [[T::zero(); 2]; 2];
    let mut rhs = [T::zero(); 2];
    for i in 0..xs.len() {
        a[0][0] += xs[i] * gamma_inv_x[i];
        a[0][1] += xs[i] * gamma_inv_one[i];
        a[1][1] += gamma_inv_one[i];
        rhs[0] += gamma_inv_x[i] * y[i];
        rhs[1] += gamma_inv_one[i] * y[i];
    }
    a[1][0] = a[0][1];
    (a, rhs)
}

/// OLS sandwich Σ = (L₁'L₁)⁻¹ L₁' Γ L₁ (L₁'L₁)⁻¹ in the normalized
/// convention.
#[allow(clippy::needless_range_loop)]
pub fn ols_sandwich<T: Real>(
    design: &RegressionDesign<T>,
    gamma: &GammaMatrix<T>,
) -> Result<[[T; 2]; 2]> {
    let x1 = design.l1_abscissae();
    let ell = x1.len();
    if gamma.ell() != ell {
        return Err(Error::GammaTableMismatch(format!(
            "gamma has {} scales, design has {ell}",
            gamma.ell()
        )));
    }
    let mut ltl = [[T::zero(); 2]; 2];
    for &x in &x1 {
        ltl[0][0] += x * x;
        ltl[0][1] += x;
    }
    ltl[1][0] = ltl[0][1];
    ltl[1][1] = real::<T>(ell as f64);
    let inv = mat2_inv(ltl)?;
    // B = (L₁'L₁)⁻¹ L₁', rows b0, b1 of length ell
    let b_row = |r: usize, i: usize| inv[r][0] * x1[i] + inv[r][1];
    let mut sigma = [[T::zero(); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = T::zero();
            for i in 0..ell {
                let mut inner = T::zero();
                for j in 0..ell {
                    inner += gamma.matrix.get(i, j) * b_row(b, j);
                }
                acc += b_row(a, i) * inner;
            }
            sigma[a][b] = acc;
        }
    }
    Ok(sigma)
}

/// Weighted least squares of `y` against the design with weight matrix Γ⁻¹.
/// Ill-conditioned Γ (condition number above [`GAMMA_CONDITION_LIMIT`]) or a
/// failed factorization falls back to OLS, reporting Σ as the covariance.
pub fn fgls_fit<T: Real>(
    y: &[T],
    design: &RegressionDesign<T>,
    gamma: &GammaMatrix<T>,
) -> Result<FglsFit<T>> {
    let xs = &design.log_scales;
    if y.len() != xs.len() || gamma.ell() != xs.len() {
        return Err(Error::GammaTableMismatch(format!(
            "dimension mismatch: y = {}, design = {}, gamma = {}",
            y.len(),
            xs.len(),
            gamma.ell()
        )));
    }

    let fallback = |reason: &str| -> Result<FglsFit<T>> {
        let ols = ols_fit(y, design)?;
        let sigma = ols_sandwich(design, gamma)?;
        let _ = reason;
        Ok(FglsFit {
            alpha: ols.alpha,
            log_beta_eq2: ols.log_beta_eq2,
            intercept_l1: ols.intercept_l1,
            m_matrix: sigma,
            weighted_rss: None,
            fell_back_to_ols: true,
        })
    };

    if !gamma.matrix.is_symmetric(real::<T>(1e-8)) {
        return Err(Error::NotPositiveDefinite("gamma is not symmetric".into()));
    }
    if gamma.matrix.condition_number() > real::<T>(GAMMA_CONDITION_LIMIT) {
        return fallback("condition number");
    }
    let chol = match gamma.matrix.cholesky() {
        Ok(c) => c,
        Err(_) => return fallback("factorization"),
    };

    let ones = vec![T::one(); xs.len()];
    let gx = chol.solve(xs);
    let gone = chol.solve(&ones);
    let (a, rhs) = column_dots(xs, &gx, &gone, y);
    let a_inv = mat2_inv(a)?;
    let alpha = a_inv[0][0] * rhs[0] + a_inv[0][1] * rhs[1];
    let log_beta_eq2 = a_inv[1][0] * rhs[0] + a_inv[1][1] * rhs[1];

    // M in the normalized convention
    let x1 = design.l1_abscissae();
    let gx1 = chol.solve(&x1);
    let (a1, _) = column_dots(&x1, &gx1, &gone, y);
    let m_matrix = mat2_inv(a1)?;

    let residual: Vec<T> = xs
        .iter()
        .zip(y)
        .map(|(&x, &yv)| yv - (alpha * x + log_beta_eq2))
        .collect();
    let weighted_rss = chol.inv_quad_form(&residual);

    Ok(FglsFit {
        alpha,
        log_beta_eq2,
        intercept_l1: log_beta_eq2 + alpha * design.log_base,
        m_matrix,
        weighted_rss: Some(weighted_rss),
        fell_back_to_ols: false,
    })
}

/// Goodness-of-fit statistic
/// `T = (n_j / a_N) ‖Y - L Θ̄‖²_Γ̃` with its χ²(ℓ-2) upper-tail probability.
pub fn goodness_test<T: Real>(
    y: &[T],
    design: &RegressionDesign<T>,
    theta_fgls: (T, T),
    gamma: &GammaMatrix<T>,
    n_j: usize,
    base_scale: usize,
) -> Result<(T, T)> {
    let ell = design.ell();
    if ell < 3 {
        return Err(Error::SingularDesign("need at least 3 scales".into()));
    }
    let (alpha, log_beta) = theta_fgls;
    let residual: Vec<T> = design
        .log_scales
        .iter()
        .zip(y)
        .map(|(&x, &yv)| yv - (alpha * x + log_beta))
        .collect();
    let chol = gamma.matrix.cholesky()?;
    let t_stat =
        real::<T>(n_j as f64) / real::<T>(base_scale as f64) * chol.inv_quad_form(&residual);
    let p = chi2_sf(t_stat, ell - 2)?;
    Ok((t_stat, p))
}

/// Everything estimated on one usable refined segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentInference<T> {
    pub n_j: usize,
    /// Plug-in exponent handed to the Γ provider (α̃ clamped into the regime
    /// range when necessary).
    pub gamma_alpha: T,
    pub theta_ols: OlsFit<T>,
    /// Asymptotic OLS covariance Σ (normalized convention).
    pub sigma_matrix: [[T; 2]; 2],
    /// Finite-sample OLS covariance Σ · a_N/n_j.
    pub cov_ols: [[T; 2]; 2],
    pub alpha_fgls: T,
    pub log_beta_eq2_fgls: T,
    pub intercept_l1_fgls: T,
    /// Asymptotic FGLS covariance M.
    pub m_matrix: [[T; 2]; 2],
    /// Finite-sample FGLS covariance M · a_N/n_j.
    pub cov_fgls: [[T; 2]; 2],
    /// 95% interval for the slope α from the FGLS fit.
    pub alpha_ci: (T, T),
    /// Domain parameter (D or H) from both fits, with the FGLS interval.
    pub exponent_label: String,
    pub exponent_ols: T,
    pub exponent_fgls: T,
    pub exponent_ci: (T, T),
    pub t_stat: Option<T>,
    pub p_value: Option<T>,
    /// Smallest eigenvalue of Σ - M (nonnegative up to numerics).
    pub sigma_minus_m_min_eig: T,
    pub fgls_fell_back: bool,
}

/// Per-segment estimate; `inference` is absent when the segment was unusable
/// or degenerate, with the reason recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEstimate<T> {
    pub segment_index: usize,
    pub k_lo: usize,
    pub k_hi: usize,
    pub usable: bool,
    pub reason: Option<String>,
    pub inference: Option<SegmentInference<T>>,
}

/// Estimates every refined segment: OLS, plug-in Γ(α̃), FGLS with confidence
/// intervals, and the goodness-of-fit statistic.
pub fn estimate_segments<T: Real>(
    cache: &CoefficientCache<T>,
    refined: &RefinedSegments<T>,
    design: &RegressionDesign<T>,
    regime: Regime,
    provider: &dyn GammaProvider<T>,
    ci_z: T,
) -> Result<(Vec<SegmentEstimate<T>>, Vec<Warning>)> {
    let mut warnings = Vec::new();
    let mut estimates = Vec::with_capacity(refined.segments.len());
    let a_n = cache.base_scale;
    for seg in &refined.segments {
        if !seg.usable {
            estimates.push(SegmentEstimate {
                segment_index: seg.index,
                k_lo: seg.k_lo,
                k_hi: seg.k_hi,
                usable: false,
                reason: Some("refinement margin exhausted the segment".into()),
                inference: None,
            });
            continue;
        }
        match estimate_one(
            cache,
            seg,
            design,
            regime,
            provider,
            ci_z,
            a_n,
            &mut warnings,
        ) {
            Ok(inference) => estimates.push(SegmentEstimate {
                segment_index: seg.index,
                k_lo: seg.k_lo,
                k_hi: seg.k_hi,
                usable: true,
                reason: None,
                inference: Some(inference),
            }),
            Err(e @ (Error::TooFewBlocks { .. } | Error::DegenerateSegment { .. })) => {
                warnings.push(Warning::new(
                    WarningCode::UnusableSegment,
                    format!("segment {}: {e}", seg.index),
                ));
                estimates.push(SegmentEstimate {
                    segment_index: seg.index,
                    k_lo: seg.k_lo,
                    k_hi: seg.k_hi,
                    usable: false,
                    reason: Some(e.to_string()),
                    inference: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    if estimates.iter().all(|e| !e.usable) {
        return Err(Error::AllSegmentsUnusable {
            margin: refined.margin,
        });
    }
    Ok((estimates, warnings))
}

#[allow(clippy::too_many_arguments)]
fn estimate_one<T: Real>(
    cache: &CoefficientCache<T>,
    seg: &RefinedSegment,
    design: &RegressionDesign<T>,
    regime: Regime,
    provider: &dyn GammaProvider<T>,
    ci_z: T,
    a_n: usize,
    warnings: &mut Vec<Warning>,
) -> Result<SegmentInference<T>> {
    let y = cache.log_variance_vector(seg.k_lo, seg.k_hi)?;
    let theta_ols = ols_fit(&y, design)?;
    let n_j = seg.k_hi - seg.k_lo;

    // plug-in exponent, clamped into the regime's open range
    let (lo, hi) = regime.alpha_range::<T>();
    let eps = real::<T>(1e-6);
    let gamma_alpha = theta_ols.alpha.max(lo + eps).min(hi - eps);
    if gamma_alpha != theta_ols.alpha {
        warnings.push(Warning::new(
            WarningCode::AlphaClamped,
            format!(
                "segment {}: slope {} clamped to {} for the gamma lookup",
                seg.index,
                theta_ols.alpha.to_f64_lossy(),
                gamma_alpha.to_f64_lossy()
            ),
        ));
    }
    let gamma = provider.gamma(gamma_alpha)?;
    let sigma_matrix = ols_sandwich(design, &gamma)?;

    let fgls = fgls_fit(&y, design, &gamma)?;
    if fgls.fell_back_to_ols {
        warnings.push(Warning::new(
            WarningCode::FglsFallbackToOls,
            format!(
                "segment {}: gamma ill-conditioned, FGLS fell back to OLS",
                seg.index
            ),
        ));
    }

    let scale = real::<T>(a_n as f64) / real::<T>(n_j as f64);
    let scale_mat = |m: &[[T; 2]; 2]| {
        [
            [m[0][0] * scale, m[0][1] * scale],
            [m[1][0] * scale, m[1][1] * scale],
        ]
    };
    let cov_ols = scale_mat(&sigma_matrix);
    let cov_fgls = scale_mat(&fgls.m_matrix);

    let half_width = ci_z * cov_fgls[0][0].max(T::zero()).sqrt();
    let alpha_ci = (fgls.alpha - half_width, fgls.alpha + half_width);

    let (t_stat, p_value) = if fgls.fell_back_to_ols {
        (None, None)
    } else {
        let (t, p) = goodness_test(
            &y,
            design,
            (fgls.alpha, fgls.log_beta_eq2),
            &gamma,
            n_j,
            a_n,
        )?;
        (Some(t), Some(p))
    };

    let diff = [
        [
            sigma_matrix[0][0] - fgls.m_matrix[0][0],
            sigma_matrix[0][1] - fgls.m_matrix[0][1],
        ],
        [
            sigma_matrix[1][0] - fgls.m_matrix[1][0],
            sigma_matrix[1][1] - fgls.m_matrix[1][1],
        ],
    ];
    let (min_eig, _) = sym2_eigenvalues(diff);

    Ok(SegmentInference {
        n_j,
        gamma_alpha,
        exponent_label: regime.exponent_label().to_string(),
        exponent_ols: regime.exponent_from_alpha(theta_ols.alpha),
        exponent_fgls: regime.exponent_from_alpha(fgls.alpha),
        exponent_ci: (
            regime.exponent_from_alpha(alpha_ci.0),
            regime.exponent_from_alpha(alpha_ci.1),
        ),
        theta_ols,
        sigma_matrix,
        cov_ols,
        alpha_fgls: fgls.alpha,
        log_beta_eq2_fgls: fgls.log_beta_eq2,
        intercept_l1_fgls: fgls.intercept_l1,
        m_matrix: fgls.m_matrix,
        cov_fgls,
        alpha_ci,
        t_stat,
        p_value,
        sigma_minus_m_min_eig: min_eig,
        fgls_fell_back: fgls.fell_back_to_ols,
    })
}
