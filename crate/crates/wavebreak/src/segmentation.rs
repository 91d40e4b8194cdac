//! Contrast minimization over breakpoint configurations with a known number
//! of changes, plus the per-segment log-log regressions.
//!
//! A configuration is scored by the squared deviations of log sample
//! variances from per-segment regression lines; the score is segment-additive,
//! so the exact minimizer over a candidate grid is found by dynamic
//! programming, with ties resolved to the lexicographically smallest
//! breakpoint vector.
//!
//! Two aggregation variants are provided. `SegmentOls` scores each segment by
//! the residual sum of squares of its own ℓ-point log-log regression.
//! `WindowedOls` (the default) pools the log variances of fixed-length
//! windows inside the segment against the same per-segment line; because a
//! window that disagrees with its segment's regime sits far from the line,
//! level shifts between regimes stay visible to the search instead of being
//! absorbed into per-segment intercepts. The reported per-segment fits always
//! come from whole-segment log variances.

use crate::error::{Error, Result, Warning, WarningCode};
use crate::scalar::{real, Real};
use crate::wvar::{CoefficientCache, ScaleGrid};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Regression abscissae: log of the rounded scales actually computed, plus
/// the log of the base scale so both intercept conventions can be reported.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDesign<T> {
    pub log_scales: Vec<T>,
    pub log_base: T,
}

impl<T: Real> RegressionDesign<T> {
    pub fn from_cache(cache: &CoefficientCache<T>) -> Self {
        Self {
            log_scales: cache.log_scales.clone(),
            log_base: real::<T>(cache.base_scale as f64).ln(),
        }
    }

    pub fn from_grid(grid: &ScaleGrid<T>) -> Self {
        Self {
            log_scales: grid
                .scales
                .iter()
                .map(|&s| real::<T>(s as f64).ln())
                .collect(),
            log_base: real::<T>(grid.base_scale as f64).ln(),
        }
    }

    pub fn ell(&self) -> usize {
        self.log_scales.len()
    }

    /// Normalized abscissae log(s_i) - log(a_N); equal to log r_i when the
    /// rounding was exact.
    pub fn l1_abscissae(&self) -> Vec<T> {
        self.log_scales.iter().map(|&x| x - self.log_base).collect()
    }
}

/// Slope/intercept of one log-log regression. The intercept is reported in
/// both conventions: against log(r_i a_N) (`log_beta_eq2`) and against the
/// normalized abscissae (`intercept_l1`); slopes agree, intercepts differ by
/// `alpha * log a_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit<T> {
    pub alpha: T,
    pub log_beta_eq2: T,
    pub intercept_l1: T,
    pub rss: T,
}

/// Ordinary least squares of `y` on the design abscissae.
pub fn ols_fit<T: Real>(y: &[T], design: &RegressionDesign<T>) -> Result<OlsFit<T>> {
    let xs = &design.log_scales;
    if y.len() != xs.len() {
        return Err(Error::SingularDesign(format!(
            "{} observations vs {} abscissae",
            y.len(),
            xs.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::SingularDesign("need at least 3 scales".into()));
    }
    let n = real::<T>(xs.len() as f64);
    let x_bar = xs.iter().copied().sum::<T>() / n;
    let y_bar = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &yv) in xs.iter().zip(y) {
        let dx = x - x_bar;
        sxx += dx * dx;
        sxy += dx * (yv - y_bar);
    }
    if sxx <= T::epsilon() * real::<T>(64.0) {
        return Err(Error::SingularDesign("duplicate abscissae".into()));
    }
    let alpha = sxy / sxx;
    let log_beta_eq2 = y_bar - alpha * x_bar;
    let mut rss = T::zero();
    for (&x, &yv) in xs.iter().zip(y) {
        let r = yv - (alpha * x + log_beta_eq2);
        rss += r * r;
    }
    Ok(OlsFit {
        alpha,
        log_beta_eq2,
        intercept_l1: log_beta_eq2 + alpha * design.log_base,
        rss,
    })
}

/// Residual sum of squares of the whole-segment log-log regression on
/// [k, k'). This is the inner minimization of the segment-aggregated
/// contrast for one segment.
pub fn segment_cost<T: Real>(
    cache: &CoefficientCache<T>,
    design: &RegressionDesign<T>,
    k: usize,
    k_prime: usize,
) -> Result<T> {
    let y = cache.log_variance_vector(k, k_prime)?;
    Ok(ols_fit(&y, design)?.rss)
}

/// Segment-additive cost consumed by the dynamic program. Implementations
/// must be deterministic in (k, k'); degenerate segments cost +inf.
pub trait SegmentCost<T> {
    fn cost(&mut self, k: usize, k_prime: usize) -> T;
}

/// Memoized whole-segment costs (the `SegmentOls` variant). Degenerate
/// segments cost +inf and leave a warning instead of aborting the search.
pub struct CacheCost<'a, T> {
    cache: &'a CoefficientCache<T>,
    design: &'a RegressionDesign<T>,
    memo: HashMap<(usize, usize), T>,
    pub warnings: Vec<Warning>,
}

impl<'a, T: Real> CacheCost<'a, T> {
    pub fn new(cache: &'a CoefficientCache<T>, design: &'a RegressionDesign<T>) -> Self {
        Self {
            cache,
            design,
            memo: HashMap::new(),
            warnings: Vec::new(),
        }
    }
}

impl<T: Real> SegmentCost<T> for CacheCost<'_, T> {
    fn cost(&mut self, k: usize, k_prime: usize) -> T {
        if let Some(&c) = self.memo.get(&(k, k_prime)) {
            return c;
        }
        let c = match segment_cost(self.cache, self.design, k, k_prime) {
            Ok(c) => c,
            Err(e) => {
                self.warnings.push(Warning::new(
                    WarningCode::DegenerateCost,
                    format!("segment [{k}, {k_prime}) excluded: {e}"),
                ));
                T::infinity()
            }
        };
        self.memo.insert((k, k_prime), c);
        c
    }
}

/// Pooled log variances on an absolute grid of fixed-length windows: prefix
/// sums of centered values and their squares per scale, so any segment's
/// pooled regression is an O(ℓ) lookup.
pub struct WindowedCost<T> {
    window: usize,
    n_windows: usize,
    xs: Vec<T>,
    /// Per-scale centering constants (global window means).
    mu: Vec<T>,
    /// Per scale: prefix sums over window index of (y - mu) and (y - mu)².
    sum: Vec<Vec<T>>,
    sum_sq: Vec<Vec<T>>,
    x_bar: T,
    sxx: T,
    pub degenerate_windows: usize,
}

impl<T: Real> WindowedCost<T> {
    pub fn build(
        cache: &CoefficientCache<T>,
        design: &RegressionDesign<T>,
        window: usize,
    ) -> Result<Self> {
        let coarsest = *cache.scales.last().unwrap();
        if window < 2 * coarsest {
            return Err(Error::InfeasibleSearchSpace(format!(
                "window {window} below 2 * coarsest scale {coarsest}"
            )));
        }
        let n_windows = cache.n / window;
        if n_windows < 2 {
            return Err(Error::InfeasibleSearchSpace(format!(
                "series holds fewer than 2 windows of {window} samples"
            )));
        }
        let ell = cache.ell();
        // first pass: window log-variances (NaN marks degenerate windows)
        let mut ys = vec![Vec::with_capacity(n_windows); ell];
        let mut degenerate = 0usize;
        for t in 0..n_windows {
            let (lo, hi) = (t * window, (t + 1) * window);
            for (i, col) in ys.iter_mut().enumerate() {
                match cache.segment_variance(lo, hi, i) {
                    Ok(s) => col.push(s.ln()),
                    Err(_) => {
                        degenerate += 1;
                        col.push(T::nan());
                    }
                }
            }
        }
        let mut mu = Vec::with_capacity(ell);
        for col in &ys {
            let finite: Vec<T> = col.iter().copied().filter(|v| v.is_finite()).collect();
            let m = if finite.is_empty() {
                T::zero()
            } else {
                finite.iter().copied().sum::<T>() / real::<T>(finite.len() as f64)
            };
            mu.push(m);
        }
        let mut sum = Vec::with_capacity(ell);
        let mut sum_sq = Vec::with_capacity(ell);
        for (i, col) in ys.iter().enumerate() {
            let mut s = Vec::with_capacity(n_windows + 1);
            let mut q = Vec::with_capacity(n_windows + 1);
            let mut acc_s = T::zero();
            let mut acc_q = T::zero();
            s.push(acc_s);
            q.push(acc_q);
            for &y in col {
                let c = y - mu[i];
                acc_s += c;
                acc_q += c * c;
                s.push(acc_s);
                q.push(acc_q);
            }
            sum.push(s);
            sum_sq.push(q);
        }
        let ellf = real::<T>(ell as f64);
        let x_bar = design.log_scales.iter().copied().sum::<T>() / ellf;
        let sxx = design
            .log_scales
            .iter()
            .map(|&x| (x - x_bar) * (x - x_bar))
            .sum::<T>();
        Ok(Self {
            window,
            n_windows,
            xs: design.log_scales.clone(),
            mu,
            sum,
            sum_sq,
            x_bar,
            sxx,
            degenerate_windows: degenerate,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Window indices wholly inside [k, k').
    fn window_range(&self, k: usize, k_prime: usize) -> (usize, usize) {
        let lo = k.div_ceil(self.window);
        let hi = (k_prime / self.window).min(self.n_windows);
        (lo, hi.max(lo))
    }
}

impl<T: Real> SegmentCost<T> for WindowedCost<T> {
    fn cost(&mut self, k: usize, k_prime: usize) -> T {
        let (t_lo, t_hi) = self.window_range(k, k_prime);
        if t_hi - t_lo < 2 {
            return T::infinity();
        }
        let n_w = real::<T>((t_hi - t_lo) as f64);
        let ell = self.xs.len();
        let ellf = real::<T>(ell as f64);
        // pooled OLS over the centered window points y' = y - mu_i
        let mut t_i = Vec::with_capacity(ell);
        let mut q = T::zero();
        let mut t_total = T::zero();
        let mut mu_term = T::zero();
        for i in 0..ell {
            let ti = self.sum[i][t_hi] - self.sum[i][t_lo];
            q += self.sum_sq[i][t_hi] - self.sum_sq[i][t_lo];
            t_total += ti + n_w * self.mu[i];
            mu_term += (self.xs[i] - self.x_bar) * self.mu[i];
            t_i.push(ti);
        }
        if !q.is_finite() || !t_total.is_finite() {
            return T::infinity();
        }
        let grand = t_total / (ellf * n_w);
        let mut sxy = mu_term * n_w;
        for (i, &ti) in t_i.iter().enumerate() {
            sxy += (self.xs[i] - self.x_bar) * ti;
        }
        let slope = sxy / (n_w * self.sxx);
        let intercept = grand - slope * self.x_bar;
        // RSS over centered values: residual = y' - (slope x + intercept - mu_i)
        let mut rss = q;
        for (i, &ti) in t_i.iter().enumerate() {
            let c = slope * self.xs[i] + intercept - self.mu[i];
            rss += c * (n_w * c - real::<T>(2.0) * ti);
        }
        rss.max(T::zero())
    }
}

/// How deviations are aggregated during the breakpoint search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContrastVariant {
    /// One ℓ-point regression per segment; the contrast is the sum of the
    /// per-segment residual sums of squares.
    SegmentOls,
    /// Pooled window points per segment (window length in samples).
    WindowedOls { window: usize },
}

/// Default window length: four coarsest scales, clamped so every admissible
/// segment holds at least two whole windows.
pub fn default_window(coarsest_scale: usize, min_seg: usize) -> usize {
    let max_window = (min_seg / 2).max(2 * coarsest_scale);
    (4 * coarsest_scale).min(max_window / coarsest_scale * coarsest_scale)
}

impl ContrastVariant {
    pub fn windowed_default(coarsest_scale: usize, min_seg: usize) -> Self {
        ContrastVariant::WindowedOls {
            window: default_window(coarsest_scale, min_seg),
        }
    }
}

/// Candidate breakpoints: multiples of `grid_step` that leave at least
/// `min_seg` samples on each side of every boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n: usize,
    pub m: usize,
    pub grid_step: usize,
    pub min_seg: usize,
    pub candidates: Vec<usize>,
}

impl SearchSpace {
    /// Default rule: grid step equals the coarsest scale (the variances only
    /// move when a block boundary is crossed) and
    /// `min_seg = max(2 * coarsest * ell, ceil(0.05 N))` so every scale keeps
    /// at least 2*ell blocks per segment.
    pub fn for_grid<T: Real>(
        grid: &ScaleGrid<T>,
        n: usize,
        m: usize,
        min_seg_override: Option<usize>,
    ) -> Result<Self> {
        let coarsest = grid.coarsest_scale();
        let default_min = (2 * coarsest * grid.ell()).max((n as f64 * 0.05).ceil() as usize);
        let min_seg = min_seg_override.unwrap_or(default_min);
        if min_seg < 2 * coarsest {
            return Err(Error::InfeasibleSearchSpace(format!(
                "min_seg {min_seg} below 2 * coarsest scale {coarsest}"
            )));
        }
        Self::from_parts(n, m, coarsest, min_seg)
    }

    pub fn from_parts(n: usize, m: usize, grid_step: usize, min_seg: usize) -> Result<Self> {
        if grid_step == 0 {
            return Err(Error::InfeasibleSearchSpace("grid_step must be > 0".into()));
        }
        if min_seg < 2 {
            return Err(Error::InfeasibleSearchSpace("min_seg must be >= 2".into()));
        }
        if (m + 1) * min_seg > n {
            return Err(Error::InfeasibleSearchSpace(format!(
                "{} segment(s) of at least {min_seg} samples do not fit in {n}",
                m + 1
            )));
        }
        let mut candidates = Vec::new();
        let mut c = grid_step * min_seg.div_ceil(grid_step);
        while c + min_seg <= n {
            candidates.push(c);
            c += grid_step;
        }
        if m > 0 && candidates.len() < m {
            return Err(Error::InfeasibleSearchSpace(format!(
                "only {} candidate(s) on the grid for m = {m}",
                candidates.len()
            )));
        }
        Ok(Self {
            n,
            m,
            grid_step,
            min_seg,
            candidates,
        })
    }
}

/// Exact minimization of the total segment cost over the candidate grid.
/// Returns the breakpoints and the minimal total. Ties resolve to the
/// lexicographically smallest breakpoint vector.
pub fn minimize_contrast<T: Real, C: SegmentCost<T>>(
    cost: &mut C,
    space: &SearchSpace,
) -> Result<(Vec<usize>, T)> {
    let n = space.n;
    let m = space.m;
    if m == 0 {
        let total = cost.cost(0, n);
        if !total.is_finite() {
            return Err(Error::InfeasibleSearchSpace(
                "whole-series cost is not finite".into(),
            ));
        }
        return Ok((Vec::new(), total));
    }

    let cands = &space.candidates;
    let c = cands.len();
    // suffix[j][i]: minimal cost of covering [cands[i], n) with j segments;
    // choice[j][i]: index of the next breakpoint achieving it (j >= 2).
    let mut suffix = vec![vec![T::infinity(); c]; m + 1];
    let mut choice = vec![vec![usize::MAX; c]; m + 1];
    for i in 0..c {
        if n - cands[i] >= space.min_seg {
            suffix[1][i] = cost.cost(cands[i], n);
        }
    }
    for j in 2..=m {
        for i in 0..c {
            let mut best = T::infinity();
            let mut best_next = usize::MAX;
            for next in (i + 1)..c {
                if cands[next] - cands[i] < space.min_seg {
                    continue;
                }
                let tail = suffix[j - 1][next];
                if !tail.is_finite() {
                    continue;
                }
                let v = cost.cost(cands[i], cands[next]) + tail;
                if v < best {
                    best = v;
                    best_next = next;
                }
            }
            suffix[j][i] = best;
            choice[j][i] = best_next;
        }
    }

    let mut best = T::infinity();
    let mut first = usize::MAX;
    for i in 0..c {
        if cands[i] < space.min_seg {
            continue;
        }
        let tail = suffix[m][i];
        if !tail.is_finite() {
            continue;
        }
        let v = cost.cost(0, cands[i]) + tail;
        if v < best {
            best = v;
            first = i;
        }
    }
    if first == usize::MAX {
        return Err(Error::InfeasibleSearchSpace(
            "no breakpoint configuration with finite contrast".into(),
        ));
    }

    let mut k_hat = Vec::with_capacity(m);
    let mut i = first;
    k_hat.push(cands[i]);
    for j in (2..=m).rev() {
        i = choice[j][i];
        k_hat.push(cands[i]);
    }
    Ok((k_hat, best))
}

/// One detected segment with its whole-segment log-log regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFit<T> {
    pub k_lo: usize,
    pub k_hi: usize,
    /// Y_i = log S over the whole segment, one entry per scale.
    pub log_variances: Vec<T>,
    pub fit: OlsFit<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics<T> {
    pub n: usize,
    pub m: usize,
    pub grid_step: usize,
    pub min_seg: usize,
    pub n_candidates: usize,
    pub variant: ContrastVariant,
    /// Value of the minimized search objective (variant-dependent).
    pub objective: T,
}

/// Breakpoints, per-segment regressions and the contrast value
/// (sum of whole-segment residual sums of squares).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointResult<T> {
    pub k_hat: Vec<usize>,
    pub tau_hat: Vec<T>,
    pub segments: Vec<SegmentFit<T>>,
    pub contrast: T,
    pub diagnostics: Diagnostics<T>,
    pub warnings: Vec<Warning>,
}

impl<T: Real> ChangePointResult<T> {
    /// Segment boundaries 0 = k_0 < k_1 < ... < k_{m+1} = N.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut b = Vec::with_capacity(self.k_hat.len() + 2);
        b.push(0);
        b.extend_from_slice(&self.k_hat);
        b.push(self.diagnostics.n);
        b
    }

    /// Spread max α̂ - min α̂ over the detected segments.
    pub fn alpha_spread(&self) -> T {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for seg in &self.segments {
            lo = lo.min(seg.fit.alpha);
            hi = hi.max(seg.fit.alpha);
        }
        (hi - lo).max(T::zero())
    }
}

/// Minimizes the default contrast over the search space and refits each
/// winning segment by OLS on its whole-segment log variances.
pub fn detect_changes<T: Real>(
    cache: &CoefficientCache<T>,
    space: &SearchSpace,
    design: &RegressionDesign<T>,
) -> Result<ChangePointResult<T>> {
    let coarsest = *cache.scales.last().unwrap();
    let variant = ContrastVariant::windowed_default(coarsest, space.min_seg);
    detect_changes_with(cache, space, design, variant)
}

pub fn detect_changes_with<T: Real>(
    cache: &CoefficientCache<T>,
    space: &SearchSpace,
    design: &RegressionDesign<T>,
    variant: ContrastVariant,
) -> Result<ChangePointResult<T>> {
    if space.n != cache.n {
        return Err(Error::InfeasibleSearchSpace(format!(
            "search space built for N = {}, cache has N = {}",
            space.n, cache.n
        )));
    }
    // surfaces degenerate input (for example a constant series) directly
    cache.log_variance_vector(0, cache.n)?;

    let mut warnings = Vec::new();
    let (k_hat, objective) = match variant {
        ContrastVariant::SegmentOls => {
            let mut cost = CacheCost::new(cache, design);
            let out = minimize_contrast(&mut cost, space)?;
            warnings.append(&mut cost.warnings);
            out
        }
        ContrastVariant::WindowedOls { window } => {
            let mut cost = WindowedCost::build(cache, design, window)?;
            let out = minimize_contrast(&mut cost, space)?;
            if cost.degenerate_windows > 0 {
                warnings.push(Warning::new(
                    WarningCode::DegenerateCost,
                    format!(
                        "{} degenerate window statistic(s) excluded from the search",
                        cost.degenerate_windows
                    ),
                ));
            }
            out
        }
    };

    let mut boundaries = Vec::with_capacity(k_hat.len() + 2);
    boundaries.push(0);
    boundaries.extend_from_slice(&k_hat);
    boundaries.push(cache.n);

    let mut segments = Vec::with_capacity(boundaries.len() - 1);
    let mut contrast = T::zero();
    for w in boundaries.windows(2) {
        let y = cache.log_variance_vector(w[0], w[1])?;
        let fit = ols_fit(&y, design)?;
        contrast += fit.rss;
        segments.push(SegmentFit {
            k_lo: w[0],
            k_hi: w[1],
            log_variances: y,
            fit,
        });
    }

    let n_t = real::<T>(cache.n as f64);
    Ok(ChangePointResult {
        tau_hat: k_hat.iter().map(|&k| real::<T>(k as f64) / n_t).collect(),
        k_hat,
        segments,
        contrast,
        diagnostics: Diagnostics {
            n: cache.n,
            m: space.m,
            grid_step: space.grid_step,
            min_seg: space.min_seg,
            n_candidates: space.candidates.len(),
            variant,
            objective,
        },
        warnings,
    })
}
