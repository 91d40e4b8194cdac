//! Exact-covariance Gaussian process generators: fractional Gaussian noise,
//! FARIMA(0,d,0), white noise, fractional Brownian motion, and piecewise
//! concatenations with prescribed change fractions.
//!
//! Stationary samples come from circulant embedding of the autocovariance
//! (Davies-Harte), which is exact when the circulant eigenvalues are
//! nonnegative; for short series a Durbin-Levinson recursion (the progressive
//! Cholesky factorization of the Toeplitz covariance) is the fallback.

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, SeededRng};
use crate::scalar::{real, Real};
use crate::special::ln_gamma;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Relative tolerance on negative circulant eigenvalues before the embedding
/// is declared invalid.
const EMBEDDING_EIG_TOL: f64 = 1e-9;

/// Largest series length for which the Durbin-Levinson fallback is attempted
/// when the embedding fails.
const CHOLESKY_FALLBACK_MAX: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StationaryFamily<T> {
    /// Fractional Gaussian noise with Hurst index `hurst` (LRD exponent
    /// D = 2H - 1).
    Fgn {
        hurst: T,
    },
    /// FARIMA(0,d,0) with memory `d` (LRD exponent D = 2d).
    Farima {
        d: T,
    },
    WhiteNoise,
}

/// A stationary Gaussian segment model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarySpec<T> {
    #[serde(flatten)]
    pub family: StationaryFamily<T>,
    pub variance_scale: T,
}

impl<T: Real> StationarySpec<T> {
    pub fn fgn(hurst: T, variance_scale: T) -> Result<Self> {
        let spec = Self {
            family: StationaryFamily::Fgn { hurst },
            variance_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn farima(d: T, variance_scale: T) -> Result<Self> {
        let spec = Self {
            family: StationaryFamily::Farima { d },
            variance_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn white_noise(variance_scale: T) -> Result<Self> {
        let spec = Self {
            family: StationaryFamily::WhiteNoise,
            variance_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.variance_scale.is_finite() || self.variance_scale <= T::zero() {
            return Err(Error::InvalidParameter {
                name: "variance_scale",
                value: self.variance_scale.to_f64_lossy(),
                constraint: "must be > 0",
            });
        }
        match self.family {
            StationaryFamily::Fgn { hurst } => check_hurst(hurst),
            StationaryFamily::Farima { d } => {
                if d <= T::zero() || d >= real::<T>(0.5) {
                    return Err(Error::InvalidParameter {
                        name: "d",
                        value: d.to_f64_lossy(),
                        constraint: "must lie in (0, 0.5)",
                    });
                }
                Ok(())
            }
            StationaryFamily::WhiteNoise => Ok(()),
        }
    }

    /// LRD exponent D of the segment (slope of the log-log wavelet-variance
    /// line in the stationary regime).
    pub fn alpha(&self) -> T {
        match self.family {
            StationaryFamily::Fgn { hurst } => real::<T>(2.0) * hurst - T::one(),
            StationaryFamily::Farima { d } => real::<T>(2.0) * d,
            StationaryFamily::WhiteNoise => T::zero(),
        }
    }

    /// Autocovariances at lags 0..=max_lag.
    pub fn autocovariance(&self, max_lag: usize) -> Result<Vec<T>> {
        match self.family {
            StationaryFamily::Fgn { hurst } => (0..=max_lag)
                .map(|k| fgn_autocovariance(hurst, self.variance_scale, k))
                .collect(),
            StationaryFamily::Farima { d } => {
                farima_autocovariance_seq(d, self.variance_scale, max_lag)
            }
            StationaryFamily::WhiteNoise => {
                let mut g = vec![T::zero(); max_lag + 1];
                g[0] = self.variance_scale;
                Ok(g)
            }
        }
    }
}

fn check_hurst<T: Real>(hurst: T) -> Result<()> {
    if !hurst.is_finite() || hurst <= T::zero() || hurst >= T::one() {
        return Err(Error::InvalidParameter {
            name: "hurst",
            value: hurst.to_f64_lossy(),
            constraint: "must lie in (0, 1)",
        });
    }
    Ok(())
}

/// Autocovariance of fractional Gaussian noise:
/// `(σ²/2)(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})`.
pub fn fgn_autocovariance<T: Real>(hurst: T, sigma2: T, lag: usize) -> Result<T> {
    check_hurst(hurst)?;
    if !sigma2.is_finite() || sigma2 <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "sigma2",
            value: sigma2.to_f64_lossy(),
            constraint: "must be > 0",
        });
    }
    let two_h = real::<T>(2.0) * hurst;
    let k = real::<T>(lag as f64);
    let half = real::<T>(0.5);
    let v = (k + T::one()).abs().powf(two_h) - real::<T>(2.0) * k.abs().powf(two_h)
        + (k - T::one()).abs().powf(two_h);
    Ok(half * sigma2 * v)
}

/// Autocovariance of FARIMA(0,d,0) at a single lag.
pub fn farima_autocovariance<T: Real>(d: T, sigma2: T, lag: usize) -> Result<T> {
    Ok(farima_autocovariance_seq(d, sigma2, lag)?[lag])
}

/// Autocovariances of FARIMA(0,d,0) at lags 0..=max_lag, by the exact
/// recursion γ(k+1) = γ(k)·(k+d)/(k+1-d) started from
/// γ(0) = σ² Γ(1-2d)/Γ(1-d)².
pub fn farima_autocovariance_seq<T: Real>(d: T, sigma2: T, max_lag: usize) -> Result<Vec<T>> {
    StationarySpec {
        family: StationaryFamily::Farima { d },
        variance_scale: sigma2,
    }
    .validate()?;
    let one = T::one();
    let gamma0 =
        sigma2 * (ln_gamma(one - real::<T>(2.0) * d) - real::<T>(2.0) * ln_gamma(one - d)).exp();
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(gamma0);
    let mut g = gamma0;
    for k in 0..max_lag {
        let kf = real::<T>(k as f64);
        g = g * (kf + d) / (kf + one - d);
        out.push(g);
    }
    Ok(out)
}

/// One spec per segment of a piecewise process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentSpec<T> {
    Stationary(StationarySpec<T>),
    Fbm { hurst: T, variance_scale: T },
}

impl<T: Real> SegmentSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            SegmentSpec::Stationary(s) => s.validate(),
            SegmentSpec::Fbm {
                hurst,
                variance_scale,
            } => {
                check_hurst(*hurst)?;
                if !variance_scale.is_finite() || *variance_scale <= T::zero() {
                    return Err(Error::InvalidParameter {
                        name: "variance_scale",
                        value: variance_scale.to_f64_lossy(),
                        constraint: "must be > 0",
                    });
                }
                Ok(())
            }
        }
    }

    /// The wavelet-variance scaling exponent of the segment: D for stationary
    /// models, 2H + 1 for fractional Brownian motion.
    pub fn alpha(&self) -> T {
        match self {
            SegmentSpec::Stationary(s) => s.alpha(),
            SegmentSpec::Fbm { hurst, .. } => real::<T>(2.0) * *hurst + T::one(),
        }
    }
}

/// A piecewise Gaussian process on indices 0..=N with `m` abrupt exponent
/// changes at fractions `change_fractions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSpec<T> {
    pub n_samples: usize,
    pub change_fractions: Vec<T>,
    pub segments: Vec<SegmentSpec<T>>,
    pub seed: u64,
    /// Offset each segment by the previous segment's last value. Only a
    /// cosmetic option for plots; off by default.
    #[serde(default)]
    pub level_pasting: bool,
}

impl<T: Real> PiecewiseSpec<T> {
    pub fn new(
        n_samples: usize,
        change_fractions: Vec<T>,
        segments: Vec<SegmentSpec<T>>,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            n_samples,
            change_fractions,
            segments,
            seed,
            level_pasting: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidSpec(format!(
                "n_samples = {} must be >= 2",
                self.n_samples
            )));
        }
        if self.segments.len() != self.change_fractions.len() + 1 {
            return Err(Error::InvalidSpec(format!(
                "{} change fraction(s) require {} segment spec(s), got {}",
                self.change_fractions.len(),
                self.change_fractions.len() + 1,
                self.segments.len()
            )));
        }
        let mut prev = T::zero();
        for (i, &tau) in self.change_fractions.iter().enumerate() {
            if !(tau > prev && tau < T::one()) {
                return Err(Error::InvalidSpec(format!(
                    "change fractions must be strictly increasing in (0, 1); offender at index {i}"
                )));
            }
            prev = tau;
        }
        for seg in &self.segments {
            seg.validate()?;
        }
        for (j, pair) in self.segments.windows(2).enumerate() {
            if pair[0].alpha() == pair[1].alpha() {
                return Err(Error::InvalidSpec(format!(
                    "adjacent segments {j} and {} share the same exponent; \
                     abrupt changes require distinct exponents",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.change_fractions.len()
    }

    /// Integer change points k_j = floor(N τ_j).
    pub fn change_points(&self) -> Vec<usize> {
        let n = real::<T>(self.n_samples as f64);
        self.change_fractions
            .iter()
            .map(|&tau| (tau * n).floor().to_f64_lossy() as usize)
            .collect()
    }
}

/// Real-valued equally spaced samples X_0..X_N, optionally carrying the
/// generating spec as ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    pub values: Vec<T>,
    pub truth: Option<PiecewiseSpec<T>>,
}

impl<T: Real> TimeSeries<T> {
    pub fn from_values(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "time series must have at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "non-finite sample at index {bad}"
            )));
        }
        Ok(Self {
            values,
            truth: None,
        })
    }

    /// Largest sample index N (the series holds N + 1 values).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }
}

/// Eigenvalues of the circulant embedding of autocovariances `gamma[0..n]`
/// for a target sample of length n = gamma.len().
pub(crate) fn circulant_eigenvalues<T: Real>(gamma: &[T]) -> Vec<T> {
    let n = gamma.len();
    let m = 2 * (n - 1).max(1);
    let mut row: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); m];
    for (j, &g) in gamma.iter().enumerate() {
        row[j] = Complex::new(g, T::zero());
        if j > 0 && j < n - 1 {
            row[m - j] = Complex::new(g, T::zero());
        }
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut row);
    row.into_iter().map(|c| c.re).collect()
}

/// Draws an exact sample of a stationary Gaussian process with the given
/// autocovariances (lags 0..n-1) by circulant embedding.
fn sample_circulant<T: Real>(gamma: &[T], rng: &mut SeededRng) -> Result<Vec<T>> {
    let n = gamma.len();
    let m = 2 * (n - 1).max(1);
    let eigs = circulant_eigenvalues(gamma);
    let max_eig = eigs.iter().cloned().fold(T::zero(), T::max);
    let min_eig = eigs.iter().cloned().fold(T::infinity(), T::min);
    if min_eig < -real::<T>(EMBEDDING_EIG_TOL) * max_eig {
        return Err(Error::EmbeddingFailed {
            min_eigenvalue: min_eig.to_f64_lossy(),
            max_eigenvalue: max_eig.to_f64_lossy(),
        });
    }

    let mf = real::<T>(m as f64);
    let half_idx = m / 2; // equals n - 1
    let mut w: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); m];
    w[0] = Complex::new(
        (eigs[0].max(T::zero()) / mf).sqrt() * T::standard_normal(rng),
        T::zero(),
    );
    for k in 1..half_idx {
        let scale = (eigs[k].max(T::zero()) / (real::<T>(2.0) * mf)).sqrt();
        let g_re = T::standard_normal(rng);
        let g_im = T::standard_normal(rng);
        w[k] = Complex::new(scale * g_re, scale * g_im);
        w[m - k] = w[k].conj();
    }
    if half_idx > 0 {
        w[half_idx] = Complex::new(
            (eigs[half_idx].max(T::zero()) / mf).sqrt() * T::standard_normal(rng),
            T::zero(),
        );
    }

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut w);
    Ok(w.into_iter().take(n).map(|c| c.re).collect())
}

/// Durbin-Levinson sampling: the progressive Cholesky factorization of the
/// Toeplitz covariance. O(n²); used as fallback for short series when the
/// embedding is invalid.
fn sample_durbin_levinson<T: Real>(gamma: &[T], rng: &mut SeededRng) -> Result<Vec<T>> {
    let n = gamma.len();
    let mut x = vec![T::zero(); n];
    if gamma[0] <= T::zero() {
        return Err(Error::NotPositiveDefinite("lag-0 covariance".into()));
    }
    x[0] = gamma[0].sqrt() * T::standard_normal(rng);
    let mut phi_prev: Vec<T> = Vec::new();
    let mut v = gamma[0];
    for t in 1..n {
        // update partial autocorrelation coefficients
        let mut acc = gamma[t];
        for (j, &p) in phi_prev.iter().enumerate() {
            acc -= p * gamma[t - 1 - j];
        }
        let kappa = acc / v;
        let mut phi = vec![T::zero(); t];
        for j in 0..t - 1 {
            phi[j] = phi_prev[j] - kappa * phi_prev[t - 2 - j];
        }
        phi[t - 1] = kappa;
        v *= T::one() - kappa * kappa;
        if v <= T::zero() {
            return Err(Error::NotPositiveDefinite(format!(
                "innovation variance at step {t}"
            )));
        }
        let mut mean = T::zero();
        for (j, &p) in phi.iter().enumerate() {
            mean += p * x[t - 1 - j];
        }
        x[t] = mean + v.sqrt() * T::standard_normal(rng);
        phi_prev = phi;
    }
    Ok(x)
}

fn sample_stationary_values<T: Real>(
    spec: &StationarySpec<T>,
    n: usize,
    rng: &mut SeededRng,
) -> Result<Vec<T>> {
    let gamma = spec.autocovariance(n - 1)?;
    match sample_circulant(&gamma, rng) {
        Ok(v) => Ok(v),
        Err(Error::EmbeddingFailed { .. }) if n <= CHOLESKY_FALLBACK_MAX => {
            sample_durbin_levinson(&gamma, rng)
        }
        Err(e) => Err(e),
    }
}

/// Exact sample of a stationary Gaussian process, `n` values.
pub fn gen_stationary<T: Real>(
    spec: &StationarySpec<T>,
    n: usize,
    seed: u64,
) -> Result<TimeSeries<T>> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            constraint: "must be >= 2",
        });
    }
    let mut rng = rng_from_seed(seed);
    let values = sample_stationary_values(spec, n, &mut rng)?;
    Ok(TimeSeries {
        values,
        truth: None,
    })
}

/// Exact sample of fractional Brownian motion: X_0 = 0 and increments are
/// fractional Gaussian noise, so Var(X_t) = σ² t^{2H} in distribution.
pub fn gen_fbm<T: Real>(hurst: T, sigma2: T, n: usize, seed: u64) -> Result<TimeSeries<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            constraint: "must be >= 2",
        });
    }
    let mut rng = rng_from_seed(seed);
    let values = fbm_values(hurst, sigma2, n, &mut rng)?;
    Ok(TimeSeries {
        values,
        truth: None,
    })
}

fn fbm_values<T: Real>(hurst: T, sigma2: T, n: usize, rng: &mut SeededRng) -> Result<Vec<T>> {
    let spec = StationarySpec {
        family: StationaryFamily::Fgn { hurst },
        variance_scale: sigma2,
    };
    spec.validate()?;
    let increments = sample_stationary_values(&spec, n - 1, rng)?;
    let mut values = Vec::with_capacity(n);
    let mut acc = T::zero();
    values.push(acc);
    for inc in increments {
        acc += inc;
        values.push(acc);
    }
    Ok(values)
}

/// Piecewise sample on indices 0..=N: segment j is an independent sample of
/// its spec occupying `[Nτ_j, Nτ_{j+1})` (the last segment runs through N).
pub fn gen_piecewise<T: Real>(spec: &PiecewiseSpec<T>) -> Result<TimeSeries<T>> {
    spec.validate()?;
    let n = spec.n_samples;
    let mut bounds = Vec::with_capacity(spec.segments.len() + 1);
    bounds.push(0usize);
    bounds.extend(spec.change_points());
    bounds.push(n + 1); // one past the final index N

    let mut values = Vec::with_capacity(n + 1);
    let mut offset = T::zero();
    for (j, seg) in spec.segments.iter().enumerate() {
        let len = bounds[j + 1] - bounds[j];
        if len < 2 {
            return Err(Error::InvalidSpec(format!(
                "segment {j} has fewer than 2 samples; move the change fractions apart"
            )));
        }
        let mut rng = rng_from_seed(derive_seed(spec.seed, j as u64));
        let seg_values = match seg {
            SegmentSpec::Stationary(s) => sample_stationary_values(s, len, &mut rng)?,
            SegmentSpec::Fbm {
                hurst,
                variance_scale,
            } => fbm_values(*hurst, *variance_scale, len, &mut rng)?,
        };
        if spec.level_pasting {
            values.extend(seg_values.iter().map(|&v| v + offset));
            offset = *values.last().unwrap();
        } else {
            values.extend(seg_values);
        }
    }
    debug_assert_eq!(values.len(), n + 1);
    Ok(TimeSeries {
        values,
        truth: Some(spec.clone()),
    })
}
