//! Discretized wavelet coefficients, piecewise sample variances and the
//! log-variance vectors feeding every regression downstream.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::synth::TimeSeries;
use crate::wavelets::WaveletSpec;
use serde::{Deserialize, Serialize};

/// Smallest admissible analysis scale.
pub const MIN_SCALE: usize = 2;

/// Which asymptotic regime the series is analyzed under. It fixes the scale
/// rule, the admissible exponent range and the mapping from the log-log slope
/// to the domain parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Stationary long-range dependence: slope α = D ∈ (0, 1).
    Lrd,
    /// Self-similarity with stationary increments: slope α = 2H + 1 ∈ (1, 3).
    Fbm,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Lrd => "lrd",
            Regime::Fbm => "fbm",
        }
    }

    /// Open interval of admissible slopes α.
    pub fn alpha_range<T: Real>(self) -> (T, T) {
        match self {
            Regime::Lrd => (T::zero(), T::one()),
            Regime::Fbm => (T::one(), real::<T>(3.0)),
        }
    }

    /// Label of the domain parameter recovered from the slope.
    pub fn exponent_label(self) -> &'static str {
        match self {
            Regime::Lrd => "D",
            Regime::Fbm => "H",
        }
    }

    /// Maps the log-log slope to the domain parameter (D or H).
    pub fn exponent_from_alpha<T: Real>(self, alpha: T) -> T {
        match self {
            Regime::Lrd => alpha,
            Regime::Fbm => (alpha - T::one()) * real::<T>(0.5),
        }
    }

    pub fn alpha_from_exponent<T: Real>(self, exponent: T) -> T {
        match self {
            Regime::Lrd => exponent,
            Regime::Fbm => real::<T>(2.0) * exponent + T::one(),
        }
    }

    /// Exponent e in the base-scale rule a_N = N^e.
    pub fn scale_exponent<T: Real>(self, kappa: T) -> T {
        match self {
            Regime::Lrd => real::<T>(0.2) + kappa,
            Regime::Fbm => real::<T>(1.0 / 3.0) + kappa,
        }
    }

    pub fn validate_kappa<T: Real>(self, kappa: T) -> Result<()> {
        let hi = match self {
            Regime::Lrd => real::<T>(2.0 / 15.0),
            // the sharp bound depends on the exponent spread A through
            // 1/(1+4A) - 1/3; the loosest case (A = 0) is enforced here
            Regime::Fbm => real::<T>(2.0 / 3.0),
        };
        if !kappa.is_finite() || kappa <= T::zero() || kappa >= hi {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa.to_f64_lossy(),
                constraint: match self {
                    Regime::Lrd => "must lie in (0, 2/15) for the lrd regime",
                    Regime::Fbm => "must lie in (0, 2/3) for the fbm regime",
                },
            });
        }
        Ok(())
    }

    /// Exponent of the localization rate v_N = N^e. `spread_h` is the spread
    /// of the self-similarity exponent (A = sup H - inf H); it only matters in
    /// the FBM regime.
    pub fn rate_exponent<T: Real>(self, kappa: T, spread_h: T) -> T {
        match self {
            Regime::Lrd => real::<T>(0.4) - real::<T>(3.0) * kappa,
            Regime::Fbm => {
                let a = spread_h;
                real::<T>(2.0 / 3.0) * (T::one() - real::<T>(2.0) * a)
                    - kappa * (real::<T>(2.0) + real::<T>(4.0) * a)
            }
        }
    }
}

/// The analysis scales: a rounded base scale and rounded multiples of it.
///
/// Rounding to integers keeps block boundaries aligned with samples; the
/// regression abscissae downstream use the rounded scales actually computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid<T> {
    pub regime: Regime,
    /// Exponent offset in the scale rule; `None` when the grid was built from
    /// an explicit base scale.
    pub kappa: Option<T>,
    pub multipliers: Vec<T>,
    /// Base scale before rounding.
    pub raw_base_scale: T,
    /// Rounded base scale a_N (>= 2).
    pub base_scale: usize,
    /// Rounded effective scales round(r_i · a_N), strictly increasing.
    pub scales: Vec<usize>,
}

pub fn default_multipliers<T: Real>() -> Vec<T> {
    (1..=5).map(|i| real::<T>(i as f64)).collect()
}

impl<T: Real> ScaleGrid<T> {
    /// Builds the grid from the regime rule a_N = N^e with e = 1/5 + κ (LRD)
    /// or 1/3 + κ (FBM).
    pub fn from_rule(regime: Regime, kappa: T, multipliers: Vec<T>, n: usize) -> Result<Self> {
        regime.validate_kappa(kappa)?;
        let raw = real::<T>(n as f64).powf(regime.scale_exponent(kappa));
        Self::build(regime, Some(kappa), raw, multipliers)
    }

    /// Builds the grid from an explicit base scale (reference computations and
    /// tests).
    pub fn from_base(regime: Regime, base_scale: usize, multipliers: Vec<T>) -> Result<Self> {
        Self::build(regime, None, real::<T>(base_scale as f64), multipliers)
    }

    fn build(regime: Regime, kappa: Option<T>, raw_base: T, multipliers: Vec<T>) -> Result<Self> {
        if multipliers.len() < 3 {
            return Err(Error::InvalidSpec(format!(
                "need at least 3 scale multipliers, got {}",
                multipliers.len()
            )));
        }
        let mut prev = T::zero();
        for &r in &multipliers {
            if !r.is_finite() || r <= prev {
                return Err(Error::InvalidSpec(
                    "scale multipliers must be positive and strictly increasing".into(),
                ));
            }
            prev = r;
        }
        let base_scale = round_scale(raw_base);
        let scales: Vec<usize> = multipliers
            .iter()
            .map(|&r| round_scale(r * real::<T>(base_scale as f64)))
            .collect();
        for w in scales.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidSpec(format!(
                    "rounded scales collide ({} and {}); use a larger base scale \
                     or better separated multipliers",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            regime,
            kappa,
            multipliers,
            raw_base_scale: raw_base,
            base_scale,
            scales,
        })
    }

    pub fn ell(&self) -> usize {
        self.multipliers.len()
    }

    pub fn coarsest_scale(&self) -> usize {
        *self.scales.last().unwrap()
    }
}

fn round_scale<T: Real>(raw: T) -> usize {
    let r = raw.round().to_f64_lossy();
    (r as usize).max(MIN_SCALE)
}

/// Squared wavelet coefficients on the per-scale block grids, with prefix
/// sums so any piecewise sample variance is an O(1) lookup.
#[derive(Debug, Clone)]
pub struct CoefficientCache<T> {
    /// Largest sample index N of the analyzed series.
    pub n: usize,
    pub base_scale: usize,
    pub scales: Vec<usize>,
    pub log_scales: Vec<T>,
    pub wavelet_name: String,
    /// Squared coefficients e²(s_i, s_i p) per scale.
    sq: Vec<Vec<T>>,
    /// Prefix sums of `sq`, one longer than each block array.
    prefix: Vec<Vec<T>>,
}

impl<T: Real> CoefficientCache<T> {
    /// Assembles a cache from raw squared coefficients (test support).
    #[doc(hidden)]
    pub fn from_raw_blocks(
        n: usize,
        base_scale: usize,
        scales: Vec<usize>,
        sq: Vec<Vec<T>>,
    ) -> Self {
        let prefix = sq
            .iter()
            .map(|blocks| {
                let mut pre = Vec::with_capacity(blocks.len() + 1);
                let mut run = T::zero();
                pre.push(run);
                for &c in blocks {
                    run += c;
                    pre.push(run);
                }
                pre
            })
            .collect();
        Self {
            n,
            base_scale,
            log_scales: scales.iter().map(|&s| real::<T>(s as f64).ln()).collect(),
            scales,
            wavelet_name: "raw".into(),
            sq,
            prefix,
        }
    }

    pub fn build(
        series: &TimeSeries<T>,
        grid: &ScaleGrid<T>,
        wavelet: &WaveletSpec<T>,
    ) -> Result<Self> {
        if !wavelet.supports(grid.regime) {
            return Err(Error::InvalidSpec(format!(
                "wavelet `{}` is not admissible in the {} regime",
                wavelet.name,
                grid.regime.name()
            )));
        }
        let n = series.n();
        let mut sq = Vec::with_capacity(grid.scales.len());
        let mut prefix = Vec::with_capacity(grid.scales.len());
        for &s in &grid.scales {
            let blocks = n / s;
            if blocks < 2 {
                return Err(Error::InvalidSpec(format!(
                    "series of length {} too short for scale {s} (needs >= 2 blocks)",
                    n + 1
                )));
            }
            // ψ evaluated on the block-local lattice, shared across blocks;
            // centered so the discrete weights sum to zero exactly (the
            // sampled wavelet inherits the vanishing integral, which keeps
            // the local mean of nonstationary inputs out of the coefficients)
            let inv_s = real::<T>(1.0 / s as f64);
            let weights =
                centered_weights((0..=s).map(|u| wavelet.eval(real::<T>(u as f64) * inv_s)));
            // the sample sum starts at index 1, so block 0 drops u = 0 and
            // gets its own centering over the remaining lattice points
            let weights_first =
                centered_weights((1..=s).map(|u| wavelet.eval(real::<T>(u as f64) * inv_s)));
            let inv_sqrt_s = real::<T>(s as f64).sqrt().recip();
            let mut coeffs = Vec::with_capacity(blocks);
            for p in 0..blocks {
                let b = p * s;
                let mut acc = T::zero();
                if b == 0 {
                    for (j, &w) in weights_first.iter().enumerate() {
                        acc += w * series.values[1 + j];
                    }
                } else {
                    for (u, &w) in weights.iter().enumerate() {
                        acc += w * series.values[b + u];
                    }
                }
                let e = acc * inv_sqrt_s;
                coeffs.push(e * e);
            }
            let mut pre = Vec::with_capacity(blocks + 1);
            let mut run = T::zero();
            pre.push(run);
            for &c in &coeffs {
                run += c;
                pre.push(run);
            }
            sq.push(coeffs);
            prefix.push(pre);
        }
        Ok(Self {
            n,
            base_scale: grid.base_scale,
            scales: grid.scales.clone(),
            log_scales: grid
                .scales
                .iter()
                .map(|&s| real::<T>(s as f64).ln())
                .collect(),
            wavelet_name: wavelet.name.clone(),
            sq,
            prefix,
        })
    }

    pub fn ell(&self) -> usize {
        self.scales.len()
    }

    pub fn blocks(&self, scale_index: usize) -> usize {
        self.sq[scale_index].len()
    }

    pub fn squared_coefficients(&self, scale_index: usize) -> &[T] {
        &self.sq[scale_index]
    }

    /// Number of whole blocks of scale `scales[i]` inside [k, k').
    pub fn blocks_in(&self, k: usize, k_prime: usize, scale_index: usize) -> usize {
        let s = self.scales[scale_index];
        (k_prime / s).saturating_sub(k / s)
    }

    /// Piecewise sample variance S_k^{k'}(s_i) through the prefix sums.
    pub fn segment_variance(&self, k: usize, k_prime: usize, scale_index: usize) -> Result<T> {
        assert!(k < k_prime && k_prime <= self.n, "invalid segment bounds");
        let s = self.scales[scale_index];
        let p_lo = k / s;
        let p_hi = k_prime / s;
        if p_hi - p_lo < 2 {
            return Err(Error::TooFewBlocks {
                k,
                k_prime,
                scale: s,
                blocks: p_hi - p_lo,
            });
        }
        let sum = self.prefix[scale_index][p_hi] - self.prefix[scale_index][p_lo];
        let value = real::<T>(s as f64) / real::<T>((k_prime - k) as f64) * sum;
        if !value.is_finite() || value <= T::zero() {
            return Err(Error::DegenerateSegment {
                k,
                k_prime,
                value: value.to_f64_lossy(),
            });
        }
        Ok(value)
    }

    /// Y_i = log S_k^{k'}(s_i) for every scale (natural log).
    pub fn log_variance_vector(&self, k: usize, k_prime: usize) -> Result<Vec<T>> {
        (0..self.scales.len())
            .map(|i| self.segment_variance(k, k_prime, i).map(|s| s.ln()))
            .collect()
    }
}

/// Subtracts the arithmetic mean so the weights sum to zero exactly.
fn centered_weights<T: Real>(raw: impl Iterator<Item = T>) -> Vec<T> {
    let mut w: Vec<T> = raw.collect();
    if w.is_empty() {
        return w;
    }
    let mean = w.iter().copied().sum::<T>() / real::<T>(w.len() as f64);
    for v in &mut w {
        *v -= mean;
    }
    w
}

/// Discretized wavelet coefficient
/// `e_X(a, b) = a^{-1/2} Σ_{p=1}^{N} ψ((p - b)/a) X_p`,
/// where only samples with (p - b)/a in [0, 1] contribute and the sampled
/// wavelet values are centered to an exactly zero sum (see
/// [`CoefficientCache::build`]).
pub fn wavelet_coeff<T: Real>(
    x: &TimeSeries<T>,
    wavelet: &WaveletSpec<T>,
    a: T,
    b: T,
) -> Result<T> {
    let min_scale = real::<T>(MIN_SCALE as f64);
    if a < min_scale {
        return Err(Error::ScaleBelowMinimum {
            scale: a.to_f64_lossy(),
            min_scale: MIN_SCALE as f64,
        });
    }
    let n = x.n();
    let hi = b + a;
    if b < T::zero() || hi > real::<T>(n as f64) {
        return Err(Error::WindowOutOfRange {
            lo: b.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            n,
        });
    }
    let p_start = b.ceil().to_f64_lossy().max(1.0) as usize;
    let p_end = (hi.floor().to_f64_lossy() as usize).min(n);
    let weights =
        centered_weights((p_start..=p_end).map(|p| wavelet.eval((real::<T>(p as f64) - b) / a)));
    let mut acc = T::zero();
    for (j, &w) in weights.iter().enumerate() {
        acc += w * x.values[p_start + j];
    }
    Ok(acc / a.sqrt())
}
