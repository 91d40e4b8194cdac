//! The asymptotic covariance Γ(α, r_1..r_ℓ) of the normalized log-variance
//! vector, estimated by Monte Carlo on homogeneous reference paths or, in the
//! self-similar case, computed from the covariance kernel of fractional
//! Brownian motion. Matrices are cached on an α-grid with linear
//! interpolation and can be persisted as a versioned table file.

use crate::error::{Error, Result, Warning, WarningCode};
use crate::linalg::SymMat;
use crate::rng::derive_seed;
use crate::scalar::{real, Real};
use crate::synth::{gen_fbm, gen_stationary, StationarySpec};
use crate::wavelets::WaveletSpec;
use crate::wvar::{CoefficientCache, Regime, ScaleGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

/// Step of the α-grid the matrices are cached on.
pub const ALPHA_GRID_STEP: f64 = 0.05;

/// How the matrix was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    MonteCarlo {
        replicates: usize,
        n_ref: usize,
        a_ref: usize,
        seed: u64,
    },
    AnalyticFbm {
        truncation: usize,
    },
}

/// ℓ×ℓ asymptotic covariance of √(n/a_N)(log S(r_i a_N))_i at exponent α.
#[derive(Debug, Clone)]
pub struct GammaMatrix<T> {
    pub alpha: T,
    pub multipliers: Vec<T>,
    pub matrix: SymMat<T>,
    pub provenance: Provenance,
}

impl<T: Real> GammaMatrix<T> {
    pub fn ell(&self) -> usize {
        self.matrix.dim
    }
}

fn check_alpha_range<T: Real>(alpha: T, regime: Regime) -> Result<()> {
    let (lo, hi) = regime.alpha_range::<T>();
    if alpha <= lo || alpha >= hi {
        return Err(Error::AlphaOutOfRange {
            alpha: alpha.to_f64_lossy(),
            regime: regime.name(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Monte Carlo estimate of Γ(α): simulates `replicates` homogeneous reference
/// paths with exponent α (FGN in the LRD regime, FBM in the self-similar
/// regime), computes √(n/a)·log S(r_i a) on each and returns the empirical
/// covariance.
#[allow(clippy::too_many_arguments)]
pub fn gamma_mc<T: Real>(
    alpha: T,
    regime: Regime,
    multipliers: &[T],
    wavelet: &WaveletSpec<T>,
    replicates: usize,
    n_ref: usize,
    a_ref: usize,
    seed: u64,
) -> Result<GammaMatrix<T>> {
    check_alpha_range(alpha, regime)?;
    if replicates < 200 {
        return Err(Error::InvalidParameter {
            name: "replicates",
            value: replicates as f64,
            constraint: "must be >= 200",
        });
    }
    let grid = ScaleGrid::from_base(regime, a_ref, multipliers.to_vec())?;
    if n_ref < 100 * grid.coarsest_scale() {
        return Err(Error::InvalidParameter {
            name: "n_ref",
            value: n_ref as f64,
            constraint: "must give >= 100 blocks at the coarsest scale",
        });
    }

    let half = real::<T>(0.5);
    let norm = (real::<T>(n_ref as f64) / real::<T>(grid.base_scale as f64)).sqrt();
    let vectors: Result<Vec<Vec<T>>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(seed, rep as u64);
            let series = match regime {
                Regime::Lrd => {
                    // FGN with D = 2H - 1 = α
                    let hurst = (alpha + T::one()) * half;
                    gen_stationary(&StationarySpec::fgn(hurst, T::one())?, n_ref + 1, rep_seed)?
                }
                Regime::Fbm => {
                    // FBM with α = 2H + 1
                    let hurst = (alpha - T::one()) * half;
                    gen_fbm(hurst, T::one(), n_ref + 1, rep_seed)?
                }
            };
            let cache = CoefficientCache::build(&series, &grid, wavelet)?;
            let y = cache.log_variance_vector(0, n_ref)?;
            Ok(y.into_iter().map(|v| v * norm).collect())
        })
        .collect();
    let vectors = vectors?;

    let ell = multipliers.len();
    let rf = real::<T>(replicates as f64);
    let mut mean = vec![T::zero(); ell];
    for v in &vectors {
        for (m, &x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= rf;
    }
    let mut cov = SymMat::zeros(ell);
    for v in &vectors {
        for i in 0..ell {
            let di = v[i] - mean[i];
            for j in 0..=i {
                let dj = v[j] - mean[j];
                let cur = cov.get(i, j);
                cov.set(i, j, cur + di * dj);
            }
        }
    }
    let denom = rf - T::one();
    for i in 0..ell {
        for j in 0..=i {
            let val = cov.get(i, j) / denom;
            cov.set(i, j, val);
            cov.set(j, i, val);
        }
    }

    Ok(GammaMatrix {
        alpha,
        multipliers: multipliers.to_vec(),
        matrix: cov,
        provenance: Provenance::MonteCarlo {
            replicates,
            n_ref,
            a_ref,
            seed,
        },
    })
}

/// Analytic Γ for fractional Brownian motion with Hurst index `hurst`.
///
/// Coefficient covariances come from the FBM kernel: with ∫ψ = 0 the
/// covariance of two coefficients at scales r_p a, r_q a and shift δ·a reduces
/// to `-(1/2)√(r_p r_q) a^{2H+1} ∬ ψ(u)ψ(v) |r_p u - r_q v + δ|^{2H} du dv`;
/// squared correlations then aggregate over block-shift lags through the
/// Gaussian fourth-moment identity Cov(d², d'²) = 2 Cov(d, d')².
///
/// Multipliers must be integers (the block lattices of two scales then align
/// on multiples of their gcd); use the Monte Carlo route otherwise.
pub fn gamma_fbm_analytic<T: Real>(
    hurst: T,
    multipliers: &[T],
    wavelet: &WaveletSpec<T>,
    truncation: usize,
) -> Result<(GammaMatrix<T>, Vec<Warning>)> {
    if hurst <= T::zero() || hurst >= T::one() {
        return Err(Error::InvalidParameter {
            name: "hurst",
            value: hurst.to_f64_lossy(),
            constraint: "must lie in (0, 1)",
        });
    }
    if truncation < 50 {
        return Err(Error::InvalidParameter {
            name: "truncation",
            value: truncation as f64,
            constraint: "must be >= 50",
        });
    }
    let r_int: Vec<u64> = multipliers
        .iter()
        .map(|&r| {
            let rounded = r.round();
            if (r - rounded).abs() > real::<T>(1e-9) || rounded < T::one() {
                Err(Error::InvalidSpec(
                    "analytic gamma requires positive integer multipliers".into(),
                ))
            } else {
                Ok(rounded.to_f64_lossy() as u64)
            }
        })
        .collect::<Result<_>>()?;

    let ell = multipliers.len();
    let quad = PairQuadrature::new(wavelet);
    let two_h = real::<T>(2.0) * hurst;

    // normalized coefficient variances at each scale (common a^{2H+1} dropped)
    let variances: Vec<T> = (0..ell)
        .map(|p| pair_covariance(&quad, multipliers[p], multipliers[p], T::zero(), two_h))
        .collect();
    for (p, &v) in variances.iter().enumerate() {
        if !v.is_finite() || v <= T::zero() {
            return Err(Error::Numerical(format!(
                "nonpositive coefficient variance at scale index {p}: {v}"
            )));
        }
    }

    let mut warnings = Vec::new();
    let mut cov = SymMat::zeros(ell);
    let tiny = real::<T>(1e-14);
    for p in 0..ell {
        for q in 0..=p {
            let g = gcd(r_int[p], r_int[q]);
            let gf = real::<T>(g as f64);
            let denom = (variances[p] * variances[q]).sqrt();
            let rho = |delta: T| -> T {
                pair_covariance(&quad, multipliers[p], multipliers[q], delta, two_h) / denom
            };
            let mut total = rho(T::zero()).powi(2);
            let mut last_term = T::zero();
            let mut used_k = 0usize;
            for k in 1..=truncation {
                let delta = gf * real::<T>(k as f64);
                let term = rho(delta).powi(2) + rho(-delta).powi(2);
                total += term;
                last_term = term;
                used_k = k;
                if term < tiny * total {
                    break;
                }
            }
            if last_term > real::<T>(0.01) * total {
                warnings.push(Warning::new(
                    WarningCode::TruncationTail,
                    format!(
                        "lag truncation at |k| = {used_k} leaves a tail above 1% \
                         for pair ({p}, {q})"
                    ),
                ));
            }
            let value = real::<T>(2.0) * gf * total;
            cov.set(p, q, value);
            cov.set(q, p, value);
        }
    }

    Ok((
        GammaMatrix {
            alpha: real::<T>(2.0) * hurst + T::one(),
            multipliers: multipliers.to_vec(),
            matrix: cov,
            provenance: Provenance::AnalyticFbm { truncation },
        },
        warnings,
    ))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Tensor Gauss-Legendre quadrature state for the double wavelet integrals:
/// weighted ψ values on a fixed composite grid over [0, 1]².
struct PairQuadrature<T> {
    nodes: Vec<T>,
    weighted_psi: Vec<T>,
}

const PAIR_PANELS: usize = 8;

impl<T: Real> PairQuadrature<T> {
    fn new(wavelet: &WaveletSpec<T>) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        crate::wavelets::gl16_composite_points::<T>(PAIR_PANELS, &mut nodes, &mut weights);
        let weighted_psi = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| wavelet.eval(t) * w)
            .collect();
        Self {
            nodes,
            weighted_psi,
        }
    }
}

/// Normalized covariance `-(1/2)√(r_p r_q) ∬ ψψ |r_p u - r_q v + δ|^{2H}`.
fn pair_covariance<T: Real>(quad: &PairQuadrature<T>, r_p: T, r_q: T, delta: T, two_h: T) -> T {
    let mut acc = T::zero();
    for (j, &wj) in quad.weighted_psi.iter().enumerate() {
        let base = r_p * quad.nodes[j] + delta;
        let mut inner = T::zero();
        for (l, &wl) in quad.weighted_psi.iter().enumerate() {
            inner += wl * (base - r_q * quad.nodes[l]).abs().powf(two_h);
        }
        acc += wj * inner;
    }
    -real::<T>(0.5) * (r_p * r_q).sqrt() * acc
}

/// How a cache fills missing α-grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMethod {
    MonteCarlo,
    Analytic,
}

/// Configuration of an α-grid cache of Γ matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCacheConfig {
    pub regime: Regime,
    pub multipliers: Vec<f64>,
    pub wavelet: String,
    pub method: GammaMethod,
    pub replicates: usize,
    pub n_ref: usize,
    pub a_ref: usize,
    pub truncation: usize,
    pub seed: u64,
}

pub const DEFAULT_MC_REPLICATES: usize = 512;
pub const DEFAULT_TRUNCATION: usize = 60;

impl GammaCacheConfig {
    /// Monte Carlo defaults: reference scale near the scales used in practice
    /// and at least 128 blocks at the coarsest reference scale.
    pub fn mc(regime: Regime, multipliers: Vec<f64>, wavelet: &str, seed: u64) -> Self {
        let a_ref = match regime {
            Regime::Lrd => 12,
            Regime::Fbm => 20,
        };
        let coarsest = multipliers
            .iter()
            .fold(0f64, |m, &r| m.max((r * a_ref as f64).round())) as usize;
        Self {
            regime,
            multipliers,
            wavelet: wavelet.to_string(),
            method: GammaMethod::MonteCarlo,
            replicates: DEFAULT_MC_REPLICATES,
            n_ref: coarsest * 128,
            a_ref,
            truncation: DEFAULT_TRUNCATION,
            seed,
        }
    }

    pub fn analytic_fbm(multipliers: Vec<f64>, wavelet: &str) -> Self {
        Self {
            regime: Regime::Fbm,
            multipliers,
            wavelet: wavelet.to_string(),
            method: GammaMethod::Analytic,
            replicates: 0,
            n_ref: 0,
            a_ref: 0,
            truncation: DEFAULT_TRUNCATION,
            seed: 0,
        }
    }

    fn node_bounds(&self) -> (i64, i64) {
        let (lo, hi) = match self.regime {
            Regime::Lrd => (0.0, 1.0),
            Regime::Fbm => (1.0, 3.0),
        };
        let first = (lo / ALPHA_GRID_STEP).floor() as i64 + 1;
        let last = (hi / ALPHA_GRID_STEP).ceil() as i64 - 1;
        (first, last)
    }
}

/// Provider of Γ(α) matrices for inference.
pub trait GammaProvider<T>: Sync {
    fn gamma(&self, alpha: T) -> Result<GammaMatrix<T>>;
    fn regime(&self) -> Regime;
}

/// α-grid cache with lazy node computation, linear interpolation between
/// nodes, and JSON persistence. Node seeds derive from the config seed and
/// the node index, so the table content does not depend on query order.
pub struct GammaCache<T> {
    config: GammaCacheConfig,
    wavelet: WaveletSpec<T>,
    nodes: Mutex<BTreeMap<i64, GammaMatrix<T>>>,
}

impl<T: Real> GammaCache<T> {
    pub fn new(config: GammaCacheConfig) -> Result<Self> {
        if config.method == GammaMethod::Analytic && config.regime != Regime::Fbm {
            return Err(Error::InvalidSpec(
                "analytic gamma matrices exist only in the fbm regime".into(),
            ));
        }
        let wavelet = crate::wavelets::wavelet_by_name::<T>(&config.wavelet)?;
        Ok(Self {
            config,
            wavelet,
            nodes: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn config(&self) -> &GammaCacheConfig {
        &self.config
    }

    fn node_alpha(idx: i64) -> T {
        real::<T>(idx as f64 * ALPHA_GRID_STEP)
    }

    fn compute_node(&self, idx: i64) -> Result<GammaMatrix<T>> {
        let alpha = Self::node_alpha(idx);
        let multipliers: Vec<T> = self
            .config
            .multipliers
            .iter()
            .map(|&r| real::<T>(r))
            .collect();
        match self.config.method {
            GammaMethod::MonteCarlo => gamma_mc(
                alpha,
                self.config.regime,
                &multipliers,
                &self.wavelet,
                self.config.replicates,
                self.config.n_ref,
                self.config.a_ref,
                derive_seed(self.config.seed, idx as u64),
            ),
            GammaMethod::Analytic => {
                let hurst = (alpha - T::one()) * real::<T>(0.5);
                let (gamma, _warnings) =
                    gamma_fbm_analytic(hurst, &multipliers, &self.wavelet, self.config.truncation)?;
                Ok(gamma)
            }
        }
    }

    fn node(&self, idx: i64) -> Result<GammaMatrix<T>> {
        if let Some(node) = self.nodes.lock().unwrap().get(&idx) {
            return Ok(node.clone());
        }
        let computed = self.compute_node(idx)?;
        let mut lock = self.nodes.lock().unwrap();
        Ok(lock.entry(idx).or_insert(computed).clone())
    }

    /// Computes every node with α in [alpha_lo, alpha_hi].
    pub fn precompute(&self, alpha_lo: T, alpha_hi: T) -> Result<usize> {
        let (first, last) = self.config.node_bounds();
        let indices: Vec<i64> = (first..=last)
            .filter(|&i| {
                let a = Self::node_alpha(i);
                a >= alpha_lo && a <= alpha_hi
            })
            .collect();
        let computed: Result<Vec<(i64, GammaMatrix<T>)>> = indices
            .par_iter()
            .map(|&i| self.compute_node(i).map(|g| (i, g)))
            .collect();
        let computed = computed?;
        let count = computed.len();
        let mut lock = self.nodes.lock().unwrap();
        for (i, g) in computed {
            lock.entry(i).or_insert(g);
        }
        Ok(count)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.lock().unwrap().len()
    }

    /// Serializable snapshot of the cache (entries stored as f64).
    pub fn to_table(&self) -> GammaTable {
        let nodes = self
            .nodes
            .lock()
            .unwrap()
            .iter()
            .map(|(&idx, g)| GammaTableNode {
                alpha: idx as f64 * ALPHA_GRID_STEP,
                entries: g.matrix.data.iter().map(|v| v.to_f64_lossy()).collect(),
            })
            .collect();
        GammaTable {
            schema_version: GAMMA_TABLE_SCHEMA_VERSION,
            config: self.config.clone(),
            nodes,
        }
    }

    /// Loads previously computed nodes; the table config must match.
    pub fn load_table(&self, table: &GammaTable) -> Result<usize> {
        if table.schema_version != GAMMA_TABLE_SCHEMA_VERSION {
            return Err(Error::GammaTableMismatch(format!(
                "schema version {} (expected {})",
                table.schema_version, GAMMA_TABLE_SCHEMA_VERSION
            )));
        }
        if table.config != self.config {
            return Err(Error::GammaTableMismatch(
                "table was built with a different configuration".into(),
            ));
        }
        let ell = self.config.multipliers.len();
        let mut lock = self.nodes.lock().unwrap();
        let mut loaded = 0;
        for node in &table.nodes {
            if node.entries.len() != ell * ell {
                return Err(Error::GammaTableMismatch(format!(
                    "node at alpha {} has {} entries, expected {}",
                    node.alpha,
                    node.entries.len(),
                    ell * ell
                )));
            }
            let idx = (node.alpha / ALPHA_GRID_STEP).round() as i64;
            let matrix =
                SymMat::from_rows(ell, node.entries.iter().map(|&v| real::<T>(v)).collect());
            lock.entry(idx).or_insert(GammaMatrix {
                alpha: Self::node_alpha(idx),
                multipliers: self
                    .config
                    .multipliers
                    .iter()
                    .map(|&r| real::<T>(r))
                    .collect(),
                matrix,
                provenance: match self.config.method {
                    GammaMethod::MonteCarlo => Provenance::MonteCarlo {
                        replicates: self.config.replicates,
                        n_ref: self.config.n_ref,
                        a_ref: self.config.a_ref,
                        seed: derive_seed(self.config.seed, idx as u64),
                    },
                    GammaMethod::Analytic => Provenance::AnalyticFbm {
                        truncation: self.config.truncation,
                    },
                },
            });
            loaded += 1;
        }
        Ok(loaded)
    }

    pub fn save_to_path(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_table())
            .map_err(|e| Error::Numerical(format!("serializing gamma table: {e}")))?;
        std::fs::write(path, json)
            .map_err(|e| Error::Numerical(format!("writing {}: {e}", path.display())))
    }

    pub fn load_from_path(&self, path: &Path) -> Result<usize> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| Error::Numerical(format!("reading {}: {e}", path.display())))?;
        let table: GammaTable = serde_json::from_str(&json)
            .map_err(|e| Error::GammaTableMismatch(format!("parsing {}: {e}", path.display())))?;
        self.load_table(&table)
    }
}

impl<T: Real> GammaProvider<T> for GammaCache<T> {
    fn gamma(&self, alpha: T) -> Result<GammaMatrix<T>> {
        check_alpha_range(alpha, self.config.regime)?;
        let (first, last) = self.config.node_bounds();
        let t = (alpha.to_f64_lossy() / ALPHA_GRID_STEP).clamp(first as f64, last as f64);
        let i0 = (t.floor() as i64).min(last - 1).max(first);
        let i1 = i0 + 1;
        let w = real::<T>(t - i0 as f64);
        let lo = self.node(i0)?;
        let hi = self.node(i1)?;
        let dim = lo.matrix.dim;
        let mut data = Vec::with_capacity(dim * dim);
        for (a, b) in lo.matrix.data.iter().zip(&hi.matrix.data) {
            data.push(*a * (T::one() - w) + *b * w);
        }
        Ok(GammaMatrix {
            alpha,
            multipliers: lo.multipliers.clone(),
            matrix: SymMat::from_rows(dim, data),
            provenance: lo.provenance.clone(),
        })
    }

    fn regime(&self) -> Regime {
        self.config.regime
    }
}

/// Identity Γ; collapses FGLS to OLS. Test support.
pub struct IdentityGamma {
    pub ell: usize,
    pub regime: Regime,
}

impl<T: Real> GammaProvider<T> for IdentityGamma {
    fn gamma(&self, alpha: T) -> Result<GammaMatrix<T>> {
        Ok(GammaMatrix {
            alpha,
            multipliers: (1..=self.ell).map(|i| real::<T>(i as f64)).collect(),
            matrix: SymMat::identity(self.ell),
            provenance: Provenance::AnalyticFbm { truncation: 0 },
        })
    }

    fn regime(&self) -> Regime {
        self.regime
    }
}

pub const GAMMA_TABLE_SCHEMA_VERSION: u32 = 1;

/// On-disk format of a Γ table (entries pinned to f64).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaTable {
    pub schema_version: u32,
    pub config: GammaCacheConfig,
    pub nodes: Vec<GammaTableNode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaTableNode {
    pub alpha: f64,
    pub entries: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multipliers3() -> Vec<f64> {
        vec![1.0, 2.0, 3.0]
    }

    #[test]
    fn mc_rejects_out_of_range_alpha_and_small_r() {
        let w = WaveletSpec::poly4();
        let r = multipliers3();
        assert!(matches!(
            gamma_mc(1.2f64, Regime::Lrd, &r, &w, 256, 4000, 8, 1),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            gamma_mc(0.5f64, Regime::Lrd, &r, &w, 100, 4000, 8, 1),
            Err(Error::InvalidParameter {
                name: "replicates",
                ..
            })
        ));
        assert!(matches!(
            gamma_mc(0.5f64, Regime::Lrd, &r, &w, 256, 500, 8, 1),
            Err(Error::InvalidParameter { name: "n_ref", .. })
        ));
    }

    #[test]
    fn mc_matrix_is_symmetric_positive() {
        let w = WaveletSpec::poly4();
        let g = gamma_mc(0.5f64, Regime::Lrd, &multipliers3(), &w, 256, 3000, 8, 42).unwrap();
        assert!(g.matrix.is_symmetric(1e-12));
        let eigs = g.matrix.eigenvalues();
        assert!(eigs[0] > 0.0, "eigenvalues {eigs:?}");
    }

    #[test]
    fn near_white_noise_diagonal_close_to_two_r() {
        // α → 0 limit: coefficients at disjoint blocks are independent, so
        // Var(√(n/a) log S(r a)) → 2 r
        let w = WaveletSpec::poly4();
        let g = gamma_mc(0.02f64, Regime::Lrd, &multipliers3(), &w, 2048, 6000, 8, 7).unwrap();
        for (p, &r) in multipliers3().iter().enumerate() {
            let got = g.matrix.get(p, p);
            assert!(
                (got - 2.0 * r).abs() < 0.20 * 2.0 * r,
                "scale {p}: {got} vs {}",
                2.0 * r
            );
        }
    }

    #[test]
    fn analytic_white_noise_case() {
        // H = 1/2: Brownian motion; disjoint-support coefficients are
        // independent, so off-lag correlations vanish and γ_pp = 2 r_p
        let w = WaveletSpec::poly4();
        let (g, warnings) = gamma_fbm_analytic(0.5f64, &multipliers3(), &w, 60).unwrap();
        assert!(warnings.is_empty());
        for (p, &r) in multipliers3().iter().enumerate() {
            let got = g.matrix.get(p, p);
            assert!((got - 2.0 * r).abs() < 1e-6, "scale {p}: {got}");
        }
        assert!(g.matrix.is_symmetric(1e-12));
        assert!(g.matrix.eigenvalues()[0] > 0.0);
    }

    #[test]
    fn analytic_rejects_bad_inputs() {
        let w = WaveletSpec::poly4();
        assert!(gamma_fbm_analytic(0.0f64, &multipliers3(), &w, 60).is_err());
        assert!(gamma_fbm_analytic(0.7f64, &multipliers3(), &w, 10).is_err());
        assert!(gamma_fbm_analytic(0.7f64, &[1.0, 1.5, 3.0], &w, 60).is_err());
    }

    #[test]
    fn analytic_self_correlation_is_one() {
        // the normalized lag-0 self-correlation underlying γ_pp is exactly 1
        let w = WaveletSpec::<f64>::poly4();
        let quad = PairQuadrature::new(&w);
        let var = pair_covariance(&quad, 2.0, 2.0, 0.0, 1.4);
        let rho = pair_covariance(&quad, 2.0, 2.0, 0.0, 1.4) / var;
        assert!((rho - 1.0).abs() < 1e-15);
        assert!(var > 0.0);
    }

    #[test]
    fn mc_and_analytic_agree_for_fbm() {
        let w = WaveletSpec::poly4();
        let r = multipliers3();
        let (analytic, _) = gamma_fbm_analytic(0.7f64, &r, &w, 60).unwrap();
        let mc = gamma_mc(2.4f64, Regime::Fbm, &r, &w, 1024, 4000, 10, 11).unwrap();
        let diff = analytic.matrix.sub(&mc.matrix).frobenius_norm();
        let rel = diff / analytic.matrix.frobenius_norm();
        assert!(rel < 0.15, "relative Frobenius distance {rel}");
    }

    #[test]
    fn cache_interpolates_and_is_continuous() {
        let mut config = GammaCacheConfig::mc(Regime::Lrd, multipliers3(), "poly4", 3);
        config.replicates = 256;
        config.n_ref = 3000;
        config.a_ref = 8;
        let cache = GammaCache::<f64>::new(config).unwrap();
        let g_node = cache.gamma(0.40).unwrap();
        let g_mid = cache.gamma(0.425).unwrap();
        let g_next = cache.gamma(0.45).unwrap();
        // midpoint is the average of its bracketing nodes
        for i in 0..3 {
            for j in 0..3 {
                let expect = 0.5 * (g_node.matrix.get(i, j) + g_next.matrix.get(i, j));
                assert!((g_mid.matrix.get(i, j) - expect).abs() < 1e-12);
            }
        }
        // adjacent nodes stay close (continuity of α ↦ Γ plus MC noise)
        let rel =
            g_node.matrix.sub(&g_next.matrix).frobenius_norm() / g_node.matrix.frobenius_norm();
        assert!(rel < 0.5, "adjacent node jump {rel}");
        // queries near the range edge clamp onto the node span
        assert!(cache.gamma(0.01).is_ok());
        assert!(cache.gamma(1.2).is_err());
    }

    #[test]
    fn cache_round_trips_through_table_file() {
        let mut config = GammaCacheConfig::mc(Regime::Lrd, multipliers3(), "poly4", 5);
        config.replicates = 256;
        config.n_ref = 3000;
        config.a_ref = 8;
        let cache = GammaCache::<f64>::new(config.clone()).unwrap();
        let g = cache.gamma(0.42).unwrap();
        let table = cache.to_table();
        assert_eq!(table.nodes.len(), 2);

        let reloaded = GammaCache::<f64>::new(config.clone()).unwrap();
        reloaded.load_table(&table).unwrap();
        assert_eq!(reloaded.node_count(), 2);
        let g2 = reloaded.gamma(0.42).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.matrix.get(i, j), g2.matrix.get(i, j));
            }
        }

        // mismatched config is rejected
        let mut other = config;
        other.seed = 9;
        let bad = GammaCache::<f64>::new(other).unwrap();
        assert!(matches!(
            bad.load_table(&table),
            Err(Error::GammaTableMismatch(_))
        ));
    }
}
