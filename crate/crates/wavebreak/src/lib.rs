//! Detection of abrupt changes of the long-range-dependence or self-similarity
//! exponent of a Gaussian time series.
//!
//! The pipeline works on the log-log relation between wavelet-coefficient
//! variance and scale. A series is summarized by piecewise sample variances of
//! discretized wavelet coefficients at a few scales; breakpoints are found by
//! minimizing the total residual sum of squares of per-segment log-log
//! regressions over a candidate grid; each detected segment is then shrunk by a
//! safety margin and its scaling exponent re-estimated by OLS and feasible GLS,
//! with asymptotic confidence intervals and a chi-square goodness-of-fit
//! statistic. Exact synthetic generators (fractional Gaussian noise, FARIMA,
//! fractional Brownian motion and piecewise mixtures) support Monte Carlo
//! experiments.
//!
//! All numeric code is generic over the scalar type through [`Real`]
//! (`f32`/`f64`); concrete `f64` aliases are exported at the crate root.

#![forbid(unsafe_code)]

pub mod error;
pub mod gamma;
pub mod inference;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod segmentation;
pub mod special;
pub mod synth;
pub mod wavelets;
pub mod wvar;

pub use error::{Error, Result, Warning, WarningCode};
pub use scalar::{real, Real};
pub use wvar::Regime;

pub type TimeSeries64 = synth::TimeSeries<f64>;
pub type StationarySpec64 = synth::StationarySpec<f64>;
pub type PiecewiseSpec64 = synth::PiecewiseSpec<f64>;
pub type WaveletSpec64 = wavelets::WaveletSpec<f64>;
pub type ScaleGrid64 = wvar::ScaleGrid<f64>;
pub type CoefficientCache64 = wvar::CoefficientCache<f64>;
pub type RegressionDesign64 = segmentation::RegressionDesign<f64>;
pub type SearchSpace64 = segmentation::SearchSpace;
pub type ChangePointResult64 = segmentation::ChangePointResult<f64>;
pub type RefinedSegments64 = inference::RefinedSegments<f64>;
pub type SegmentEstimate64 = inference::SegmentEstimate<f64>;
pub type GammaMatrix64 = gamma::GammaMatrix<f64>;
pub type GammaCache64 = gamma::GammaCache<f64>;
