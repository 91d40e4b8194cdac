//! Mother wavelets restricted to [0, 1], with verified vanishing moments.
//!
//! Wavelets are provided as closed-form functions, not filter banks: the
//! coefficient computation downstream is a direct weighted sum over samples.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::wvar::Regime;
use std::fmt;
use std::sync::Arc;

/// The default mother wavelet: `t(1-t)((t-1/2)^2 - 1/20)` on [0, 1], zero
/// outside. The constant -1/20 is forced by requiring the first two moments
/// to vanish; the boundary values are zero, so the wavelet is admissible in
/// both the long-memory and the self-similar regime.
pub fn psi_poly4<T: Real>(t: T) -> T {
    if t < T::zero() || t > T::one() {
        return T::zero();
    }
    let half = real::<T>(0.5);
    let c = real::<T>(0.05);
    let u = t - half;
    t * (T::one() - t) * (u * u - c)
}

/// A named mother wavelet with support in [0, 1].
#[derive(Clone)]
pub struct WaveletSpec<T> {
    pub name: String,
    eval: Arc<dyn Fn(T) -> T + Send + Sync>,
    /// Highest `p` with vanishing moment: ∫ t^q ψ = 0 for q = 0..=p.
    pub vanishing_moments: u32,
    pub lrd_valid: bool,
    pub fbm_valid: bool,
}

impl<T> fmt::Debug for WaveletSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveletSpec")
            .field("name", &self.name)
            .field("vanishing_moments", &self.vanishing_moments)
            .field("lrd_valid", &self.lrd_valid)
            .field("fbm_valid", &self.fbm_valid)
            .finish()
    }
}

impl<T: Real> WaveletSpec<T> {
    pub fn poly4() -> Self {
        Self {
            name: "poly4".to_string(),
            eval: Arc::new(psi_poly4),
            vanishing_moments: 1,
            lrd_valid: true,
            fbm_valid: true,
        }
    }

    /// Custom wavelet; the caller is responsible for the declared properties
    /// (check them with [`check_moments`]).
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(T) -> T + Send + Sync + 'static,
        vanishing_moments: u32,
        lrd_valid: bool,
        fbm_valid: bool,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            vanishing_moments,
            lrd_valid,
            fbm_valid,
        }
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        if t < T::zero() || t > T::one() {
            T::zero()
        } else {
            (self.eval)(t)
        }
    }

    pub fn supports(&self, regime: Regime) -> bool {
        match regime {
            Regime::Lrd => self.lrd_valid,
            Regime::Fbm => self.fbm_valid,
        }
    }
}

/// Looks a wavelet up by its configuration name.
pub fn wavelet_by_name<T: Real>(name: &str) -> Result<WaveletSpec<T>> {
    match name {
        "poly4" => Ok(WaveletSpec::poly4()),
        _ => Err(Error::InvalidSpec(format!("unknown wavelet `{name}`"))),
    }
}

/// Moments ∫₀¹ tᵖ ψ(t) dt for p = 0..=p_max, with the indices of those that
/// exceed `tol` in absolute value.
#[derive(Debug, Clone)]
pub struct MomentReport<T> {
    pub moments: Vec<T>,
    pub violations: Vec<usize>,
}

/// Computes wavelet moments by composite Gauss-Legendre quadrature and flags
/// violations beyond `tol`. Report only; never fails.
pub fn check_moments<T: Real>(w: &WaveletSpec<T>, p_max: u32, tol: T) -> MomentReport<T> {
    let moments: Vec<T> = (0..=p_max)
        .map(|p| integrate_unit_interval(|t: T| t.powi(p as i32) * w.eval(t)))
        .collect();
    let violations = moments
        .iter()
        .enumerate()
        .filter(|(_, m)| m.abs() > tol)
        .map(|(p, _)| p)
        .collect();
    MomentReport {
        moments,
        violations,
    }
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

const QUAD_PANELS: usize = 32;

/// Composite 16-point Gauss-Legendre quadrature of `f` over [0, 1].
pub fn integrate_unit_interval<T: Real, F: Fn(T) -> T>(f: F) -> T {
    let panels = QUAD_PANELS;
    let h = real::<T>(1.0 / panels as f64);
    let half = real::<T>(0.5);
    let mut total = T::zero();
    for p in 0..panels {
        let mid = (real::<T>(p as f64) + half) * h;
        let scale = h * half;
        let mut acc = T::zero();
        for (x, wgt) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            let dx = real::<T>(*x) * scale;
            acc += real::<T>(*wgt) * (f(mid + dx) + f(mid - dx));
        }
        total += acc * scale;
    }
    total
}

/// Composite 16-point Gauss-Legendre points on [0, 1]: appends the nodes and
/// the matching weights (already scaled by the panel width) to the outputs.
pub(crate) fn gl16_composite_points<T: Real>(
    panels: usize,
    nodes: &mut Vec<T>,
    weights: &mut Vec<T>,
) {
    let h = real::<T>(1.0 / panels as f64);
    let half = real::<T>(0.5);
    for p in 0..panels {
        let mid = (real::<T>(p as f64) + half) * h;
        let scale = h * half;
        for (x, wgt) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            let dx = real::<T>(*x) * scale;
            nodes.push(mid - dx);
            weights.push(real::<T>(*wgt) * scale);
            nodes.push(mid + dx);
            weights.push(real::<T>(*wgt) * scale);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly4_boundary_and_midpoint() {
        assert_eq!(psi_poly4(0.0f64), 0.0);
        assert_eq!(psi_poly4(1.0f64), 0.0);
        assert_eq!(psi_poly4(-0.5f64), 0.0);
        assert_eq!(psi_poly4(1.5f64), 0.0);
        // 0.25 * (0 - 1/20)
        assert!((psi_poly4(0.5f64) + 0.0125).abs() < 1e-15);
    }

    #[test]
    fn poly4_first_two_moments_vanish() {
        let w = WaveletSpec::<f64>::poly4();
        let report = check_moments(&w, 1, 1e-10);
        assert!(report.violations.is_empty(), "{:?}", report.moments);
        assert!(report.moments[0].abs() < 1e-12);
        assert!(report.moments[1].abs() < 1e-12);
    }

    #[test]
    fn poly4_second_moment_matches_closed_form() {
        // ∫ t² ψ = 1/2100 by expanding the polynomial.
        let w = WaveletSpec::<f64>::poly4();
        let report = check_moments(&w, 2, 1e-10);
        assert_eq!(report.violations, vec![2]);
        assert!((report.moments[2] - 1.0 / 2100.0).abs() < 1e-14);
    }

    #[test]
    fn constant_function_moment_is_one() {
        let w = WaveletSpec::custom("const", |_t: f64| 1.0, 0, false, false);
        let report = check_moments(&w, 0, 1e-10);
        assert!((report.moments[0] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn registry_knows_poly4_only() {
        assert!(wavelet_by_name::<f64>("poly4").is_ok());
        assert!(wavelet_by_name::<f64>("haar").is_err());
    }

    #[test]
    fn riemann_sum_moments_converge_at_rate_one_over_a() {
        let w = WaveletSpec::<f64>::poly4();
        for p in 0..=1u32 {
            let exact = integrate_unit_interval(|t: f64| t.powi(p as i32) * w.eval(t));
            let mut prev_err = f64::INFINITY;
            for a in [32usize, 64, 128] {
                let riemann: f64 = (0..a)
                    .map(|k| {
                        let t = k as f64 / a as f64;
                        t.powi(p as i32) * w.eval(t)
                    })
                    .sum::<f64>()
                    / a as f64;
                let err = (riemann - exact).abs();
                assert!(err <= 0.5 / a as f64, "p={p} a={a} err={err}");
                assert!(err < prev_err, "p={p} a={a}: error not decreasing");
                prev_err = err;
            }
        }
    }

    #[test]
    fn moments_work_in_f32() {
        let w = WaveletSpec::<f32>::poly4();
        let report = check_moments(&w, 1, 1e-5);
        assert!(report.violations.is_empty());
    }
}
