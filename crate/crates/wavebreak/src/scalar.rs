//! Scalar abstraction: the whole crate is generic over `f32`/`f64`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::NumAssign
    + num_traits::FromPrimitive
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + rustfft::FftNum
    + serde::Serialize
    + serde::de::DeserializeOwned
{
    /// One standard-normal draw from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn to_f64_lossy(self) -> f64 {
        f64::from(self)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Converts an `f64` literal into `T`. Panics only on non-finite input, which
/// would be a programming error at the call site.
#[inline]
pub fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("finite f64 literal")
}
