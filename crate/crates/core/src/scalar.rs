//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

/// Floating point scalar used by the estimators and generators: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + rustfft::FftNum
    + Send
    + Sync
    + 'static
{
    /// Draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw from U[0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossless-enough conversion from `f64` literals and external values.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("real converts to f64")
    }
}

macro_rules! impl_real {
    ($($t:ty),*) => {
        $(
            impl Real for $t {
                #[inline]
                fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                    <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
                }

                #[inline]
                fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                    <StandardUniform as Distribution<$t>>::sample(&StandardUniform, rng)
                }
            }
        )*
    };
}

impl_real!(f32, f64);
