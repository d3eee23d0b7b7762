//! Floating-point abstraction for the numerical kernels.
//!
//! Everything math-heavy (cavity formulas, Bloch integration, stochastic
//! steps, least-squares fitting) is generic over [`Scalar`] so the same code
//! runs at `f32` or `f64`. The concrete aliases at the crate root pin `f64`
//! for the simulation pipeline.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Floating-point scalar: `f32` or `f64`.
///
/// Bundles the num-traits surface the kernels need plus the elementary
/// random draws, so downstream code does not carry `Distribution` bounds.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::iter::Sum
    + Default
    + Send
    + Sync
    + 'static
{
    /// Draw from the standard normal distribution N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Draw from the unit-rate exponential distribution.
    fn standard_exp<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Draw uniformly from [0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Lossy conversion from `f64` (rounds at `f32`).
    fn from_f64(x: f64) -> Self;
    /// Widening conversion to `f64`.
    fn into_f64(self) -> f64;
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn standard_exp<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Exp1.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn into_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn standard_exp<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Exp1.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn into_f64(self) -> f64 {
        self as f64
    }
}
