//! The arithmetic the chart evaluation is generic over.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// A commutative ring element with a partial inverse.
///
/// Constants are produced from an existing value so that fields with a
/// runtime modulus need no global state.
pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// The integer `n` in the same field as `self`.
    fn constant(&self, n: i64) -> Self;

    /// Multiplicative inverse, or `None` for zero (or a zero real part for
    /// duals).
    fn inv(&self) -> Option<Self>;

    fn is_zero(&self) -> bool;

    fn zero_like(&self) -> Self {
        self.constant(0)
    }

    fn one_like(&self) -> Self {
        self.constant(1)
    }

    fn div(&self, other: &Self) -> Option<Self> {
        Some(self.clone() * other.inv()?)
    }
}

impl Scalar for Complex64 {
    fn constant(&self, n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn inv(&self) -> Option<Self> {
        (self.norm_sqr() > 0.0).then(|| Complex64::new(1.0, 0.0) / self)
    }

    fn is_zero(&self) -> bool {
        self.norm_sqr() == 0.0
    }
}

impl Scalar for f64 {
    fn constant(&self, n: i64) -> Self {
        n as f64
    }

    fn inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}
