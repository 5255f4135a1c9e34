//! Semiring instances for the built-in numeric scalars.

use super::{Monoid, Semiring, UnsupportedPrimitive};

/// Integers with two's-complement wrapping arithmetic. Wrapping keeps every
/// semiring law exact (arithmetic modulo 2^64) and makes law tests and deep
/// benchmark expressions immune to overflow panics.
impl Monoid for i64 {
    fn zero() -> Self {
        0
    }

    fn add(&self, rhs: &Self) -> Self {
        self.wrapping_add(*rhs)
    }
}

impl Semiring for i64 {
    fn one() -> Self {
        1
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.wrapping_mul(*rhs)
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(self.wrapping_neg())
    }
}

/// Floats satisfy the semiring laws only approximately; the exact law suites
/// use integers and rationals, and a separate approximate suite covers f64.
impl Monoid for f64 {
    fn zero() -> Self {
        0.0
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
}

impl Semiring for f64 {
    fn one() -> Self {
        1.0
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(-self)
    }

    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(f64::sin(*self))
    }

    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(f64::cos(*self))
    }
}
