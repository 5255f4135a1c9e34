//! Generalized dual numbers: a primal paired with a tangent drawn from a
//! module over the primal's semiring.

use std::fmt;

use crate::algebra::{Module, Monoid, Semiring, UnsupportedPrimitive};

/// A primal/tangent pair. Whenever `E` is a `D`-module, `Nagata<D, E>` is
/// itself a semiring: the tangent component of each operation is the
/// corresponding differentiation rule, so evaluating an expression at
/// Nagata numbers differentiates it.
#[derive(Debug, Clone, PartialEq)]
pub struct Nagata<D, E> {
    pub primal: D,
    pub tangent: E,
}

/// Classic dual numbers: primal and tangent share one scalar type, using
/// the semiring-as-module-over-itself structure.
pub type Dual<D> = Nagata<D, D>;

impl<D, E> Nagata<D, E> {
    pub fn new(primal: D, tangent: E) -> Self {
        Nagata { primal, tangent }
    }
}

impl<D: Semiring, E: Module<D>> Monoid for Nagata<D, E> {
    fn zero() -> Self {
        Nagata::new(D::zero(), E::zero())
    }

    fn add(&self, rhs: &Self) -> Self {
        Nagata::new(
            self.primal.add(&rhs.primal),
            self.tangent.add(&rhs.tangent),
        )
    }
}

impl<D: Semiring, E: Module<D>> Semiring for Nagata<D, E> {
    fn one() -> Self {
        Nagata::new(D::one(), E::zero())
    }

    /// Product rule: `(f, df) ⊗ (g, dg) = (f ⊗ g, f•dg ⊕ g•df)`.
    fn mul(&self, rhs: &Self) -> Self {
        Nagata::new(
            self.primal.mul(&rhs.primal),
            rhs.tangent
                .scale(&self.primal)
                .add(&self.tangent.scale(&rhs.primal)),
        )
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        let minus_one = D::one().neg()?;
        Ok(Nagata::new(
            self.primal.neg()?,
            self.tangent.scale(&minus_one),
        ))
    }

    /// Chain rule: `sin (f, df) = (sin f, cos f • df)`.
    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(Nagata::new(
            self.primal.sin()?,
            self.tangent.scale(&self.primal.cos()?),
        ))
    }

    /// Chain rule: `cos (f, df) = (cos f, -sin f • df)`.
    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(Nagata::new(
            self.primal.cos()?,
            self.tangent.scale(&self.primal.sin()?.neg()?),
        ))
    }
}

impl<D: fmt::Display, E: fmt::Display> fmt::Display for Nagata<D, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N {} {}", self.primal, self.tangent)
    }
}
