//! Algebraic capability signatures: commutative monoids, semirings, modules
//! over a semiring, and the Kronecker delta.
//!
//! Every differentiation mode in this crate is generic over these traits.
//! Scalars (`i64`, `f64`, [`Rational`], [`Counted`], symbolic expressions)
//! implement [`Semiring`]; tangent representations implement [`Module`] and
//! [`Kronecker`].

pub(crate) mod counter;
mod laws;
mod rational;
mod scalars;

pub use counter::{scoped_counter, touch, touch_many, Counted, OpCounts};
pub use laws::{check_module_laws, check_semiring_laws, LawCheck, LawReport};
pub use rational::Rational;

use std::fmt;

use crate::expr::VarId;

/// Error raised when an expression uses a primitive operation (negation,
/// trigonometry) that the scalar it is being evaluated at does not support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsupportedPrimitive {
    pub op: &'static str,
    pub scalar: &'static str,
}

impl UnsupportedPrimitive {
    pub fn new<S>(op: &'static str) -> Self {
        UnsupportedPrimitive {
            op,
            scalar: std::any::type_name::<S>(),
        }
    }
}

impl fmt::Display for UnsupportedPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scalar `{}` does not support `{}`", self.scalar, self.op)
    }
}

impl std::error::Error for UnsupportedPrimitive {}

/// A commutative monoid: an associative, commutative [`Monoid::add`] with
/// neutral element [`Monoid::zero`].
pub trait Monoid: Clone {
    fn zero() -> Self;
    fn add(&self, rhs: &Self) -> Self;
}

/// A commutative semiring. Addition comes from the [`Monoid`] supertrait;
/// multiplication is associative and commutative with neutral element
/// [`Semiring::one`], distributes over addition, and is annihilated by zero.
///
/// Negation and trigonometric primitives are optional capabilities: the
/// default implementations report [`UnsupportedPrimitive`], and scalars that
/// possess them (rings, floats, symbolic expressions) override them. This
/// lets the evaluator work over any scalar chosen at runtime and surface a
/// capability error exactly when an expression demands a missing primitive.
pub trait Semiring: Monoid {
    fn one() -> Self;
    fn mul(&self, rhs: &Self) -> Self;

    /// Additive inverse, for scalars that form a ring.
    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        Err(UnsupportedPrimitive::new::<Self>("neg"))
    }

    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        Err(UnsupportedPrimitive::new::<Self>("sin"))
    }

    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        Err(UnsupportedPrimitive::new::<Self>("cos"))
    }
}

/// A `D`-module: a commutative monoid together with scalar multiplication by
/// semiring elements. `d.scale` distributes over the monoid addition and
/// respects the semiring structure of `D`:
///
/// ```text
/// d • zero = zero            zero • e = zero
/// d • (e ⊕ e') = d•e ⊕ d•e'  (d ⊕ d') • e = d•e ⊕ d'•e
/// one • e = e                (d ⊗ d') • e = d • (d' • e)
/// ```
pub trait Module<D: Semiring>: Monoid {
    /// Scalar multiplication `d • self`.
    fn scale(&self, d: &D) -> Self;
}

/// Every semiring is a module over itself with `• = ⊗`.
impl<D: Semiring> Module<D> for D {
    fn scale(&self, d: &D) -> Self {
        d.mul(self)
    }
}

/// A `D`-module with per-variable unit tangents. `delta(v)` is the basis
/// element for `v`: one at `v` and zero everywhere else, for all variables
/// at once.
///
/// `arity` is the number of registered variables; representations that store
/// a component per variable (the dense vector, the mutable accumulator) need
/// it, the others ignore it.
pub trait Kronecker<D: Semiring>: Module<D> {
    fn delta(arity: usize, v: VarId) -> Self;
}
