//! Function-space tangent representations for reverse mode.
//!
//! [`LinearHom`] accumulates a scalar multiplier, turning module scaling
//! into a deferred semiring multiplication; [`CayleyHom`] accumulates map
//! edits, turning module addition into function composition. Both expose
//! only smart constructors (`zero`, `add`, `scale`, `delta`, `rep`), so
//! every value is homogeneous by construction.

use std::sync::Arc;

use super::{DenseTangent, SparseTangent, Tangent};
use crate::algebra::counter::{bump_deltas, bump_scales};
use crate::algebra::{Kronecker, Module, Monoid, Semiring};
use crate::expr::VarId;

/// A multiplicatively homogeneous map `D -> E`: `f(x ⊗ y) = x • f(y)`.
///
/// Scaling composes into the argument (`d' • f = λd. f(d' ⊗ d)`), so the
/// expensive module scaling of `E` is replaced by one deferred semiring
/// multiplication per backward step.
pub struct LinearHom<D, E> {
    f: Arc<dyn Fn(&D) -> E + Send + Sync>,
}

impl<D, E> Clone for LinearHom<D, E> {
    fn clone(&self) -> Self {
        LinearHom { f: self.f.clone() }
    }
}

impl<D, E> std::fmt::Debug for LinearHom<D, E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("LinearHom(<fn>)")
    }
}

impl<D: 'static, E: 'static> LinearHom<D, E> {
    pub(crate) fn from_closure(f: impl Fn(&D) -> E + Send + Sync + 'static) -> Self {
        LinearHom { f: Arc::new(f) }
    }

    /// Applies the map to an accumulated scalar.
    pub fn apply(&self, d: &D) -> E {
        (self.f)(d)
    }
}

impl<D, E> LinearHom<D, E>
where
    D: Semiring + Send + Sync + 'static,
    E: Module<D> + Send + Sync + 'static,
{
    /// `rep e = λd. d • e`. Together with [`LinearHom::lower`] this is the
    /// isomorphism between `E` and the homogeneous maps `D -> E`.
    pub fn promote(e: E) -> Self {
        LinearHom::from_closure(move |d: &D| e.scale(d))
    }

    /// `abs f = f one`; recovers the module element.
    pub fn lower(&self) -> E {
        self.apply(&D::one())
    }
}

impl<D, E> Monoid for LinearHom<D, E>
where
    D: Send + Sync + 'static,
    E: Monoid + Send + Sync + 'static,
{
    fn zero() -> Self {
        LinearHom::from_closure(|_: &D| E::zero())
    }

    fn add(&self, rhs: &Self) -> Self {
        let (f, g) = (self.f.clone(), rhs.f.clone());
        LinearHom::from_closure(move |d: &D| f(d).add(&g(d)))
    }
}

impl<D, E> Module<D> for LinearHom<D, E>
where
    D: Semiring + Send + Sync + 'static,
    E: Monoid + Send + Sync + 'static,
{
    fn scale(&self, d: &D) -> Self {
        bump_scales(1);
        let f = self.f.clone();
        let d = d.clone();
        LinearHom::from_closure(move |x: &D| f(&d.mul(x)))
    }
}

/// Reverse-mode fast path: `delta v = λd. {v: d}` in O(1).
impl<D> Kronecker<D> for LinearHom<D, SparseTangent<D>>
where
    D: Semiring + Send + Sync + 'static,
{
    fn delta(_arity: usize, v: VarId) -> Self {
        bump_deltas(1);
        LinearHom::from_closure(move |d: &D| SparseTangent::singleton(v, d.clone()))
    }
}

impl<D> Tangent<D> for LinearHom<D, SparseTangent<D>>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    fn rep(arity: usize, dense: &DenseTangent<D>) -> Self {
        LinearHom::promote(SparseTangent::rep(arity, dense))
    }

    fn abs(&self, arity: usize) -> DenseTangent<D> {
        self.lower().abs(arity)
    }

    fn gradient_with(&self, _arity: usize) -> SparseTangent<D> {
        self.lower().normalized()
    }
}

/// An additively homogeneous endo-map `E -> E`: `f(x ⊕ y) = x ⊕ f(y)`.
/// Zero is the identity map and addition is composition, so monoid addition
/// costs O(1) until the accumulated edits are finally applied.
pub struct CayleyHom<E> {
    f: Arc<dyn Fn(E) -> E + Send + Sync>,
}

impl<E> Clone for CayleyHom<E> {
    fn clone(&self) -> Self {
        CayleyHom { f: self.f.clone() }
    }
}

impl<E> std::fmt::Debug for CayleyHom<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CayleyHom(<fn>)")
    }
}

impl<E: 'static> CayleyHom<E> {
    pub(crate) fn from_closure(f: impl Fn(E) -> E + Send + Sync + 'static) -> Self {
        CayleyHom { f: Arc::new(f) }
    }

    pub fn apply(&self, e: E) -> E {
        (self.f)(e)
    }
}

impl<E: Monoid + Send + Sync + 'static> CayleyHom<E> {
    /// `rep e = λe'. e' ⊕ e`.
    pub fn promote(e: E) -> Self {
        CayleyHom::from_closure(move |acc: E| acc.add(&e))
    }

    /// `abs f = f zero`.
    pub fn lower(&self) -> E {
        self.apply(E::zero())
    }
}

impl<E: Monoid + Send + Sync + 'static> Monoid for CayleyHom<E> {
    fn zero() -> Self {
        CayleyHom::from_closure(|e: E| e)
    }

    fn add(&self, rhs: &Self) -> Self {
        let (f, g) = (self.f.clone(), rhs.f.clone());
        CayleyHom::from_closure(move |e: E| g(f(e)))
    }
}

/// Derived through the isomorphism; reintroduces an O(V) addition, which is
/// why the reverse modes pair this type with [`LinearHom`] and a
/// specialized delta instead.
impl<D, E> Module<D> for CayleyHom<E>
where
    D: Semiring + Send + Sync + 'static,
    E: Module<D> + Send + Sync + 'static,
{
    fn scale(&self, d: &D) -> Self {
        bump_scales(1);
        CayleyHom::promote(self.lower().scale(d))
    }
}

impl<D, E> Kronecker<D> for CayleyHom<E>
where
    D: Semiring + Send + Sync + 'static,
    E: Kronecker<D> + Send + Sync + 'static,
{
    fn delta(arity: usize, v: VarId) -> Self {
        bump_deltas(1);
        CayleyHom::from_closure(move |e: E| e.add(&E::delta(arity, v)))
    }
}

/// Reverse-mode fast path of the composed representation: the delta for
/// `D ⊸ Cayley(Sparse)` is a map insert-with-add in O(log V), bypassing
/// both expensive derived instances.
impl<D> Kronecker<D> for LinearHom<D, CayleyHom<SparseTangent<D>>>
where
    D: Semiring + Send + Sync + 'static,
{
    fn delta(_arity: usize, v: VarId) -> Self {
        bump_deltas(1);
        LinearHom::from_closure(move |d: &D| {
            let d = d.clone();
            CayleyHom::from_closure(move |mut m: SparseTangent<D>| {
                m.insert_with_add(v, d.clone());
                m
            })
        })
    }
}

impl<D> Tangent<D> for LinearHom<D, CayleyHom<SparseTangent<D>>>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    fn rep(arity: usize, dense: &DenseTangent<D>) -> Self {
        let sparse = SparseTangent::rep(arity, dense);
        LinearHom::from_closure(move |d: &D| CayleyHom::promote(sparse.scale(d)))
    }

    fn abs(&self, arity: usize) -> DenseTangent<D> {
        self.lower().lower().abs(arity)
    }

    fn gradient_with(&self, _arity: usize) -> SparseTangent<D> {
        self.lower().lower().normalized()
    }
}
