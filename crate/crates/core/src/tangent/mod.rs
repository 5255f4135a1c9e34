//! Tangent representations.
//!
//! A gradient can be carried as a dense per-variable vector, a sparse map,
//! a scalar-accumulating linear map, a composition of map edits, or a
//! mutable tape action. All are modules over the scalar with a Kronecker
//! delta, all are isomorphic to the dense baseline (witnessed by
//! [`Tangent::rep`]/[`Tangent::abs`]), and each successive representation
//! trades structure for cheaper operations during the backward pass.

mod accum;
mod hom;

pub use accum::{mut_run, tape_of_edits, MutAccum, MutTape};
pub use hom::{CayleyHom, LinearHom};

use std::fmt;

use crate::algebra::counter::{bump_deltas, bump_scales, touch, touch_many};
use crate::algebra::{Kronecker, Module, Monoid, Semiring};
use crate::expr::VarId;

/// Tangent of plain reverse mode: a linear map into sparse gradients.
pub type ReverseTangent<D> = LinearHom<D, SparseTangent<D>>;

/// Tangent of Cayley reverse mode: a linear map into compositions of map
/// edits.
pub type ReverseCayleyTangent<D> = LinearHom<D, CayleyHom<SparseTangent<D>>>;

/// Tangent of array-based reverse mode: a linear map into tape actions.
pub type ReverseMutTangent<D> = LinearHom<D, MutTape<D>>;

/// A gradient vector with one component per registered variable.
///
/// The empty vector is the zero element at every arity, so `zero` needs no
/// context; binary operations on two non-empty vectors require equal
/// lengths. Equality treats the empty vector as all-zeros.
#[derive(Debug, Clone)]
pub struct DenseTangent<D> {
    comps: Vec<D>,
}

impl<D> DenseTangent<D> {
    pub fn new(comps: Vec<D>) -> Self {
        DenseTangent { comps }
    }

    pub fn from_fn(arity: usize, f: impl FnMut(VarId) -> D) -> Self {
        let mut f = f;
        DenseTangent {
            comps: (0..arity as u32).map(|i| f(VarId(i))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> &[D] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<D> {
        self.comps
    }
}

impl<D: Monoid> DenseTangent<D> {
    /// The component for `v`; zero when this is the empty zero vector.
    pub fn component(&self, v: VarId) -> D {
        self.comps.get(v.idx()).cloned().unwrap_or_else(D::zero)
    }

    /// Pads the empty zero vector out to `arity` explicit components.
    pub fn padded(&self, arity: usize) -> DenseTangent<D> {
        if self.comps.is_empty() {
            DenseTangent {
                comps: (0..arity).map(|_| D::zero()).collect(),
            }
        } else {
            debug_assert_eq!(self.comps.len(), arity);
            self.clone()
        }
    }
}

impl<D: Monoid> Monoid for DenseTangent<D> {
    fn zero() -> Self {
        DenseTangent { comps: Vec::new() }
    }

    fn add(&self, rhs: &Self) -> Self {
        if self.comps.is_empty() {
            touch_many(2 * rhs.comps.len() as u64);
            return rhs.clone();
        }
        if rhs.comps.is_empty() {
            touch_many(2 * self.comps.len() as u64);
            return self.clone();
        }
        assert_eq!(self.comps.len(), rhs.comps.len(), "arity mismatch");
        touch_many(3 * self.comps.len() as u64);
        DenseTangent {
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
}

impl<D: Semiring> Module<D> for DenseTangent<D> {
    fn scale(&self, d: &D) -> Self {
        bump_scales(1);
        touch_many(2 * self.comps.len() as u64);
        DenseTangent {
            comps: self.comps.iter().map(|c| c.scale(d)).collect(),
        }
    }
}

impl<D: Semiring> Kronecker<D> for DenseTangent<D> {
    fn delta(arity: usize, v: VarId) -> Self {
        bump_deltas(1);
        touch_many(arity as u64);
        DenseTangent {
            comps: (0..arity)
                .map(|i| if i == v.idx() { D::one() } else { D::zero() })
                .collect(),
        }
    }
}

impl<D: Monoid + PartialEq> PartialEq for DenseTangent<D> {
    fn eq(&self, other: &Self) -> bool {
        let n = self.comps.len().max(other.comps.len());
        let zero = D::zero();
        (0..n).all(|i| {
            self.comps.get(i).unwrap_or(&zero) == other.comps.get(i).unwrap_or(&zero)
        })
    }
}

impl<D: fmt::Display> fmt::Display for DenseTangent<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A gradient as an ordered finite map from variables to partials. Absent
/// keys denote zero; addition keeps explicit zeros produced by cancellation
/// and equality treats them as absent (normalization-equality).
#[derive(Debug, Clone)]
pub struct SparseTangent<D> {
    // sorted by VarId
    entries: Vec<(VarId, D)>,
}

impl<D> SparseTangent<D> {
    pub fn empty() -> Self {
        SparseTangent {
            entries: Vec::new(),
        }
    }

    pub fn singleton(v: VarId, d: D) -> Self {
        touch();
        SparseTangent {
            entries: vec![(v, d)],
        }
    }

    /// Builds from pairs, which must have strictly increasing variable ids.
    pub fn from_sorted(entries: Vec<(VarId, D)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        SparseTangent { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(VarId, D)] {
        &self.entries
    }

    pub fn get(&self, v: VarId) -> Option<&D> {
        touch_many(self.probe_cost());
        self.entries
            .binary_search_by_key(&v, |(k, _)| *k)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    fn probe_cost(&self) -> u64 {
        (usize::BITS - self.entries.len().leading_zeros()) as u64 + 1
    }
}

impl<D: Monoid> SparseTangent<D> {
    /// `self[v] := f(self[v])` with absent keys read as zero, the map
    /// counterpart of an in-place accumulate. Costs O(log n) probes.
    pub fn insert_with_add(&mut self, v: VarId, d: D) {
        touch_many(self.probe_cost() + 1);
        match self.entries.binary_search_by_key(&v, |(k, _)| *k) {
            Ok(i) => {
                let old = &self.entries[i].1;
                self.entries[i] = (v, old.add(&d));
            }
            Err(i) => self.entries.insert(i, (v, d)),
        }
    }

    /// Removes and returns the entry for `v`.
    pub fn take(&mut self, v: VarId) -> Option<D> {
        touch_many(self.probe_cost());
        match self.entries.binary_search_by_key(&v, |(k, _)| *k) {
            Ok(i) => Some(self.entries.remove(i).1),
            Err(_) => None,
        }
    }

    /// Removes the entry for `v` (if any) and installs `old` in its place
    /// when given. Restores a saved shadow slot around a `let` body.
    pub fn restore(&mut self, v: VarId, old: Option<D>) {
        touch_many(self.probe_cost());
        let at = self.entries.binary_search_by_key(&v, |(k, _)| *k);
        match (at, old) {
            (Ok(i), Some(d)) => self.entries[i] = (v, d),
            (Ok(i), None) => {
                self.entries.remove(i);
            }
            (Err(i), Some(d)) => self.entries.insert(i, (v, d)),
            (Err(_), None) => {}
        }
    }
}

impl<D: Monoid + PartialEq> SparseTangent<D> {
    /// Drops explicit zero entries.
    pub fn normalized(&self) -> SparseTangent<D> {
        let zero = D::zero();
        SparseTangent {
            entries: self
                .entries
                .iter()
                .filter(|(_, d)| *d != zero)
                .cloned()
                .collect(),
        }
    }
}

impl<D: Monoid> Monoid for SparseTangent<D> {
    fn zero() -> Self {
        SparseTangent::empty()
    }

    /// Union with addition on common keys, by sorted merge.
    fn add(&self, rhs: &Self) -> Self {
        touch_many((self.entries.len() + rhs.entries.len()) as u64);
        let mut out = Vec::with_capacity(self.entries.len() + rhs.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < rhs.entries.len() {
            let (va, a) = &self.entries[i];
            let (vb, b) = &rhs.entries[j];
            match va.cmp(vb) {
                std::cmp::Ordering::Less => {
                    out.push((*va, a.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((*vb, b.clone()));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((*va, a.add(b)));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.entries[i..]);
        out.extend(rhs.entries[j..].iter().cloned());
        touch_many(out.len() as u64);
        SparseTangent { entries: out }
    }
}

impl<D: Semiring> Module<D> for SparseTangent<D> {
    fn scale(&self, d: &D) -> Self {
        bump_scales(1);
        touch_many(2 * self.entries.len() as u64);
        SparseTangent {
            entries: self
                .entries
                .iter()
                .map(|(v, x)| (*v, x.scale(d)))
                .collect(),
        }
    }
}

impl<D: Semiring> Kronecker<D> for SparseTangent<D> {
    fn delta(_arity: usize, v: VarId) -> Self {
        bump_deltas(1);
        SparseTangent::singleton(v, D::one())
    }
}

/// Normalization-equality: explicit zeros compare equal to absent keys.
impl<D: Monoid + PartialEq> PartialEq for SparseTangent<D> {
    fn eq(&self, other: &Self) -> bool {
        let zero = D::zero();
        let mut a = self.entries.iter().filter(|(_, d)| *d != zero);
        let mut b = other.entries.iter().filter(|(_, d)| *d != zero);
        loop {
            match (a.next(), b.next()) {
                (None, None) => return true,
                (Some(x), Some(y)) if x == y => {}
                _ => return false,
            }
        }
    }
}

impl<D: fmt::Display> fmt::Display for SparseTangent<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, d)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}: {d}")?;
        }
        write!(f, "}}")
    }
}

/// Conversions between a tangent representation and the dense baseline,
/// witnessing that the representation computes the same gradients, plus a
/// uniform accessor that normalizes any representation to a sparse map.
pub trait Tangent<D: Semiring + PartialEq>: Kronecker<D> {
    /// Embeds a dense gradient into this representation.
    fn rep(arity: usize, dense: &DenseTangent<D>) -> Self;

    /// Extracts the dense gradient.
    fn abs(&self, arity: usize) -> DenseTangent<D>;

    /// The gradient as a normalized sparse map (zero partials omitted).
    fn gradient_with(&self, arity: usize) -> SparseTangent<D> {
        let dense = self.abs(arity);
        let mut entries = Vec::new();
        let zero = D::zero();
        for (i, c) in dense.components().iter().enumerate() {
            if *c != zero {
                entries.push((VarId(i as u32), c.clone()));
            }
        }
        SparseTangent::from_sorted(entries)
    }
}

impl<D: Semiring + PartialEq> Tangent<D> for DenseTangent<D> {
    fn rep(arity: usize, dense: &DenseTangent<D>) -> Self {
        dense.padded(arity)
    }

    fn abs(&self, arity: usize) -> DenseTangent<D> {
        self.padded(arity)
    }
}

impl<D: Semiring + PartialEq> Tangent<D> for SparseTangent<D> {
    fn rep(_arity: usize, dense: &DenseTangent<D>) -> Self {
        let zero = D::zero();
        SparseTangent::from_sorted(
            dense
                .components()
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != zero)
                .map(|(i, c)| (VarId(i as u32), c.clone()))
                .collect(),
        )
    }

    fn abs(&self, arity: usize) -> DenseTangent<D> {
        DenseTangent::from_fn(arity, |v| {
            self.entries
                .binary_search_by_key(&v, |(k, _)| *k)
                .ok()
                .map(|i| self.entries[i].1.clone())
                .unwrap_or_else(D::zero)
        })
    }

    fn gradient_with(&self, _arity: usize) -> SparseTangent<D> {
        self.normalized()
    }
}
