//! Array-based reverse mode: in-place accumulation cells and composable
//! tape actions.

use std::sync::Arc;

use super::{CayleyHom, DenseTangent, LinearHom, SparseTangent, Tangent};
use crate::algebra::counter::{bump_deltas, touch_many};
use crate::algebra::{Kronecker, Module, Monoid, Semiring};
use crate::expr::VarId;

/// Zero-initialized per-variable cells for one backward pass. The handle is
/// single-owner and consumed by [`MutAccum::into_sparse`], so a pass cannot
/// observe another pass's accumulations.
#[derive(Debug)]
pub struct MutAccum<D> {
    cells: Vec<D>,
}

impl<D: Monoid> MutAccum<D> {
    pub fn zeroed(arity: usize) -> Self {
        touch_many(arity as u64);
        MutAccum {
            cells: (0..arity).map(|_| D::zero()).collect(),
        }
    }

    /// `cells[v] := f(cells[v])`: one read and one write.
    pub fn modify(&mut self, v: VarId, f: impl FnOnce(&D) -> D) {
        touch_many(2);
        let cell = &mut self.cells[v.idx()];
        *cell = f(cell);
    }

    pub fn cells(&self) -> &[D] {
        &self.cells
    }

    /// Consumes the handle, returning the nonzero cells as a sparse map.
    pub fn into_sparse(self) -> SparseTangent<D>
    where
        D: PartialEq,
    {
        touch_many(self.cells.len() as u64);
        let zero = D::zero();
        let mut entries = Vec::new();
        for (i, d) in self.cells.into_iter().enumerate() {
            if d != zero {
                touch_many(1);
                entries.push((VarId(i as u32), d));
            }
        }
        SparseTangent::from_sorted(entries)
    }
}

type TapeAction<D> = Arc<dyn Fn(&mut MutAccum<D>) + Send + Sync>;

/// A composable backward-pass action over the accumulation cells. Zero is
/// the no-op and addition is sequencing, the tape analogue of the Cayley
/// representation.
pub struct MutTape<D> {
    act: TapeAction<D>,
}

impl<D> Clone for MutTape<D> {
    fn clone(&self) -> Self {
        MutTape {
            act: self.act.clone(),
        }
    }
}

impl<D> std::fmt::Debug for MutTape<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("MutTape(<action>)")
    }
}

impl<D: 'static> MutTape<D> {
    pub fn from_action(act: impl Fn(&mut MutAccum<D>) + Send + Sync + 'static) -> Self {
        MutTape { act: Arc::new(act) }
    }

    pub fn run(&self, acc: &mut MutAccum<D>) {
        (self.act)(acc)
    }
}

impl<D: Send + Sync + 'static> Monoid for MutTape<D> {
    fn zero() -> Self {
        MutTape::from_action(|_| {})
    }

    fn add(&self, rhs: &Self) -> Self {
        let (p, q) = (self.act.clone(), rhs.act.clone());
        MutTape::from_action(move |acc| {
            p(acc);
            q(acc);
        })
    }
}

/// Runs a tape action on fresh zeroed cells and collects the result.
pub fn mut_run<D>(tape: &MutTape<D>, arity: usize) -> SparseTangent<D>
where
    D: Monoid + PartialEq + 'static,
{
    let mut acc = MutAccum::zeroed(arity);
    tape.run(&mut acc);
    acc.into_sparse()
}

/// Array-based reverse-mode fast path: the delta accumulates in place in
/// O(1), one cell read and one write.
impl<D> Kronecker<D> for LinearHom<D, MutTape<D>>
where
    D: Semiring + Send + Sync + 'static,
{
    fn delta(_arity: usize, v: VarId) -> Self {
        bump_deltas(1);
        LinearHom::from_closure(move |d: &D| {
            let d = d.clone();
            MutTape::from_action(move |acc: &mut MutAccum<D>| {
                acc.modify(v, |cell| cell.add(&d));
            })
        })
    }
}

impl<D> Tangent<D> for LinearHom<D, MutTape<D>>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    fn rep(arity: usize, dense: &DenseTangent<D>) -> Self {
        let sparse = SparseTangent::rep(arity, dense);
        LinearHom::from_closure(move |d: &D| {
            let edits: Vec<(VarId, D)> = sparse
                .entries()
                .iter()
                .map(|(v, x)| (*v, x.scale(d)))
                .collect();
            MutTape::from_action(move |acc: &mut MutAccum<D>| {
                for (v, x) in &edits {
                    acc.modify(*v, |cell| cell.add(x));
                }
            })
        })
    }

    fn abs(&self, arity: usize) -> DenseTangent<D> {
        self.gradient_with(arity).abs(arity)
    }

    fn gradient_with(&self, arity: usize) -> SparseTangent<D> {
        mut_run(&self.lower_to_tape(), arity).normalized()
    }
}

impl<D> LinearHom<D, MutTape<D>>
where
    D: Semiring + Send + Sync + 'static,
{
    /// The backward pass entry point: applies the hom at `one`, producing
    /// the full tape action.
    pub fn lower_to_tape(&self) -> MutTape<D> {
        self.apply(&D::one())
    }
}

/// The tape-level Cayley representation coincides with action sequencing,
/// so a `CayleyHom` over sparse maps converts to a tape and back.
pub fn tape_of_edits<D>(edits: &CayleyHom<SparseTangent<D>>) -> MutTape<D>
where
    D: Monoid + Send + Sync + 'static,
{
    let m = edits.lower();
    MutTape::from_action(move |acc: &mut MutAccum<D>| {
        for (v, d) in m.entries() {
            acc.modify(*v, |cell| cell.add(d));
        }
    })
}
