//! Operation counting for complexity measurement.
//!
//! A profiling run installs a thread-local counter with [`scoped_counter`]
//! and evaluates with [`Counted`] scalars. Semiring operations on counted
//! values bump `adds`/`muls`; tangent representations bump `scales`, `deltas`
//! and `touches` (map/array slot reads and writes) themselves. Outside a
//! scoped run all bumps are no-ops, so instrumentation never changes a
//! computed value.

use std::cell::Cell;

use super::{Monoid, Semiring, UnsupportedPrimitive};

/// Snapshot of the per-run operation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Scalar semiring additions.
    pub adds: u64,
    /// Scalar semiring multiplications.
    pub muls: u64,
    /// Module-level scalar multiplications (`•`) on tangent representations.
    pub scales: u64,
    /// Kronecker `delta` constructions.
    pub deltas: u64,
    /// Map/array slot reads and writes.
    pub touches: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.adds + self.muls + self.scales + self.deltas + self.touches
    }
}

thread_local! {
    static ACTIVE: Cell<bool> = const { Cell::new(false) };
    static ADDS: Cell<u64> = const { Cell::new(0) };
    static MULS: Cell<u64> = const { Cell::new(0) };
    static SCALES: Cell<u64> = const { Cell::new(0) };
    static DELTAS: Cell<u64> = const { Cell::new(0) };
    static TOUCHES: Cell<u64> = const { Cell::new(0) };
}

fn bump(cell: &'static std::thread::LocalKey<Cell<u64>>, n: u64) {
    if ACTIVE.with(|a| a.get()) {
        cell.with(|c| c.set(c.get() + n));
    }
}

pub(crate) fn bump_adds(n: u64) {
    bump(&ADDS, n);
}

pub(crate) fn bump_muls(n: u64) {
    bump(&MULS, n);
}

pub(crate) fn bump_scales(n: u64) {
    bump(&SCALES, n);
}

pub(crate) fn bump_deltas(n: u64) {
    bump(&DELTAS, n);
}

/// Record one map/array slot read or write.
pub fn touch() {
    bump(&TOUCHES, 1);
}

/// Record `n` map/array slot reads or writes.
pub fn touch_many(n: u64) {
    bump(&TOUCHES, n);
}

/// Run `f` with a fresh thread-local counter installed and return its result
/// together with the counts it accumulated.
///
/// Runs are single-threaded; concurrent profiles on different threads use
/// distinct counters by construction. Nested scopes are not supported and
/// will panic.
pub fn scoped_counter<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    ACTIVE.with(|a| {
        assert!(!a.get(), "scoped_counter does not nest");
        a.set(true);
    });
    ADDS.with(|c| c.set(0));
    MULS.with(|c| c.set(0));
    SCALES.with(|c| c.set(0));
    DELTAS.with(|c| c.set(0));
    TOUCHES.with(|c| c.set(0));
    let out = f();
    let counts = OpCounts {
        adds: ADDS.with(|c| c.get()),
        muls: MULS.with(|c| c.get()),
        scales: SCALES.with(|c| c.get()),
        deltas: DELTAS.with(|c| c.get()),
        touches: TOUCHES.with(|c| c.get()),
    };
    ACTIVE.with(|a| a.set(false));
    (out, counts)
}

/// A scalar wrapper whose semiring operations delegate to the inner value
/// and bump the installed counter. Value-transparent: unwrapping always
/// yields the same result as the uncounted computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counted<S>(pub S);

impl<S> Counted<S> {
    pub fn into_inner(self) -> S {
        self.0
    }
}

impl<S: Monoid> Monoid for Counted<S> {
    fn zero() -> Self {
        Counted(S::zero())
    }

    fn add(&self, rhs: &Self) -> Self {
        bump_adds(1);
        Counted(self.0.add(&rhs.0))
    }
}

impl<S: Semiring> Semiring for Counted<S> {
    fn one() -> Self {
        Counted(S::one())
    }

    fn mul(&self, rhs: &Self) -> Self {
        bump_muls(1);
        Counted(self.0.mul(&rhs.0))
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        self.0.neg().map(Counted)
    }

    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        self.0.sin().map(Counted)
    }

    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        self.0.cos().map(Counted)
    }
}
