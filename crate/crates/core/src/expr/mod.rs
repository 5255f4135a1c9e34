//! The free-semiring expression AST with negation, trigonometric and
//! let-binding extensions, plus its parser, pretty printer and variable
//! registry.

mod parse;
mod pretty;
mod probe;

pub use parse::{parse, parse_with_registry, ParseError, RegistryMode};
pub use pretty::pretty;
pub use probe::probe_equal;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::algebra::{Monoid, Semiring, UnsupportedPrimitive};

/// Index of a registered variable, dense in `[0, V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Maps variable names to dense indices. Indices are assigned in
/// registration order and the arity is fixed once evaluation structures
/// (valuations, tangents) are built from it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarRegistry {
    names: Vec<String>,
}

impl VarRegistry {
    pub fn new() -> Self {
        VarRegistry::default()
    }

    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut reg = VarRegistry::new();
        for n in names {
            reg.register(&n.into());
        }
        reg
    }

    /// Returns the id for `name`, registering it first if new.
    pub fn register(&mut self, name: &str) -> VarId {
        if let Some(v) = self.lookup(name) {
            return v;
        }
        self.names.push(name.to_string());
        VarId((self.names.len() - 1) as u32)
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| VarId(i as u32))
    }

    pub fn name_of(&self, v: VarId) -> &str {
        &self.names[v.idx()]
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len() as u32).map(VarId)
    }
}

/// A total assignment of scalars to the registered variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Valuation<D> {
    values: Vec<D>,
}

impl<D> Valuation<D> {
    pub fn new(values: Vec<D>) -> Self {
        Valuation { values }
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, v: VarId) -> &D {
        &self.values[v.idx()]
    }
}

impl<D: Clone> Valuation<D> {
    /// Builds a valuation with `value` for every variable.
    pub fn constant(arity: usize, value: D) -> Self {
        Valuation {
            values: vec![value; arity],
        }
    }

    /// Builds a valuation from explicit bindings, with `fill` for every
    /// unbound slot (let-only binders never read their slot).
    pub fn from_bindings(
        registry: &VarRegistry,
        fill: D,
        bindings: impl IntoIterator<Item = (VarId, D)>,
    ) -> Self {
        let mut values = vec![fill; registry.arity()];
        for (v, d) in bindings {
            values[v.idx()] = d;
        }
        Valuation { values }
    }
}

/// Free-semiring expressions over registered variables, extended with
/// negation, sine/cosine and let-bindings. Trees are immutable and share
/// subterms through `Arc`, so clones are cheap and derivatives can reuse
/// their inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(VarId),
    Zero,
    One,
    Plus(Arc<Expr>, Arc<Expr>),
    Times(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Let(VarId, Arc<Expr>, Arc<Expr>),
}

fn shared_zero() -> Arc<Expr> {
    static ZERO: OnceLock<Arc<Expr>> = OnceLock::new();
    ZERO.get_or_init(|| Arc::new(Expr::Zero)).clone()
}

impl Expr {
    pub fn var(v: VarId) -> Arc<Expr> {
        Arc::new(Expr::Var(v))
    }

    pub fn plus(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Plus(a, b))
    }

    pub fn times(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Times(a, b))
    }

    /// Number of AST nodes, visiting shared subterms once per occurrence.
    pub fn node_count(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            n += 1;
            match e {
                Expr::Var(_) | Expr::Zero | Expr::One => {}
                Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) => stack.push(a),
                Expr::Plus(a, b) | Expr::Times(a, b) | Expr::Let(_, a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        n
    }

    fn take_children(&mut self, out: &mut Vec<Arc<Expr>>) {
        match self {
            Expr::Var(_) | Expr::Zero | Expr::One => {}
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) => {
                out.push(std::mem::replace(a, shared_zero()));
            }
            Expr::Plus(a, b) | Expr::Times(a, b) | Expr::Let(_, a, b) => {
                out.push(std::mem::replace(a, shared_zero()));
                out.push(std::mem::replace(b, shared_zero()));
            }
        }
    }
}

/// Benchmark expressions nest tens of thousands of levels deep; the default
/// recursive drop would overflow the stack, so detach children iteratively.
impl Drop for Expr {
    fn drop(&mut self) {
        let mut stack = Vec::new();
        self.take_children(&mut stack);
        while let Some(node) = stack.pop() {
            if let Some(mut owned) = Arc::into_inner(node) {
                owned.take_children(&mut stack);
            }
        }
    }
}

/// The free semiring instance: operations build AST nodes.
impl Monoid for Expr {
    fn zero() -> Self {
        Expr::Zero
    }

    fn add(&self, rhs: &Self) -> Self {
        Expr::Plus(Arc::new(self.clone()), Arc::new(rhs.clone()))
    }
}

impl Semiring for Expr {
    fn one() -> Self {
        Expr::One
    }

    fn mul(&self, rhs: &Self) -> Self {
        Expr::Times(Arc::new(self.clone()), Arc::new(rhs.clone()))
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(Expr::Neg(Arc::new(self.clone())))
    }

    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(Expr::Sin(Arc::new(self.clone())))
    }

    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(Expr::Cos(Arc::new(self.clone())))
    }
}

/// Builds an expression evaluating to `n · one` in every semiring by
/// double-and-add over the binary digits of `n`; node count is O(log n).
pub fn const_lit(n: u64) -> Arc<Expr> {
    match n {
        0 => Arc::new(Expr::Zero),
        1 => Arc::new(Expr::One),
        2 => Expr::plus(Arc::new(Expr::One), Arc::new(Expr::One)),
        _ => {
            let half = const_lit(n / 2);
            let doubled = Expr::times(const_lit(2), half);
            if n % 2 == 1 {
                Expr::plus(doubled, Arc::new(Expr::One))
            } else {
                doubled
            }
        }
    }
}

/// Binding-aware free variables: `Let(y, e1, e2)` contributes
/// `free(e1) ∪ (free(e2) \ {y})`.
pub fn free_vars(e: &Expr) -> BTreeSet<VarId> {
    fn go(e: &Expr, bound: &mut Vec<VarId>, out: &mut BTreeSet<VarId>) {
        match e {
            Expr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(*v);
                }
            }
            Expr::Zero | Expr::One => {}
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) => go(a, bound, out),
            Expr::Plus(a, b) | Expr::Times(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Expr::Let(y, e1, e2) => {
                go(e1, bound, out);
                bound.push(*y);
                go(e2, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(e, &mut Vec::new(), &mut out);
    out
}

/// Applies the semiring identity and annihilator rewrites bottom-up once:
/// `e ⊕ 0 → e`, `e ⊗ 1 → e`, `e ⊗ 0 → 0` and their mirror images. The
/// result is probe-equal to the input and never larger.
pub fn simplify_basic(e: &Expr) -> Arc<Expr> {
    fn rebuild1(e: &Arc<Expr>, make: impl Fn(Arc<Expr>) -> Expr) -> Arc<Expr> {
        Arc::new(make(simplify_basic(e)))
    }
    match e {
        Expr::Var(_) | Expr::Zero | Expr::One => Arc::new(e.clone()),
        Expr::Neg(a) => rebuild1(a, Expr::Neg),
        Expr::Sin(a) => rebuild1(a, Expr::Sin),
        Expr::Cos(a) => rebuild1(a, Expr::Cos),
        Expr::Let(y, e1, e2) => Arc::new(Expr::Let(*y, simplify_basic(e1), simplify_basic(e2))),
        Expr::Plus(a, b) => {
            let (a, b) = (simplify_basic(a), simplify_basic(b));
            match (&*a, &*b) {
                (Expr::Zero, _) => b,
                (_, Expr::Zero) => a,
                _ => Expr::plus(a, b),
            }
        }
        Expr::Times(a, b) => {
            let (a, b) = (simplify_basic(a), simplify_basic(b));
            match (&*a, &*b) {
                (Expr::Zero, _) | (_, Expr::Zero) => Arc::new(Expr::Zero),
                (Expr::One, _) => b,
                (_, Expr::One) => a,
                _ => Expr::times(a, b),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval;

    fn xy() -> (VarRegistry, VarId, VarId) {
        let mut reg = VarRegistry::new();
        let x = reg.register("x");
        let y = reg.register("y");
        (reg, x, y)
    }

    #[test]
    fn registry_roundtrip() {
        let (reg, x, y) = xy();
        assert_eq!(reg.lookup("x"), Some(x));
        assert_eq!(reg.lookup("y"), Some(y));
        assert_eq!(reg.name_of(x), "x");
        assert_eq!(reg.arity(), 2);
        assert_eq!(reg.lookup("z"), None);
    }

    #[test]
    fn const_lit_small_cases() {
        assert_eq!(*const_lit(0), Expr::Zero);
        assert_eq!(*const_lit(1), Expr::One);
        assert_eq!(
            *const_lit(2),
            Expr::Plus(Arc::new(Expr::One), Arc::new(Expr::One))
        );
    }

    #[test]
    fn const_lit_evaluates_to_n() {
        // sampled n over the documented range, checked against the integer
        // semiring
        for n in (0..1_000_000u64).step_by(7919) {
            let e = const_lit(n);
            let got: i64 = eval(|_| unreachable!(), &e).unwrap();
            assert_eq!(got, n as i64, "const_lit({n})");
        }
    }

    #[test]
    fn const_lit_is_logarithmic() {
        for n in [5u64, 100, 65535, 999_983] {
            let nodes = const_lit(n).node_count();
            assert!(
                nodes <= 6 * (64 - n.leading_zeros()) as usize,
                "const_lit({n}) has {nodes} nodes"
            );
        }
    }

    #[test]
    fn free_vars_cases() {
        let (_, x, y) = xy();
        let example1 = Expr::times(Expr::var(x), Expr::plus(Expr::var(x), Arc::new(Expr::One)));
        assert_eq!(free_vars(&example1), BTreeSet::from([x]));

        let shared = Expr::plus(Expr::var(x), Expr::var(x));
        let body = Expr::times(Expr::var(y), Expr::var(y));
        let letexpr = Expr::Let(y, shared.clone(), body);
        assert_eq!(free_vars(&letexpr), BTreeSet::from([x]));

        let mut reg = VarRegistry::from_names(["x", "y", "z"]);
        let z = reg.register("z");
        let body2 = Expr::times(Expr::var(y), Expr::var(z));
        let letexpr2 = Expr::Let(y, shared, body2);
        assert_eq!(free_vars(&letexpr2), BTreeSet::from([x, z]));
    }

    #[test]
    fn simplify_identity_rules() {
        let (_, x, _) = xy();
        let e = Expr::Plus(Arc::new(Expr::Zero), Expr::var(x));
        assert_eq!(*simplify_basic(&e), Expr::Var(x));

        let e = Expr::Times(Expr::var(x), Arc::new(Expr::Zero));
        assert_eq!(*simplify_basic(&e), Expr::Zero);

        let e = Expr::Times(Expr::var(x), Arc::new(Expr::One));
        assert_eq!(*simplify_basic(&e), Expr::Var(x));
    }

    #[test]
    fn deep_tree_drops_without_overflow() {
        let (_, x, _) = xy();
        let mut e = Expr::var(x);
        for _ in 0..200_000 {
            e = Expr::plus(e, Expr::var(x));
        }
        drop(e);
    }
}
