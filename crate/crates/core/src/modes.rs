//! Differentiation modes.
//!
//! [`abstract_d`] is the whole algorithm: evaluate the expression at Nagata
//! numbers whose tangents are seeded with Kronecker deltas. Each concrete
//! mode below is that one definition at a particular tangent type; they
//! differ only in how the tangent representation schedules its work.

use std::sync::Arc;

use crate::algebra::{Kronecker, Monoid, Semiring, UnsupportedPrimitive};
use crate::eval::eval;
use crate::expr::{Expr, VarId, Valuation};
use crate::nagata::{Dual, Nagata};
use crate::tangent::{
    CayleyHom, DenseTangent, LinearHom, MutTape, ReverseCayleyTangent, ReverseMutTangent,
    ReverseTangent, SparseTangent, Tangent,
};

/// Symbolic partial derivative with respect to `x`.
///
/// Plus and Times follow the sum and product rules, trigonometric nodes the
/// chain rule, and `Let(y, e1, e2)` the let rule
/// `(∂e2/∂y)|y=e1 ⊗ ∂e1/∂x ⊕ (∂e2/∂x)|y=e1`, with the second term dropped
/// when the binder shadows `x`. Substitution stays symbolic by wrapping the
/// body derivatives in the same binding.
pub fn derive(x: VarId, e: &Expr) -> Arc<Expr> {
    match e {
        Expr::Var(y) => Arc::new(if x == *y { Expr::One } else { Expr::Zero }),
        Expr::Zero | Expr::One => Arc::new(Expr::Zero),
        Expr::Plus(e1, e2) => Expr::plus(derive(x, e1), derive(x, e2)),
        Expr::Times(e1, e2) => Expr::plus(
            Expr::times(e2.clone(), derive(x, e1)),
            Expr::times(e1.clone(), derive(x, e2)),
        ),
        Expr::Neg(a) => Arc::new(Expr::Neg(derive(x, a))),
        Expr::Sin(a) => Expr::times(Arc::new(Expr::Cos(a.clone())), derive(x, a)),
        Expr::Cos(a) => Expr::times(
            Arc::new(Expr::Neg(Arc::new(Expr::Sin(a.clone())))),
            derive(x, a),
        ),
        Expr::Let(y, e1, e2) => {
            let through_bound = Expr::times(
                Arc::new(Expr::Let(*y, e1.clone(), derive(*y, e2))),
                derive(x, e1),
            );
            if x == *y {
                through_bound
            } else {
                Expr::plus(
                    through_bound,
                    Arc::new(Expr::Let(*y, e1.clone(), derive(x, e2))),
                )
            }
        }
    }
}

/// Expression and its derivative in one structural recursion; both
/// components are probe-equal to the separate computations.
pub fn derive_tuple(x: VarId, e: &Expr) -> (Arc<Expr>, Arc<Expr>) {
    match e {
        Expr::Var(y) => (
            Expr::var(*y),
            Arc::new(if x == *y { Expr::One } else { Expr::Zero }),
        ),
        Expr::Zero => (Arc::new(Expr::Zero), Arc::new(Expr::Zero)),
        Expr::One => (Arc::new(Expr::One), Arc::new(Expr::Zero)),
        Expr::Plus(e1, e2) => {
            let (a, da) = derive_tuple(x, e1);
            let (b, db) = derive_tuple(x, e2);
            (Expr::plus(a, b), Expr::plus(da, db))
        }
        Expr::Times(e1, e2) => {
            let (a, da) = derive_tuple(x, e1);
            let (b, db) = derive_tuple(x, e2);
            (
                Expr::times(a.clone(), b.clone()),
                Expr::plus(Expr::times(b, da), Expr::times(a, db)),
            )
        }
        Expr::Neg(inner) => {
            let (a, da) = derive_tuple(x, inner);
            (Arc::new(Expr::Neg(a)), Arc::new(Expr::Neg(da)))
        }
        Expr::Sin(inner) => {
            let (a, da) = derive_tuple(x, inner);
            (
                Arc::new(Expr::Sin(a.clone())),
                Expr::times(Arc::new(Expr::Cos(a)), da),
            )
        }
        Expr::Cos(inner) => {
            let (a, da) = derive_tuple(x, inner);
            (
                Arc::new(Expr::Cos(a.clone())),
                Expr::times(Arc::new(Expr::Neg(Arc::new(Expr::Sin(a)))), da),
            )
        }
        Expr::Let(y, e1, e2) => {
            let (a, da) = derive_tuple(x, e1);
            let (b, db) = derive_tuple(x, e2);
            let through_bound = Expr::times(
                Arc::new(Expr::Let(*y, e1.clone(), derive(*y, e2))),
                da,
            );
            let d = if x == *y {
                through_bound
            } else {
                Expr::plus(through_bound, Arc::new(Expr::Let(*y, a.clone(), db)))
            };
            (Arc::new(Expr::Let(*y, a, b)), d)
        }
    }
}

/// Symbolic differentiation as evaluation into dual numbers over the free
/// semiring; equal to [`forward_classic`] with variables interpreted as
/// themselves.
pub fn symbolic(x: VarId, e: &Expr) -> Result<Dual<Expr>, UnsupportedPrimitive> {
    eval(
        |y| {
            Nagata::new(
                Expr::Var(y),
                if x == y { Expr::One } else { Expr::Zero },
            )
        },
        e,
    )
}

/// Classic forward-mode AD: value and the partial with respect to `x` in
/// one evaluation at dual numbers.
pub fn forward_classic<D: Semiring>(
    var: &Valuation<D>,
    x: VarId,
    e: &Expr,
) -> Result<Dual<D>, UnsupportedPrimitive> {
    eval(
        |y| {
            Nagata::new(
                var.get(y).clone(),
                if x == y { D::one() } else { D::zero() },
            )
        },
        e,
    )
}

/// The abstract differentiation algorithm: every mode is this line at a
/// different tangent type `E`.
pub fn abstract_d<D, E>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<Nagata<D, E>, UnsupportedPrimitive>
where
    D: Semiring,
    E: Kronecker<D>,
{
    let arity = var.arity();
    eval(
        |x| Nagata::new(var.get(x).clone(), E::delta(arity, x)),
        e,
    )
}

/// Forward mode with a dense gradient vector: the whole gradient in one
/// pass, sharing the primal across all partials.
pub fn forward_dense<D: Semiring>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<Nagata<D, DenseTangent<D>>, UnsupportedPrimitive> {
    abstract_d(var, e)
}

/// Forward mode with sparse maps, skipping the zero partials.
pub fn forward_sparse<D: Semiring>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<Nagata<D, SparseTangent<D>>, UnsupportedPrimitive> {
    abstract_d(var, e)
}

/// Reverse mode: tangents are scalar-accumulating linear maps into sparse
/// gradients. The forward pass builds closures; applying the result at
/// `one` is the backward pass.
pub fn reverse<D>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<Nagata<D, ReverseTangent<D>>, UnsupportedPrimitive>
where
    D: Semiring + Send + Sync + 'static,
{
    abstract_d(var, e)
}

/// Reverse mode with the Cayley representation: map additions become
/// function composition and each variable contributes one insert-with-add.
pub fn reverse_cayley<D>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<Nagata<D, ReverseCayleyTangent<D>>, UnsupportedPrimitive>
where
    D: Semiring + Send + Sync + 'static,
{
    abstract_d(var, e)
}

/// Reverse mode over mutable accumulation cells: the backward pass is a
/// tape of in-place updates, run on a private zeroed array per call.
pub fn reverse_mut<D>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<Nagata<D, ReverseMutTangent<D>>, UnsupportedPrimitive>
where
    D: Semiring + Send + Sync + 'static,
{
    abstract_d(var, e)
}

impl<D: Semiring + PartialEq, E: Tangent<D>> Nagata<D, E> {
    /// The gradient normalized to a sparse map, whatever the representation.
    pub fn gradient(&self, arity: usize) -> SparseTangent<D> {
        self.tangent.gradient_with(arity)
    }
}

/// Uniform handle on the five gradient modes, for drivers that pick a mode
/// at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradMode {
    ForwardDense,
    ForwardSparse,
    Reverse,
    ReverseCayley,
    ReverseMut,
}

impl GradMode {
    pub const ALL: [GradMode; 5] = [
        GradMode::ForwardDense,
        GradMode::ForwardSparse,
        GradMode::Reverse,
        GradMode::ReverseCayley,
        GradMode::ReverseMut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GradMode::ForwardDense => "forward-dense",
            GradMode::ForwardSparse => "forward-sparse",
            GradMode::Reverse => "reverse",
            GradMode::ReverseCayley => "reverse-cayley",
            GradMode::ReverseMut => "reverse-mut",
        }
    }

    pub fn from_name(name: &str) -> Option<GradMode> {
        GradMode::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Runs this mode and returns the value with the normalized gradient.
    pub fn run<D>(
        self,
        var: &Valuation<D>,
        e: &Expr,
    ) -> Result<(D, SparseTangent<D>), UnsupportedPrimitive>
    where
        D: Semiring + PartialEq + Send + Sync + 'static,
    {
        let arity = var.arity();
        Ok(match self {
            GradMode::ForwardDense => {
                let n = forward_dense(var, e)?;
                (n.primal, n.tangent.gradient_with(arity))
            }
            GradMode::ForwardSparse => {
                let n = forward_sparse(var, e)?;
                (n.primal, n.tangent.gradient_with(arity))
            }
            GradMode::Reverse => {
                let n = reverse(var, e)?;
                (n.primal, n.tangent.gradient_with(arity))
            }
            GradMode::ReverseCayley => {
                let n = reverse_cayley(var, e)?;
                (n.primal, n.tangent.gradient_with(arity))
            }
            GradMode::ReverseMut => {
                let n = reverse_mut(var, e)?;
                (n.primal, n.tangent.gradient_with(arity))
            }
        })
    }
}

/// Let-aware tangent combination implementing the let rule
/// `∂(let y = e1 in e2)/∂x = (∂e2/∂y)·∂e1/∂x + ∂e2/∂x`.
///
/// The bound variable's slot is purged from the result: its contribution is
/// consumed by the chain-rule term, and when the binder shadows an outer
/// variable the slot must carry only the outer accumulation.
pub trait LetinTangent<D: Semiring + PartialEq>: Tangent<D> {
    fn letin(arity: usize, y: VarId, de1: &Self, de2: &Self) -> Self {
        let mut comps = de2.abs(arity).padded(arity).into_components();
        let dy = std::mem::replace(&mut comps[y.idx()], D::zero());
        de1.scale(&dy)
            .add(&Self::rep(arity, &DenseTangent::new(comps)))
    }
}

impl<D: Semiring + PartialEq> LetinTangent<D> for DenseTangent<D> {}

impl<D: Semiring + PartialEq> LetinTangent<D> for SparseTangent<D> {}

impl<D> LetinTangent<D> for LinearHom<D, SparseTangent<D>> where
    D: Semiring + PartialEq + Send + Sync + 'static
{
}

impl<D> LetinTangent<D> for LinearHom<D, MutTape<D>> where
    D: Semiring + PartialEq + Send + Sync + 'static
{
}

/// Specialized let rule for the Cayley representation: the body's edits run
/// once on the shared map, the bound slot is saved around them and purged
/// afterwards, and the bound expression's edits run scaled by the extracted
/// partial. Shadowed outer accumulations survive untouched.
impl<D> LetinTangent<D> for LinearHom<D, CayleyHom<SparseTangent<D>>>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    fn letin(_arity: usize, y: VarId, de1: &Self, de2: &Self) -> Self {
        let (de1, de2) = (de1.clone(), de2.clone());
        LinearHom::from_closure(move |n: &D| {
            let n = n.clone();
            let (de1, de2) = (de1.clone(), de2.clone());
            CayleyHom::from_closure(move |mut m: SparseTangent<D>| {
                // isolate the bound slot so the body's edits cannot mix
                // with outer accumulations under shadowing
                let outer = m.take(y);
                let mut m = de2.apply(&n).apply(m);
                let dy = m.take(y);
                m.restore(y, outer);
                match dy {
                    None => m,
                    Some(dy) => de1.apply(&dy).apply(m),
                }
            })
        })
    }
}

/// The abstract algorithm with the let-aware tangent rule: the primal uses
/// standard substitution while the tangent defers to [`LetinTangent::letin`],
/// so each sub-tangent is computed once.
pub fn abstract_d_letin<D, E>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<Nagata<D, E>, UnsupportedPrimitive>
where
    D: Semiring + PartialEq,
    E: LetinTangent<D>,
{
    enum Frame<'e> {
        Visit(&'e Expr),
        Plus,
        Times,
        Neg,
        Sin,
        Cos,
        LetBind(VarId, &'e Expr),
        LetFinish(VarId, Option<usize>),
    }

    let arity = var.arity();
    let mut work: Vec<Frame<'_>> = vec![Frame::Visit(e)];
    let mut values: Vec<Nagata<D, E>> = Vec::new();
    // frames reference saved environment entries by index
    let mut saved: Vec<Option<Nagata<D, E>>> = Vec::new();
    let mut env: Vec<Option<Nagata<D, E>>> = vec![None; arity];
    // tangents of bound expressions, paired with LetFinish frames
    let mut bound_tangents: Vec<E> = Vec::new();

    while let Some(frame) = work.pop() {
        match frame {
            Frame::Visit(e) => match e {
                Expr::Var(v) => values.push(match &env[v.idx()] {
                    Some(n) => n.clone(),
                    None => Nagata::new(var.get(*v).clone(), E::delta(arity, *v)),
                }),
                Expr::Zero => values.push(Monoid::zero()),
                Expr::One => values.push(Semiring::one()),
                Expr::Plus(a, b) => {
                    work.push(Frame::Plus);
                    work.push(Frame::Visit(b));
                    work.push(Frame::Visit(a));
                }
                Expr::Times(a, b) => {
                    work.push(Frame::Times);
                    work.push(Frame::Visit(b));
                    work.push(Frame::Visit(a));
                }
                Expr::Neg(a) => {
                    work.push(Frame::Neg);
                    work.push(Frame::Visit(a));
                }
                Expr::Sin(a) => {
                    work.push(Frame::Sin);
                    work.push(Frame::Visit(a));
                }
                Expr::Cos(a) => {
                    work.push(Frame::Cos);
                    work.push(Frame::Visit(a));
                }
                Expr::Let(y, e1, e2) => {
                    work.push(Frame::LetBind(*y, e2));
                    work.push(Frame::Visit(e1));
                }
            },
            Frame::Plus => {
                let b = values.pop().unwrap();
                let a = values.pop().unwrap();
                values.push(a.add(&b));
            }
            Frame::Times => {
                let b = values.pop().unwrap();
                let a = values.pop().unwrap();
                values.push(a.mul(&b));
            }
            Frame::Neg => {
                let a = values.pop().unwrap();
                values.push(a.neg()?);
            }
            Frame::Sin => {
                let a = values.pop().unwrap();
                values.push(a.sin()?);
            }
            Frame::Cos => {
                let a = values.pop().unwrap();
                values.push(a.cos()?);
            }
            Frame::LetBind(y, body) => {
                let n1 = values.pop().unwrap();
                bound_tangents.push(n1.tangent);
                let rebound = Nagata::new(n1.primal, E::delta(arity, y));
                let old = env[y.idx()].replace(rebound);
                let slot = old.map(|o| {
                    saved.push(Some(o));
                    saved.len() - 1
                });
                work.push(Frame::LetFinish(y, slot));
                work.push(Frame::Visit(body));
            }
            Frame::LetFinish(y, slot) => {
                env[y.idx()] = slot.and_then(|i| saved[i].take());
                let n2 = values.pop().unwrap();
                let df1 = bound_tangents.pop().unwrap();
                values.push(Nagata::new(
                    n2.primal,
                    E::letin(arity, y, &df1, &n2.tangent),
                ));
            }
        }
    }

    debug_assert_eq!(values.len(), 1);
    Ok(values.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, probe_equal, RegistryMode};

    fn setup(src: &str) -> (Arc<Expr>, crate::expr::VarRegistry) {
        parse(src, RegistryMode::Grow).unwrap()
    }

    #[test]
    fn derive_example1_is_sum_rule_result() {
        let (e, reg) = setup("x*(x+1)");
        let x = reg.lookup("x").unwrap();
        let d = derive(x, &e);
        let (expected, _) = setup("x + (x + 1)");
        assert!(probe_equal(&d, &expected, reg.arity()));
    }

    #[test]
    fn derive_of_zero() {
        let x = VarId(0);
        assert_eq!(*derive(x, &Expr::Zero), Expr::Zero);
    }

    #[test]
    fn derive_let_example4() {
        let (e, reg) = setup("let y = x+x in y*y");
        let x = reg.lookup("x").unwrap();
        let d = derive(x, &e);
        let var = Valuation::from_bindings(&reg, 0i64, [(x, 5)]);
        assert_eq!(crate::eval::eval_at(&var, &d), Ok(40));
    }

    #[test]
    fn derive_tuple_agrees_with_derive() {
        let x = VarId(0);
        let (e, reg) = setup("x*(x+1)");
        let (orig, d) = derive_tuple(x, &e);
        assert!(probe_equal(&orig, &e, reg.arity()));
        assert!(probe_equal(&d, &derive(x, &e), reg.arity()));

        let (one, done) = derive_tuple(x, &Expr::One);
        assert_eq!(*one, Expr::One);
        assert_eq!(*done, Expr::Zero);
    }

    #[test]
    fn derive_tuple_random_agreement() {
        use crate::oracle::{gen_expr, ExprGenConfig};
        for seed in 0..60 {
            let cfg = ExprGenConfig {
                seed,
                max_nodes: 40,
                num_vars: 3,
                trig_enabled: false,
                let_probability: 0.2,
                ..ExprGenConfig::default()
            };
            let e = gen_expr(&cfg);
            let x = VarId(seed as u32 % 3);
            let (orig, d) = derive_tuple(x, &e);
            assert!(probe_equal(&orig, &e, 3), "seed {seed}");
            assert!(probe_equal(&d, &derive(x, &e), 3), "seed {seed}");
        }
    }

    #[test]
    fn symbolic_matches_derive() {
        let (e, reg) = setup("x*(x+1)");
        let x = reg.lookup("x").unwrap();
        let dual = symbolic(x, &e).unwrap();
        assert!(probe_equal(&dual.tangent, &derive(x, &e), reg.arity()));
        assert!(probe_equal(&dual.primal, &e, reg.arity()));
    }

    #[test]
    fn symbolic_variable_cases() {
        let (x, y) = (VarId(0), VarId(1));
        let on_other = symbolic(x, &Expr::Var(y)).unwrap();
        assert_eq!(on_other.primal, Expr::Var(y));
        assert_eq!(on_other.tangent, Expr::Zero);

        let on_self = symbolic(x, &Expr::Var(x)).unwrap();
        assert_eq!(on_self.primal, Expr::Var(x));
        assert_eq!(on_self.tangent, Expr::One);
    }

    #[test]
    fn forward_classic_example1() {
        let (e, _) = setup("x*(x+1)");
        let var = Valuation::new(vec![5i64]);
        let d = forward_classic(&var, VarId(0), &e).unwrap();
        assert_eq!(d, Nagata::new(30, 11));
    }

    #[test]
    fn forward_classic_one_and_example3() {
        let var = Valuation::new(vec![5i64]);
        let d = forward_classic(&var, VarId(0), &Expr::One).unwrap();
        assert_eq!(d, Nagata::new(1, 0));

        let (e3, _) = setup("x*((x+1)*(x+x))");
        let d = forward_classic(&var, VarId(0), &e3).unwrap();
        assert_eq!(d, Nagata::new(300, 170));
    }

    #[test]
    fn abstract_d_dense_and_sparse_example2() {
        let (e, reg) = setup("x*y + x + 1");
        let var = Valuation::new(vec![5i64, 3]);
        let n = forward_dense(&var, &e).unwrap();
        assert_eq!(n.primal, 21);
        assert_eq!(n.tangent.components(), &[4, 5]);

        let n = forward_sparse(&var, &e).unwrap();
        assert_eq!(n.primal, 21);
        let x = reg.lookup("x").unwrap();
        let y = reg.lookup("y").unwrap();
        assert_eq!(n.tangent.entries(), &[(x, 4), (y, 5)]);
    }

    #[test]
    fn abstract_d_of_one_has_zero_tangent() {
        let var: Valuation<i64> = Valuation::new(vec![5]);
        let n: Nagata<i64, DenseTangent<i64>> = abstract_d(&var, &Expr::One).unwrap();
        assert_eq!(n.primal, 1);
        assert_eq!(n.tangent, Monoid::zero());
    }

    #[test]
    fn reverse_modes_example3() {
        let (e, reg) = setup("x*((x+1)*(x+x))");
        let x = reg.lookup("x").unwrap();
        let var = Valuation::new(vec![5i64]);
        let expected = SparseTangent::singleton(x, 170);

        let n = reverse(&var, &e).unwrap();
        assert_eq!(n.primal, 300);
        assert_eq!(n.gradient(1), expected);

        let n = reverse_cayley(&var, &e).unwrap();
        assert_eq!(n.primal, 300);
        assert_eq!(n.gradient(1), expected);

        let n = reverse_mut(&var, &e).unwrap();
        assert_eq!(n.primal, 300);
        assert_eq!(n.gradient(1), expected);
    }

    #[test]
    fn letin_example4_gradient() {
        let (e, reg) = setup("let y = x+x in y*y");
        let x = reg.lookup("x").unwrap();
        let var = Valuation::from_bindings(&reg, 0i64, [(x, 5)]);

        let n: Nagata<i64, LinearHom<i64, CayleyHom<SparseTangent<i64>>>> =
            abstract_d_letin(&var, &e).unwrap();
        assert_eq!(n.primal, 100);
        assert_eq!(n.gradient(2), SparseTangent::singleton(x, 40));

        let n: Nagata<i64, SparseTangent<i64>> = abstract_d_letin(&var, &e).unwrap();
        assert_eq!(n.primal, 100);
        assert_eq!(n.gradient(2), SparseTangent::singleton(x, 40));
    }

    #[test]
    fn letin_body_independent_of_binder() {
        // de2 independent of y: result collapses to de2
        let (e, reg) = setup("let y = x*x in x+1");
        let x = reg.lookup("x").unwrap();
        let var = Valuation::from_bindings(&reg, 0i64, [(x, 3)]);
        let n: Nagata<i64, LinearHom<i64, CayleyHom<SparseTangent<i64>>>> =
            abstract_d_letin(&var, &e).unwrap();
        assert_eq!(n.primal, 4);
        assert_eq!(n.gradient(2), SparseTangent::singleton(x, 1));
    }

    #[test]
    fn letin_shadowing() {
        // let x = x+1 in x*x  at x=2: value 9, d/dx = 2(x+1) = 6, and the
        // bound slot leaves no residue
        let (e, reg) = setup("let x = x+1 in x*x");
        let x = reg.lookup("x").unwrap();
        assert_eq!(reg.arity(), 1);
        let var = Valuation::new(vec![2i64]);

        let n: Nagata<i64, LinearHom<i64, CayleyHom<SparseTangent<i64>>>> =
            abstract_d_letin(&var, &e).unwrap();
        assert_eq!(n.primal, 9);
        assert_eq!(n.gradient(1), SparseTangent::singleton(x, 6));

        let n: Nagata<i64, DenseTangent<i64>> = abstract_d_letin(&var, &e).unwrap();
        assert_eq!(n.gradient(1), SparseTangent::singleton(x, 6));
    }

    #[test]
    fn concurrent_gradient_calls_are_safe() {
        let (e, reg) = setup("x*((x+1)*(x+x))");
        let arity = reg.arity();
        let e = std::sync::Arc::new(e);
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let e = e.clone();
                std::thread::spawn(move || {
                    let var = Valuation::new(vec![k as i64 + 2]);
                    let n = reverse_mut(&var, &e).unwrap();
                    (n.primal, n.gradient(arity))
                })
            })
            .collect();
        for (k, h) in handles.into_iter().enumerate() {
            let x = k as i64 + 2;
            let (value, grad) = h.join().unwrap();
            assert_eq!(value, 2 * x * x * x + 2 * x * x);
            assert_eq!(
                grad,
                SparseTangent::singleton(VarId(0), 6 * x * x + 4 * x)
            );
        }
    }

    #[test]
    fn plain_eval_handles_let_in_all_modes() {
        let (e, reg) = setup("let y = x+x in y*y");
        let x = reg.lookup("x").unwrap();
        let var = Valuation::from_bindings(&reg, 0i64, [(x, 5)]);
        for mode in GradMode::ALL {
            let (value, grad) = mode.run(&var, &e).unwrap();
            assert_eq!(value, 100, "{}", mode.name());
            assert_eq!(grad, SparseTangent::singleton(x, 40), "{}", mode.name());
        }
    }
}
