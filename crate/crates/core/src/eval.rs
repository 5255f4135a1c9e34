//! The fold-style evaluator: the unique semiring homomorphism out of the
//! free semiring, extended with `let` environments.
//!
//! Evaluation drives everything in this crate — plain evaluation, symbolic
//! differentiation and every AD mode are all `eval` at different semirings.
//! The walk uses an explicit work stack so expressions nested 10^5 levels
//! deep evaluate without overflowing the call stack.

use crate::algebra::{Semiring, UnsupportedPrimitive};
use crate::expr::{Expr, VarId, Valuation};

enum Frame<'e, D> {
    Visit(&'e Expr),
    Plus,
    Times,
    Neg,
    Sin,
    Cos,
    // value of the bound expression is on the value stack
    LetBind(VarId, &'e Expr),
    // restore the shadow slot after leaving the body
    LetRestore(VarId, Option<D>),
}

/// Shadow slots for `let`-bound variables: O(1) lookup per variable, with
/// save/restore on entering and leaving each binder.
struct Env<D> {
    slots: Vec<Option<D>>,
}

impl<D: Clone> Env<D> {
    fn new() -> Self {
        Env { slots: Vec::new() }
    }

    fn get(&self, v: VarId) -> Option<&D> {
        self.slots.get(v.idx()).and_then(|s| s.as_ref())
    }

    fn swap(&mut self, v: VarId, d: Option<D>) -> Option<D> {
        if self.slots.len() <= v.idx() {
            self.slots.resize(v.idx() + 1, None);
        }
        std::mem::replace(&mut self.slots[v.idx()], d)
    }
}

/// Evaluates `e` in the semiring `D`, mapping variables through `gen`.
/// Let-bound expressions are computed once and visible to the body through
/// the extended environment.
pub fn eval<D: Semiring>(
    gen: impl Fn(VarId) -> D,
    e: &Expr,
) -> Result<D, UnsupportedPrimitive> {
    let mut work: Vec<Frame<'_, D>> = vec![Frame::Visit(e)];
    let mut values: Vec<D> = Vec::new();
    let mut env: Env<D> = Env::new();

    while let Some(frame) = work.pop() {
        match frame {
            Frame::Visit(e) => match e {
                Expr::Var(v) => values.push(match env.get(*v) {
                    Some(d) => d.clone(),
                    None => gen(*v),
                }),
                Expr::Zero => values.push(D::zero()),
                Expr::One => values.push(D::one()),
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
                let bound = values.pop().unwrap();
                let old = env.swap(y, Some(bound));
                work.push(Frame::LetRestore(y, old));
                work.push(Frame::Visit(body));
            }
            Frame::LetRestore(y, old) => {
                env.swap(y, old);
            }
        }
    }

    debug_assert_eq!(values.len(), 1);
    Ok(values.pop().unwrap())
}

/// Evaluates at a valuation.
pub fn eval_at<D: Semiring>(var: &Valuation<D>, e: &Expr) -> Result<D, UnsupportedPrimitive> {
    eval(|v| var.get(v).clone(), e)
}

/// A program written against the scalar signature rather than as a syntax
/// tree: the shallow embedding. Implementors are polymorphic in the
/// semiring, so the same program can run at numbers, Nagata numbers, or the
/// free semiring itself.
pub trait SemiringFn {
    fn arity(&self) -> usize;

    /// Runs the program at scalar type `D`. `args` has length `arity`.
    fn apply<D: Semiring>(&self, args: &[D]) -> Result<D, UnsupportedPrimitive>;
}

/// Recovers the deep embedding of a generic program by running it at the
/// free semiring with fresh variables `0..arity`.
pub fn reify<F: SemiringFn>(f: &F) -> Result<Expr, UnsupportedPrimitive> {
    let vars: Vec<Expr> = (0..f.arity() as u32).map(|i| Expr::Var(VarId(i))).collect();
    f.apply(&vars)
}

/// Runs a generic program directly at scalar `D` with no intermediate AST.
/// Equal to `eval` of the program's reification at the same arguments.
pub fn apply_generic<F: SemiringFn, D: Semiring>(
    f: &F,
    args: &[D],
) -> Result<D, UnsupportedPrimitive> {
    assert_eq!(args.len(), f.arity(), "argument count mismatch");
    f.apply(args)
}
