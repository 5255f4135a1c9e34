//! Higher-order differentiation: fused second-order forward mode, lazy
//! streams of all successive derivatives, and the forward-over-reverse
//! composition for Hessian-vector products.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::algebra::{Kronecker, Module, Monoid, Semiring, UnsupportedPrimitive};
use crate::eval::eval;
use crate::expr::{Expr, VarId, Valuation};
use crate::nagata::Nagata;
use crate::tangent::{CayleyHom, DenseTangent, LinearHom, SparseTangent, Tangent};

/// Value, gradient and Hessian in one pass, stored without the redundancy
/// of nested pairs: one per-variable slot holding the first partial and its
/// gradient (a Hessian row).
#[derive(Debug, Clone)]
pub struct SecondOrder<D> {
    pub value: D,
    /// `grad_hess[x] = (∂e/∂x, λy. ∂²e/∂x∂y)`
    pub grad_hess: DenseTangent<Nagata<D, DenseTangent<D>>>,
}

impl<D: Semiring> SecondOrder<D> {
    pub fn gradient_component(&self, x: VarId) -> D {
        self.grad_hess.component(x).primal
    }

    pub fn hessian_component(&self, x: VarId, y: VarId) -> D {
        self.grad_hess.component(x).tangent.component(y)
    }

    pub fn gradient_dense(&self) -> DenseTangent<D> {
        DenseTangent::new(
            self.grad_hess
                .components()
                .iter()
                .map(|n| n.primal.clone())
                .collect(),
        )
    }

    /// The first-order part as a Nagata number, used to scale slots by the
    /// chain rule.
    fn first_order(&self) -> Nagata<D, DenseTangent<D>> {
        Nagata::new(self.value.clone(), self.gradient_dense())
    }
}

impl<D: Semiring> Monoid for SecondOrder<D> {
    fn zero() -> Self {
        SecondOrder {
            value: D::zero(),
            grad_hess: Monoid::zero(),
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        SecondOrder {
            value: self.value.add(&rhs.value),
            grad_hess: self.grad_hess.add(&rhs.grad_hess),
        }
    }
}

impl<D: Semiring> Semiring for SecondOrder<D> {
    fn one() -> Self {
        SecondOrder {
            value: D::one(),
            grad_hess: Monoid::zero(),
        }
    }

    /// Product rule lifted one level: slots combine as first-order Nagata
    /// numbers, which carries both gradient and Hessian contributions.
    fn mul(&self, rhs: &Self) -> Self {
        let f = self.first_order();
        let g = rhs.first_order();
        SecondOrder {
            value: self.value.mul(&rhs.value),
            grad_hess: rhs
                .grad_hess
                .scale(&f)
                .add(&self.grad_hess.scale(&g)),
        }
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        let minus_one: Nagata<D, DenseTangent<D>> =
            Nagata::new(D::one().neg()?, Monoid::zero());
        Ok(SecondOrder {
            value: self.value.neg()?,
            grad_hess: self.grad_hess.scale(&minus_one),
        })
    }

    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(SecondOrder {
            value: self.value.sin()?,
            grad_hess: self.grad_hess.scale(&self.first_order().cos()?),
        })
    }

    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(SecondOrder {
            value: self.value.cos()?,
            grad_hess: self.grad_hess.scale(&self.first_order().sin()?.neg()?),
        })
    }
}

/// Value, gradient and all Hessian rows in a single evaluation.
pub fn forward_2nd<D: Semiring>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<SecondOrder<D>, UnsupportedPrimitive> {
    let arity = var.arity();
    eval(
        |x| SecondOrder {
            value: var.get(x).clone(),
            grad_hess: Kronecker::delta(arity, x),
        },
        e,
    )
}

type TailFn<D> = Rc<dyn Fn(VarId) -> DerivStream<D>>;

/// An infinite stream of all successive partial derivatives: the head is
/// the value and `tail(v)` is the stream of the partial with respect to
/// `v`. Forcing a tail is memoized per node, so repeated observations do
/// not recompute.
pub struct DerivStream<D> {
    head: D,
    tail: TailFn<D>,
    memo: Rc<RefCell<HashMap<VarId, DerivStream<D>>>>,
}

impl<D> Clone for DerivStream<D>
where
    D: Clone,
{
    fn clone(&self) -> Self {
        DerivStream {
            head: self.head.clone(),
            tail: self.tail.clone(),
            memo: self.memo.clone(),
        }
    }
}

impl<D> std::fmt::Debug for DerivStream<D>
where
    D: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} :< <lazy>", self.head)
    }
}

impl<D: Clone + 'static> DerivStream<D> {
    pub fn new(head: D, tail: impl Fn(VarId) -> DerivStream<D> + 'static) -> Self {
        DerivStream {
            head,
            tail: Rc::new(tail),
            memo: Rc::new(RefCell::new(HashMap::new())),
        }
    }

    pub fn head(&self) -> &D {
        &self.head
    }

    /// Forces the derivative stream with respect to `v`.
    pub fn tail(&self, v: VarId) -> DerivStream<D> {
        if let Some(s) = self.memo.borrow().get(&v) {
            return s.clone();
        }
        let s = (self.tail)(v);
        self.memo.borrow_mut().insert(v, s.clone());
        s
    }
}

impl<D: Monoid + 'static> DerivStream<D> {
    fn constant(d: D) -> Self {
        DerivStream::new(d, |_| DerivStream::constant(D::zero()))
    }
}

impl<D: Monoid + 'static> Monoid for DerivStream<D> {
    fn zero() -> Self {
        DerivStream::constant(D::zero())
    }

    fn add(&self, rhs: &Self) -> Self {
        let (a, b) = (self.clone(), rhs.clone());
        DerivStream::new(self.head.add(&rhs.head), move |v| {
            a.tail(v).add(&b.tail(v))
        })
    }
}

impl<D: Semiring + 'static> Semiring for DerivStream<D> {
    fn one() -> Self {
        DerivStream::constant(D::one())
    }

    /// `(x :< xs) ⊗ (y :< ys) = x⊗y :< λv. (xs v ⊗ yys) ⊕ (xxs ⊗ ys v)`.
    fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (self.clone(), rhs.clone());
        DerivStream::new(self.head.mul(&rhs.head), move |v| {
            a.tail(v).mul(&b).add(&a.mul(&b.tail(v)))
        })
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        // probe capability eagerly so the error surfaces at construction
        let head = self.head.neg()?;
        let a = self.clone();
        Ok(DerivStream::new(head, move |v| {
            a.tail(v).neg().expect("neg capability probed at head")
        }))
    }

    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        let head = self.head.sin()?;
        self.head.cos()?;
        let a = self.clone();
        Ok(DerivStream::new(head, move |v| {
            let cos_a = a.cos().expect("trig capability probed at head");
            a.tail(v).mul(&cos_a)
        }))
    }

    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        let head = self.head.cos()?;
        self.head.sin()?;
        let a = self.clone();
        Ok(DerivStream::new(head, move |v| {
            let neg_sin_a = a
                .sin()
                .and_then(|s| s.neg())
                .expect("trig capability probed at head");
            a.tail(v).mul(&neg_sin_a)
        }))
    }
}

/// Evaluates `e` into the stream semiring: the result carries the value and
/// every higher-order partial, forced on demand.
pub fn stream_all<D: Semiring + 'static>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<DerivStream<D>, UnsupportedPrimitive> {
    eval(
        |y| {
            let head = var.get(y).clone();
            DerivStream::new(head, move |w| {
                if w == y {
                    DerivStream::constant(D::one())
                } else {
                    DerivStream::constant(D::zero())
                }
            })
        },
        e,
    )
}

/// `[e, ∂x e, ∂x² e, …]` evaluated at the stream's point, `depth + 1`
/// entries.
pub fn take_diag<D: Clone + 'static>(
    stream: &DerivStream<D>,
    x: VarId,
    depth: usize,
) -> Vec<D> {
    let mut out = Vec::with_capacity(depth + 1);
    let mut s = stream.clone();
    out.push(s.head().clone());
    for _ in 0..depth {
        s = s.tail(x);
        out.push(s.head().clone());
    }
    out
}

/// The mixed partial along `path`, innermost derivative first.
pub fn partial_along<D: Clone + 'static>(stream: &DerivStream<D>, path: &[VarId]) -> D {
    let mut s = stream.clone();
    for v in path {
        s = s.tail(*v);
    }
    s.head().clone()
}

type RevCayley<D> = LinearHom<D, CayleyHom<SparseTangent<D>>>;

/// Forward-over-reverse composition: per-variable slots pair the first
/// partial with a reverse-mode hom whose gradient is that partial's
/// gradient, one Hessian row.
#[derive(Debug, Clone)]
pub struct HybridN<D> {
    pub value: D,
    pub rows: DenseTangent<Nagata<D, RevCayley<D>>>,
}

impl<D> HybridN<D>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    pub fn gradient_component(&self, x: VarId) -> D {
        self.rows.component(x).primal
    }

    /// Extracts one Hessian row by running that slot's backward pass.
    pub fn hessian_row(&self, x: VarId) -> SparseTangent<D> {
        self.rows.component(x).tangent.gradient_with(self.rows.len())
    }

    fn first_order(&self) -> Nagata<D, RevCayley<D>> {
        let grad = DenseTangent::new(
            self.rows
                .components()
                .iter()
                .map(|n| n.primal.clone())
                .collect(),
        );
        Nagata::new(
            self.value.clone(),
            Tangent::rep(self.rows.len(), &grad),
        )
    }
}

impl<D> Monoid for HybridN<D>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    fn zero() -> Self {
        HybridN {
            value: D::zero(),
            rows: Monoid::zero(),
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        HybridN {
            value: self.value.add(&rhs.value),
            rows: self.rows.add(&rhs.rows),
        }
    }
}

impl<D> Semiring for HybridN<D>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    fn one() -> Self {
        HybridN {
            value: D::one(),
            rows: Monoid::zero(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let f = self.first_order();
        let g = rhs.first_order();
        HybridN {
            value: self.value.mul(&rhs.value),
            rows: rhs.rows.scale(&f).add(&self.rows.scale(&g)),
        }
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        let minus_one: Nagata<D, RevCayley<D>> = Nagata::new(D::one().neg()?, Monoid::zero());
        Ok(HybridN {
            value: self.value.neg()?,
            rows: self.rows.scale(&minus_one),
        })
    }

    fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(HybridN {
            value: self.value.sin()?,
            rows: self.rows.scale(&self.first_order().cos()?),
        })
    }

    fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(HybridN {
            value: self.value.cos()?,
            rows: self.rows.scale(&self.first_order().sin()?.neg()?),
        })
    }
}

/// Evaluates `e` into the hybrid semiring: forward mode over the variables,
/// reverse mode within each slot.
pub fn forward_hybrid<D>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<HybridN<D>, UnsupportedPrimitive>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    let arity = var.arity();
    eval(
        |x| HybridN {
            value: var.get(x).clone(),
            rows: Kronecker::delta(arity, x),
        },
        e,
    )
}

/// The Hessian applied to a vector, `H·v`, extracting one row combination
/// at a time and never materializing the matrix.
pub fn hessian_vector<D>(
    var: &Valuation<D>,
    e: &Expr,
    v: &DenseTangent<D>,
) -> Result<DenseTangent<D>, UnsupportedPrimitive>
where
    D: Semiring + PartialEq + Send + Sync + 'static,
{
    let arity = var.arity();
    assert_eq!(v.len(), arity, "vector length must match arity");
    let hybrid = forward_hybrid(var, e)?;
    Ok(DenseTangent::from_fn(arity, |x| {
        let row = hybrid.hessian_row(x);
        let mut acc = D::zero();
        for (y, h) in row.entries() {
            acc = acc.add(&h.mul(&v.component(*y)));
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, RegistryMode};
    use crate::modes::abstract_d;

    fn setup(src: &str) -> (std::sync::Arc<Expr>, crate::expr::VarRegistry) {
        parse(src, RegistryMode::Grow).unwrap()
    }

    #[test]
    fn forward_2nd_example3() {
        let (e, _) = setup("x*((x+1)*(x+x))");
        let var = Valuation::new(vec![5i64]);
        let x = VarId(0);
        let n = forward_2nd(&var, &e).unwrap();
        assert_eq!(n.value, 300);
        assert_eq!(n.gradient_component(x), 170);
        assert_eq!(n.hessian_component(x, x), 64);
    }

    #[test]
    fn forward_2nd_of_variable() {
        let var = Valuation::new(vec![7i64]);
        let x = VarId(0);
        let n = forward_2nd(&var, &Expr::Var(x)).unwrap();
        assert_eq!(n.value, 7);
        assert_eq!(n.gradient_component(x), 1);
        assert_eq!(n.hessian_component(x, x), 0);
    }

    /// Nested forward-over-forward: evaluating at Nagata numbers whose
    /// primals are themselves Nagata numbers. Independent route to the
    /// Hessian used as the oracle.
    fn nested_hessian(var: &Valuation<i64>, e: &Expr) -> Vec<Vec<i64>> {
        type First = Nagata<i64, DenseTangent<i64>>;
        let arity = var.arity();
        let var2: Valuation<First> = Valuation::new(
            (0..arity as u32)
                .map(|i| {
                    Nagata::new(
                        *var.get(VarId(i)),
                        Kronecker::delta(arity, VarId(i)),
                    )
                })
                .collect(),
        );
        let nested: Nagata<First, DenseTangent<First>> = abstract_d(&var2, e).unwrap();
        (0..arity as u32)
            .map(|x| {
                let slot = nested.tangent.component(VarId(x));
                (0..arity as u32)
                    .map(|y| slot.tangent.component(VarId(y)))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn forward_2nd_matches_nested_on_random_polynomials() {
        use crate::oracle::{gen_expr, ExprGenConfig};
        for seed in 0..40 {
            let cfg = ExprGenConfig {
                seed,
                max_nodes: 30,
                num_vars: 3,
                trig_enabled: false,
                let_probability: 0.0,
                ..ExprGenConfig::default()
            };
            let e = gen_expr(&cfg);
            let var = Valuation::new(vec![2i64, -1, 3]);
            let fused = forward_2nd(&var, &e).unwrap();
            let oracle = nested_hessian(&var, &e);
            for x in 0..3u32 {
                for y in 0..3u32 {
                    assert_eq!(
                        fused.hessian_component(VarId(x), VarId(y)),
                        oracle[x as usize][y as usize],
                        "seed {seed} H[{x}][{y}]"
                    );
                }
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_on_random_polynomials() {
        use crate::oracle::{gen_expr, ExprGenConfig};
        for seed in 100..140 {
            let cfg = ExprGenConfig {
                seed,
                max_nodes: 40,
                num_vars: 3,
                trig_enabled: false,
                let_probability: 0.0,
                ..ExprGenConfig::default()
            };
            let e = gen_expr(&cfg);
            let var = Valuation::new(vec![3i64, 2, -2]);
            let n = forward_2nd(&var, &e).unwrap();
            for x in 0..3u32 {
                for y in 0..3u32 {
                    assert_eq!(
                        n.hessian_component(VarId(x), VarId(y)),
                        n.hessian_component(VarId(y), VarId(x)),
                        "seed {seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn stream_diag_example3() {
        let (e, _) = setup("x*((x+1)*(x+x))");
        let var = Valuation::new(vec![5i64]);
        let s = stream_all(&var, &e).unwrap();
        assert_eq!(take_diag(&s, VarId(0), 4), vec![300, 170, 64, 12, 0]);
    }

    #[test]
    fn stream_of_constant() {
        let var: Valuation<i64> = Valuation::new(vec![5]);
        let s = stream_all(&var, &Expr::One).unwrap();
        assert_eq!(take_diag(&s, VarId(0), 2), vec![1, 0, 0]);
    }

    #[test]
    fn stream_mixed_partials_example2() {
        let (e, reg) = setup("x*y + x + 1");
        let x = reg.lookup("x").unwrap();
        let y = reg.lookup("y").unwrap();
        let var = Valuation::new(vec![5i64, 3]);
        let s = stream_all(&var, &e).unwrap();
        // value, d/dx, then d/dy of that
        assert_eq!(partial_along(&s, &[]), 21);
        assert_eq!(partial_along(&s, &[x]), 4);
        assert_eq!(partial_along(&s, &[x, y]), 1);
    }

    #[test]
    fn stream_memoizes_forcing() {
        use crate::algebra::{scoped_counter, Counted};
        let (e, _) = setup("x*x*x");
        let var: Valuation<Counted<i64>> = Valuation::new(vec![Counted(2)]);
        let s = stream_all(&var, &e).unwrap();

        let (first, initial) = scoped_counter(|| take_diag(&s, VarId(0), 3));
        assert!(initial.total() > 0);

        // forcing the same prefix again touches only the memo
        let (second, repeat) = scoped_counter(|| take_diag(&s, VarId(0), 3));
        assert_eq!(repeat.total(), 0, "repeated forcing recomputed work");
        assert_eq!(first, second);
        assert_eq!(
            first.into_iter().map(Counted::into_inner).collect::<Vec<_>>(),
            vec![8, 12, 12, 6]
        );
    }

    #[test]
    fn hessian_vector_example3() {
        let (e, _) = setup("x*((x+1)*(x+x))");
        let var = Valuation::new(vec![5i64]);
        let hv = hessian_vector(&var, &e, &DenseTangent::new(vec![1])).unwrap();
        assert_eq!(hv.components(), &[64]);
    }

    #[test]
    fn hessian_vector_linear_expression_is_zero() {
        let (e, _) = setup("x + y + y + 1");
        let var = Valuation::new(vec![5i64, 3]);
        let hv = hessian_vector(&var, &e, &DenseTangent::new(vec![2, 7])).unwrap();
        assert_eq!(hv.components(), &[0, 0]);
    }

    #[test]
    fn hessian_vector_example2() {
        // H of x*y + x + 1 is [[0,1],[1,0]]; H·[1,0] = [0,1]
        let (e, _) = setup("x*y + x + 1");
        let var = Valuation::new(vec![5i64, 3]);
        let hv = hessian_vector(&var, &e, &DenseTangent::new(vec![1, 0])).unwrap();
        assert_eq!(hv.components(), &[0, 1]);
    }

    #[test]
    fn hybrid_rows_agree_with_forward_2nd() {
        use crate::oracle::{gen_expr, ExprGenConfig};
        for seed in 200..230 {
            let cfg = ExprGenConfig {
                seed,
                max_nodes: 30,
                num_vars: 3,
                trig_enabled: false,
                let_probability: 0.0,
                ..ExprGenConfig::default()
            };
            let e = gen_expr(&cfg);
            let var = Valuation::new(vec![2i64, 3, -1]);
            let hybrid = forward_hybrid(&var, &e).unwrap();
            let second = forward_2nd(&var, &e).unwrap();
            for x in 0..3u32 {
                let row = hybrid.hessian_row(VarId(x));
                for y in 0..3u32 {
                    let got = row.get(VarId(y)).cloned().unwrap_or(0);
                    assert_eq!(
                        got,
                        second.hessian_component(VarId(x), VarId(y)),
                        "seed {seed} row {x} col {y}"
                    );
                }
            }
        }
    }
}
