//! Probing equality of expressions.
//!
//! Two expressions are probe-equal when they evaluate identically at 32
//! pseudorandom points per variable. Ring expressions (no trigonometry) are
//! probed in the prime field of order 2^61 - 1, where agreement at random
//! points implies equality of polynomials with overwhelming probability.
//! Expressions containing `sin`/`cos` fall back to `f64` probes at points in
//! [-1.5, 1.5] compared to relative tolerance 1e-9.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, Valuation};
use crate::algebra::{Monoid, Semiring, UnsupportedPrimitive};
use crate::eval::eval;

const PROBES: usize = 32;
const PROBE_SEED: u64 = 0x5eed_ab1e;

/// Element of the prime field of order 2^61 - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Fp(u64);

impl Fp {
    pub(crate) const P: u64 = (1 << 61) - 1;

    pub(crate) fn new(x: u64) -> Self {
        Fp(x % Self::P)
    }
}

impl Monoid for Fp {
    fn zero() -> Self {
        Fp(0)
    }

    fn add(&self, rhs: &Self) -> Self {
        let s = self.0 + rhs.0;
        Fp(if s >= Self::P { s - Self::P } else { s })
    }
}

impl Semiring for Fp {
    fn one() -> Self {
        Fp(1)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Fp(((self.0 as u128 * rhs.0 as u128) % Self::P as u128) as u64)
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(if self.0 == 0 { Fp(0) } else { Fp(Self::P - self.0) })
    }
}

fn has_trig(e: &Expr) -> bool {
    let mut stack = vec![e];
    while let Some(e) = stack.pop() {
        match e {
            Expr::Sin(_) | Expr::Cos(_) => return true,
            Expr::Var(_) | Expr::Zero | Expr::One => {}
            Expr::Neg(a) => stack.push(a),
            Expr::Plus(a, b) | Expr::Times(a, b) | Expr::Let(_, a, b) => {
                stack.push(a);
                stack.push(b);
            }
        }
    }
    false
}

/// Decides equality of `a` and `b` (over at least `arity` variables) by
/// evaluation probing.
pub fn probe_equal(a: &Expr, b: &Expr, arity: usize) -> bool {
    let arity = arity.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    if has_trig(a) || has_trig(b) {
        for _ in 0..PROBES {
            let point: Vec<f64> = (0..arity).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let var = Valuation::new(point);
            let (xa, xb) = match (eval_at(&var, a), eval_at(&var, b)) {
                (Ok(xa), Ok(xb)) => (xa, xb),
                _ => return false,
            };
            let tol = 1e-9 * xa.abs().max(xb.abs()).max(1.0);
            if (xa - xb).abs() > tol {
                return false;
            }
        }
    } else {
        for _ in 0..PROBES {
            let point: Vec<Fp> = (0..arity).map(|_| Fp::new(rng.gen())).collect();
            let var = Valuation::new(point);
            match (eval_at(&var, a), eval_at(&var, b)) {
                (Ok(xa), Ok(xb)) if xa == xb => {}
                _ => return false,
            }
        }
    }
    true
}

fn eval_at<D: Semiring>(var: &Valuation<D>, e: &Expr) -> Result<D, UnsupportedPrimitive> {
    eval(|v| var.get(v).clone(), e)
}
