//! Automatic differentiation over semirings.
//!
//! Expressions are values of a free-semiring AST ([`expr::Expr`]) and every
//! differentiation mode in this crate is the same fold-style evaluator
//! ([`eval::eval`]) instantiated at a different semiring of generalized dual
//! numbers ([`nagata::Nagata`]). Varying the tangent representation yields
//! symbolic differentiation, dense and sparse forward mode, and three
//! successively cheaper reverse modes, all provably producing the same
//! gradients (see [`tangent::Tangent`]).
//!
//! ```
//! use adc_core::expr::{parse, RegistryMode, Valuation};
//! use adc_core::modes::reverse;
//!
//! let (e, reg) = parse("x*((x+1)*(x+x))", RegistryMode::Grow).unwrap();
//! let var = Valuation::new(vec![5i64]);
//! let n = reverse(&var, &e).unwrap();
//! assert_eq!(n.primal, 300);
//! let grad = n.gradient(reg.arity());
//! assert_eq!(grad.get(reg.lookup("x").unwrap()), Some(&170));
//! ```

pub mod algebra;
pub mod eval;
pub mod expr;
pub mod higher;
pub mod modes;
pub mod nagata;
pub mod oracle;
pub mod tangent;

pub use algebra::{Monoid, Semiring, Module, Kronecker, UnsupportedPrimitive};
pub use expr::{Expr, VarId, VarRegistry, Valuation};
pub use nagata::{Dual, Nagata};
