//! Expression language for Lagrangians `L(t, q0, ..., qn)`.
//!
//! `q<l>` stands for the fractional coordinate of order `ladder[l]`, `p<l>`
//! for its conjugate momentum, `d(order)` for a left derivative of the
//! trajectory of arbitrary total order and `rd(order, e)` for the right
//! derivative applied to `e`. The grammar is documented in `docs/dsl.md`.

mod ast;
mod diff;
mod eval;
mod parser;
mod poly;

pub use ast::{Expr, Func, OrderKey, Var};
pub use diff::{fold, partial, partial_var};
pub use eval::{eval, Bindings, Params, SampledEnv};
pub use parser::{parse, parse_with, ParseOptions};
pub use poly::{same_polynomial, Atom, LinearParts, Monomial, Poly};
