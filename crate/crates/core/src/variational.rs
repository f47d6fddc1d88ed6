//! Euler-Lagrange residuals, momenta and reduced Hamiltonians.
//!
//! Symbolic results are produced in the DSL and evaluated on sampled
//! coordinate stacks. For a ladder `0 = a_0 < a_1 < ... < a_n`:
//!
//! ```text
//! EL   = sum_l rd(a_l, dL/dq_l)
//! p_k  = sum_{m >= k} rd(a_{m+1} - a_{k+1}, dL/dq_{m+1})      k = 0..n-1
//! H    = sum_k p_k q_{k+1} - L,  with q_n eliminated through p_{n-1}
//! ```
//!
//! `rd(order, e)` is resolved where possible: integer orders act as `(-d/dt)^p`
//! on left-derivative coordinates, and under [`Convention::Riewe`] fractional
//! orders fold into a phase times a single left derivative of the total order.

use num_complex::Complex64;

use crate::dsl::{partial, Atom, Expr, OrderKey, Poly, SampledEnv, Var};
use crate::error::{Error, Result};
use crate::fracops::{left_rl_deriv, shift_samples, FracOrder, SampledPath};
use crate::lagrangian::{Convention, LagrangianSpec};
use crate::special::unit_phase;

/// `x(t)` together with every ladder coordinate.
///
/// A centred stack shifts each coordinate of order `o` by `o dt / 2` so that
/// every entry approximates its own sample time to second order; the raw
/// stack keeps the backward stencils of the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateStack {
    pub base: SampledPath,
    pub derived: Vec<SampledPath>,
    pub centred: bool,
}

impl CoordinateStack {
    pub fn env<'a>(&'a self, lag: &'a LagrangianSpec, momenta: &'a [SampledPath]) -> SampledEnv<'a> {
        SampledEnv {
            base: &self.base,
            coords: &self.derived,
            momenta,
            params: lag.params(),
            convention: lag.convention(),
            centred: self.centred,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSet {
    pub symbolic: Vec<Expr>,
    pub sampled: Vec<SampledPath>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub symbolic: Expr,
    pub sampled: SampledPath,
}

/// Symbolic output of a derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub euler_lagrange: Expr,
    pub momenta: Vec<Expr>,
    pub hamiltonian: Expr,
}

pub fn coordinate_stack(lag: &LagrangianSpec, x: &SampledPath) -> Result<CoordinateStack> {
    let top = lag.ladder()[lag.top()];
    if (x.grid().len() as f64) < top.ceil() + 2.0 {
        return Err(Error::InvalidGrid(format!(
            "{} samples cannot resolve derivative order {top}",
            x.grid().len()
        )));
    }
    let derived = lag
        .ladder()
        .iter()
        .map(|&o| Ok(left_rl_deriv(x, FracOrder::new(o)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoordinateStack { base: x.clone(), derived, centred: false })
}

pub fn centred_stack(lag: &LagrangianSpec, x: &SampledPath) -> Result<CoordinateStack> {
    let raw = coordinate_stack(lag, x)?;
    let derived = raw.derived.iter().zip(lag.ladder()).map(|(q, &o)| shift_samples(q, 0.5 * o)).collect();
    Ok(CoordinateStack { base: raw.base, derived, centred: true })
}

fn var_order(lag: &LagrangianSpec, v: &Var) -> Option<f64> {
    match v {
        Var::Coord(l) => lag.ladder().get(*l).copied(),
        Var::Composite(o) => Some(o.0),
        _ => None,
    }
}

/// Coordinate of total order `order`: a ladder slot when one matches.
fn coordinate_of(lag: &LagrangianSpec, order: f64) -> Var {
    match lag.ladder_index(order) {
        Some(l) => Var::Coord(l),
        None => Var::Composite(OrderKey(order)),
    }
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0
}

/// Resolves `rd(order, e)` as far as the convention allows.
pub fn right_apply(lag: &LagrangianSpec, order: f64, e: &Expr) -> Poly {
    let poly = Poly::from_expr(e);
    if order == 0.0 {
        return poly;
    }
    let opaque = |inner: &Poly| -> Poly {
        if inner.is_zero() {
            Poly::default()
        } else {
            Poly::from_expr(&Expr::right_deriv(order, inner.to_expr()))
        }
    };
    let parts = poly.linear_decomposition();
    let mut out = opaque(&parts.nonlinear);
    if !is_integer(order) {
        out = out.add(&opaque(&parts.constant));
    }
    for (v, coef) in &parts.linear {
        let Some(inner) = var_order(lag, v) else {
            out = out.add(&opaque(&coef.mul(&Poly::atom(Atom::Var(*v)))));
            continue;
        };
        let phase = if is_integer(order) {
            Some(if order as i64 % 2 == 0 { 1.0 } else { -1.0 }.into())
        } else if lag.convention() == Convention::Riewe {
            Some(unit_phase(order))
        } else {
            None
        };
        let term = match phase {
            Some(ph) => coef.mul(&Poly::atom(Atom::Var(coordinate_of(lag, inner + order)))).scale(ph),
            None => coef.mul(&Poly::from_expr(&Expr::right_deriv(order, Expr::Var(*v)))),
        };
        out = out.add(&term);
    }
    out
}

/// `sum_l rd(a_l, dL/dq_l)`.
pub fn euler_lagrange_symbolic(lag: &LagrangianSpec) -> Expr {
    let mut acc = Poly::default();
    for (l, &o) in lag.ladder().iter().enumerate() {
        acc = acc.add(&right_apply(lag, o, &partial(lag.expr(), l)));
    }
    acc.to_expr()
}

/// Momenta `p_0 .. p_{n-1}` in terms of coordinates.
pub fn momenta_symbolic(lag: &LagrangianSpec) -> Vec<Expr> {
    let ladder = lag.ladder();
    let n = lag.top();
    (0..n)
        .map(|k| {
            let mut acc = Poly::default();
            for m in k..n {
                let order = ladder[m + 1] - ladder[k + 1];
                acc = acc.add(&right_apply(lag, order, &partial(lag.expr(), m + 1)));
            }
            acc.to_expr()
        })
        .collect()
}

/// `sum_k p_k q_{k+1} - L` with the top coordinate eliminated.
pub fn hamiltonian_symbolic(lag: &LagrangianSpec) -> Result<Expr> {
    let n = lag.top();
    let top = Var::Coord(n);
    let dl = partial(lag.expr(), n);
    let a = partial(&dl, n);
    if a.depends_on_trajectory() {
        return Err(Error::NonQuadratic(format!("d2L/dq{n}^2 = {a} depends on the trajectory")));
    }
    if Poly::from_expr(&a).is_zero() {
        return Err(Error::SingularLegendre(format!("L does not depend quadratically on q{n}")));
    }
    let r = dl.substitute(&top, &Expr::zero());
    // p_{n-1} = a q_n + r
    let q_top = Expr::div(Expr::sub(Expr::p(n - 1), r), a);
    let mut h = Expr::neg(lag.expr().clone());
    for k in 0..n {
        h = Expr::add(h, Expr::mul(Expr::p(k), Expr::q(k + 1)));
    }
    let h = h.substitute(&top, &q_top);
    Ok(Poly::from_expr(&h).to_expr())
}

pub fn derive(lag: &LagrangianSpec) -> Result<Derivation> {
    Ok(Derivation {
        euler_lagrange: euler_lagrange_symbolic(lag),
        momenta: momenta_symbolic(lag),
        hamiltonian: hamiltonian_symbolic(lag)?,
    })
}

pub fn euler_lagrange_residual(lag: &LagrangianSpec, x: &SampledPath) -> Result<SampledPath> {
    let stack = coordinate_stack(lag, x)?;
    stack.env(lag, &[]).eval(&euler_lagrange_symbolic(lag))
}

/// Momenta along `x`, evaluated on the centred stack.
pub fn momenta(lag: &LagrangianSpec, x: &SampledPath) -> Result<MomentumSet> {
    let stack = centred_stack(lag, x)?;
    momenta_on(lag, &stack)
}

fn momenta_on(lag: &LagrangianSpec, stack: &CoordinateStack) -> Result<MomentumSet> {
    let symbolic = momenta_symbolic(lag);
    let env = stack.env(lag, &[]);
    let sampled = symbolic.iter().map(|e| env.eval(e)).collect::<Result<Vec<_>>>()?;
    Ok(MomentumSet { symbolic, sampled })
}

/// Reduced Hamiltonian along `x`, evaluated on the centred stack.
pub fn reduced_hamiltonian(lag: &LagrangianSpec, x: &SampledPath) -> Result<HamiltonianSpec> {
    let stack = centred_stack(lag, x)?;
    let symbolic = hamiltonian_symbolic(lag)?;
    let mom = momenta_on(lag, &stack)?;
    let sampled = stack.env(lag, &mom.sampled).eval(&symbolic)?;
    Ok(HamiltonianSpec { symbolic, sampled })
}

/// `L(t)` along the stack.
pub fn sampled_lagrangian(lag: &LagrangianSpec, stack: &CoordinateStack) -> Result<SampledPath> {
    stack.env(lag, &[]).eval(lag.expr())
}

/// Relative variation `max |H(t) - H(t0)| / |H(t0)|` over samples not flagged
/// as low accuracy, with `t0` the first reliable sample.
pub fn relative_variation(h: &SampledPath) -> f64 {
    let range = h.reliable_range();
    let v = &h.values()[range];
    let Some(&h0) = v.first() else {
        return 0.0;
    };
    let scale = h0.norm().max(f64::MIN_POSITIVE);
    v.iter().map(|z| (z - h0).norm()).fold(0.0, f64::max) / scale
}

/// Convenience for constant scalars in symbolic comparisons.
pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}
