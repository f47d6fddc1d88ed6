//! Pointwise and sampled evaluation.

use num_complex::Complex64;
use std::collections::BTreeMap;

use super::ast::{Expr, Var};
use crate::error::{Error, Result};
use crate::fracops::{left_rl_deriv, right_rl_deriv, shift_samples, FracOrder, SampledPath};
use crate::lagrangian::Convention;
use crate::special::unit_phase;

pub type Bindings = BTreeMap<Var, Complex64>;
pub type Params = BTreeMap<String, Complex64>;

/// Evaluates at a single point. `rd(..)` nodes are rejected.
pub fn eval(expr: &Expr, bindings: &Bindings, params: &Params) -> Result<Complex64> {
    Ok(match expr {
        Expr::Num(z) => *z,
        Expr::Param(p) => *params.get(p).ok_or_else(|| Error::UnboundVariable(p.clone()))?,
        Expr::Var(v) => *bindings.get(v).ok_or_else(|| Error::UnboundVariable(v.to_string()))?,
        Expr::Neg(a) => -eval(a, bindings, params)?,
        Expr::Func(f, a) => f.apply(eval(a, bindings, params)?),
        Expr::Add(a, b) => eval(a, bindings, params)? + eval(b, bindings, params)?,
        Expr::Sub(a, b) => eval(a, bindings, params)? - eval(b, bindings, params)?,
        Expr::Mul(a, b) => eval(a, bindings, params)? * eval(b, bindings, params)?,
        Expr::Div(a, b) => {
            let d = eval(b, bindings, params)?;
            if d == Complex64::new(0.0, 0.0) {
                return Err(Error::DivisionByZero);
            }
            eval(a, bindings, params)? / d
        }
        Expr::Pow(a, n) => eval(a, bindings, params)?.powu(*n),
        Expr::RightDeriv(o, _) => return Err(Error::NonLocal(format!("rd({o}, ..)"))),
    })
}

/// Sampled trajectory data for evaluating expressions along a path.
pub struct SampledEnv<'a> {
    /// The trajectory x(t); composite variables `d(order)` are derived from it.
    pub base: &'a SampledPath,
    /// `q<l>` samples.
    pub coords: &'a [SampledPath],
    /// `p<l>` samples.
    pub momenta: &'a [SampledPath],
    pub params: &'a Params,
    pub convention: Convention,
    /// Shift every derivative stencil to its own sample time. `coords` must
    /// then be centred too.
    pub centred: bool,
}

impl SampledEnv<'_> {
    fn centre(&self, p: SampledPath, s: f64) -> SampledPath {
        if self.centred {
            shift_samples(&p, s)
        } else {
            p
        }
    }

    fn var(&self, v: &Var) -> Result<SampledPath> {
        match v {
            Var::Time => {
                let g = self.base.grid();
                SampledPath::from_real_fn(g, |t| t)
            }
            Var::Coord(l) => self.coords.get(*l).cloned().ok_or_else(|| Error::UnboundVariable(v.to_string())),
            Var::Momentum(l) => self.momenta.get(*l).cloned().ok_or_else(|| Error::UnboundVariable(v.to_string())),
            Var::Composite(o) => Ok(self.centre(left_rl_deriv(self.base, FracOrder::new(o.0)?), 0.5 * o.0)),
        }
    }

    /// Evaluates `expr` at every grid point.
    pub fn eval(&self, expr: &Expr) -> Result<SampledPath> {
        let grid = self.base.grid();
        let constant = |z: Complex64| SampledPath::zeros(grid).map(|_| z);
        Ok(match expr {
            Expr::Num(z) => constant(*z),
            Expr::Param(p) => constant(*self.params.get(p).ok_or_else(|| Error::UnboundVariable(p.clone()))?),
            Expr::Var(v) => self.var(v)?,
            Expr::Neg(a) => self.eval(a)?.map(|z| -z),
            Expr::Func(f, a) => self.eval(a)?.map(|z| f.apply(z)),
            Expr::Add(a, b) => self.eval(a)?.zip_with(&self.eval(b)?, |x, y| x + y),
            Expr::Sub(a, b) => self.eval(a)?.zip_with(&self.eval(b)?, |x, y| x - y),
            Expr::Mul(a, b) => self.eval(a)?.zip_with(&self.eval(b)?, |x, y| x * y),
            Expr::Div(a, b) => {
                let d = self.eval(b)?;
                if d.values().iter().any(|z| *z == Complex64::new(0.0, 0.0)) {
                    return Err(Error::DivisionByZero);
                }
                self.eval(a)?.zip_with(&d, |x, y| x / y)
            }
            Expr::Pow(a, n) => self.eval(a)?.map(|z| z.powu(*n)),
            Expr::RightDeriv(o, a) => {
                let inner = self.eval(a)?;
                let order = FracOrder::new(*o)?;
                match self.convention {
                    Convention::Variational => self.centre(right_rl_deriv(&inner, order), -0.5 * o),
                    Convention::Riewe => {
                        let phase = unit_phase(*o);
                        self.centre(left_rl_deriv(&inner, order), 0.5 * o).map(|z| z * phase)
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parser::parse;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn examples() {
        let mut b = Bindings::new();
        b.insert(Var::Coord(1), c(3.0));
        assert_eq!(eval(&parse("2*q1").unwrap(), &b, &Params::new()).unwrap(), c(6.0));

        let pu = parse("0.5*(1+eps^2*w^2)*q1^2 - 0.5*w^2*q0^2 - 0.5*eps^2*q2^2").unwrap();
        let mut b = Bindings::new();
        b.insert(Var::Coord(0), c(1.0));
        b.insert(Var::Coord(1), c(0.0));
        b.insert(Var::Coord(2), c(0.0));
        let params: Params = [("w".to_string(), c(2.0)), ("eps".to_string(), c(0.1))].into();
        assert!((eval(&pu, &b, &params).unwrap() - c(-2.0)).norm() < 1e-15);

        let damp = parse("i*(g/2)*q1^2").unwrap();
        let mut b = Bindings::new();
        b.insert(Var::Coord(1), c(1.0));
        let params: Params = [("g".to_string(), c(2.0))].into();
        assert_eq!(eval(&damp, &b, &params).unwrap(), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn errors() {
        let e = parse("q0/q1").unwrap();
        let mut b = Bindings::new();
        b.insert(Var::Coord(0), c(1.0));
        assert!(matches!(eval(&e, &b, &Params::new()), Err(Error::UnboundVariable(_))));
        b.insert(Var::Coord(1), c(0.0));
        assert_eq!(eval(&e, &b, &Params::new()), Err(Error::DivisionByZero));
        assert!(matches!(eval(&parse("rd(0.5, q0)").unwrap(), &b, &Params::new()), Err(Error::NonLocal(_))));
        assert!(matches!(eval(&parse("k*q0").unwrap(), &b, &Params::new()), Err(Error::UnboundVariable(_))));
    }
}
