//! Lagrangians on an explicit ladder of fractional orders.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsl::{eval, fold, parse_with, partial, Bindings, Expr, ParseOptions, Params, Var};
use crate::error::{Error, Result};

/// Pais-Uhlenbeck oscillator: velocity term, potential and the acceleration-squared term.
pub const PAIS_UHLENBECK: &str = "0.5*(1+eps^2*w^2)*q1^2 - 0.5*w^2*q0^2 - 0.5*eps^2*q2^2";
/// Damped oscillator with a half-order coordinate, ladder {0, 1/2, 1}.
pub const DAMPED: &str = "0.5*m*q2^2 + i*(g/2)*q1^2 - 0.5*k*q0^2";
/// Harmonic oscillator on ladder {0, alpha}.
pub const HARMONIC: &str = "0.5*m*q1^2 - 0.5*k*q0^2";

/// How a right derivative acts on a left-derivative coordinate.
///
/// `Variational` keeps the genuine right RL operator (its discrete form is the
/// transpose of the left operator, so stationarity of the discrete action is
/// reproduced exactly). `Riewe` replaces `tD_b^beta aD_t^gamma x` by
/// `e^{i pi beta} aD_t^{beta+gamma} x`, which turns the half-order damped
/// Lagrangian into `m x'' + g x' + V'(x) = 0`.
///
/// Integer orders resolve identically under both: `tD_b^p = (-d/dt)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Variational,
    Riewe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSpec {
    alpha: f64,
    ladder: Vec<f64>,
    expr: Expr,
    params: Params,
    convention: Convention,
}

/// `[0, alpha, 2 alpha, ..., n alpha]`.
pub fn uniform_ladder(alpha: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 * alpha).collect()
}

impl LagrangianSpec {
    pub fn new(alpha: f64, ladder: Vec<f64>, expr: Expr, params: Params) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidLagrangian(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if ladder.len() < 2 {
            return Err(Error::InvalidLagrangian("ladder needs at least two orders".into()));
        }
        if ladder[0] != 0.0 {
            return Err(Error::InvalidLagrangian("ladder must start at order 0".into()));
        }
        if ladder.iter().any(|o| !o.is_finite()) || ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLagrangian(format!("ladder {ladder:?} is not strictly increasing")));
        }
        for v in expr.vars() {
            match v {
                Var::Time => {}
                Var::Coord(l) if l < ladder.len() => {}
                Var::Coord(l) => {
                    return Err(Error::IndexOutOfRange(format!("q{l} exceeds ladder of length {}", ladder.len())))
                }
                other => {
                    return Err(Error::InvalidLagrangian(format!("`{other}` may not appear in a Lagrangian")))
                }
            }
        }
        if expr.has_right_deriv() {
            return Err(Error::InvalidLagrangian("`rd(..)` may not appear in a Lagrangian".into()));
        }
        for p in expr.params() {
            if !params.contains_key(&p) {
                return Err(Error::UnboundVariable(p));
            }
        }
        Ok(Self { alpha, ladder, expr, params, convention: Convention::default() })
    }

    /// Parses `text` against the ladder and the given parameter names.
    pub fn from_text(text: &str, alpha: f64, ladder: Vec<f64>, params: Params) -> Result<Self> {
        let opts = ParseOptions::with_ladder(&ladder).params(params.keys().cloned());
        let expr = parse_with(text, &opts)?;
        Self::new(alpha, ladder, expr, params)
    }

    pub fn pais_uhlenbeck(alpha: f64, eps: f64, omega: f64) -> Result<Self> {
        let params = real_params(&[("eps", eps), ("w", omega)]);
        Self::from_text(PAIS_UHLENBECK, alpha, uniform_ladder(alpha, 2), params)
    }

    /// Half-order damped oscillator with `V = k q0^2 / 2`, under the Riewe convention.
    pub fn damped(mass: f64, gamma: f64, k: f64) -> Result<Self> {
        let params = real_params(&[("m", mass), ("g", gamma), ("k", k)]);
        Ok(Self::from_text(DAMPED, 0.5, vec![0.0, 0.5, 1.0], params)?.with_convention(Convention::Riewe))
    }

    pub fn harmonic(alpha: f64, mass: f64, k: f64) -> Result<Self> {
        let params = real_params(&[("m", mass), ("k", k)]);
        Self::from_text(HARMONIC, alpha, uniform_ladder(alpha, 1), params)
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    /// Same ladder and parameters, different expression.
    pub fn with_expr(&self, expr: Expr) -> Result<Self> {
        Ok(Self::new(self.alpha, self.ladder.clone(), expr, self.params.clone())?.with_convention(self.convention))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    /// Index of the highest coordinate, `n`.
    pub fn top(&self) -> usize {
        self.ladder.len() - 1
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Ladder index whose order equals `order`, if any.
    pub fn ladder_index(&self, order: f64) -> Option<usize> {
        self.ladder.iter().position(|&o| (o - order).abs() < 1e-12)
    }

    /// Boundary values required on each side: the number of integer derivative
    /// orders spanned by the ladder.
    pub fn boundary_count_per_side(&self) -> usize {
        let top = self.ladder[self.top()];
        ((top - 1e-12).ceil() as usize).max(1)
    }

    /// Second-order Taylor data around `q = 0`.
    pub fn quadratic_parts(&self) -> Result<QuadraticParts> {
        let n = self.ladder.len();
        let mut hessian = vec![vec![Expr::zero(); n]; n];
        let mut linear = Vec::with_capacity(n);
        let zero = Expr::zero();
        let at_origin = |e: &Expr| {
            let mut out = e.clone();
            for l in 0..n {
                out = out.substitute(&Var::Coord(l), &zero);
            }
            fold(&out)
        };
        for l in 0..n {
            let d = partial(&self.expr, l);
            for (lp, slot) in hessian[l].iter_mut().enumerate() {
                let h = partial(&d, lp);
                if h.depends_on_trajectory() {
                    return Err(Error::NonQuadratic(format!(
                        "d2L/dq{l}dq{lp} = {h} depends on the trajectory"
                    )));
                }
                *slot = h;
            }
            linear.push(at_origin(&d));
        }
        let constant = at_origin(&self.expr);
        let time_dependent = hessian.iter().flatten().chain(&linear).chain([&constant]).any(|e| e.contains_var(&Var::Time));
        Ok(QuadraticParts { hessian, linear, constant, time_dependent, params: self.params.clone() })
    }
}

pub(crate) fn real_params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), Complex64::new(*v, 0.0))).collect()
}

/// `L = constant + sum_l linear_l q_l + 1/2 sum_{l,l'} hessian_{l l'} q_l q_l'`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticParts {
    pub hessian: Vec<Vec<Expr>>,
    pub linear: Vec<Expr>,
    pub constant: Expr,
    pub time_dependent: bool,
    params: Params,
}

/// Numeric values of [`QuadraticParts`] at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticValues {
    pub hessian: Vec<Vec<Complex64>>,
    pub linear: Vec<Complex64>,
    pub constant: Complex64,
}

impl QuadraticParts {
    pub fn at(&self, t: f64) -> Result<QuadraticValues> {
        let mut b = Bindings::new();
        b.insert(Var::Time, Complex64::new(t, 0.0));
        let ev = |e: &Expr| eval(e, &b, &self.params);
        Ok(QuadraticValues {
            hessian: self
                .hessian
                .iter()
                .map(|row| row.iter().map(ev).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?,
            linear: self.linear.iter().map(ev).collect::<Result<_>>()?,
            constant: ev(&self.constant)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        let pu = LagrangianSpec::pais_uhlenbeck(1.0, 0.1, 1.0).unwrap();
        assert_eq!(pu.ladder(), &[0.0, 1.0, 2.0]);
        assert_eq!(pu.boundary_count_per_side(), 2);
        let d = LagrangianSpec::damped(1.0, 0.5, 4.0).unwrap();
        assert_eq!(d.convention(), Convention::Riewe);
        assert_eq!(d.boundary_count_per_side(), 1);
        let h = LagrangianSpec::harmonic(0.9, 1.0, 1.0).unwrap();
        assert_eq!(h.boundary_count_per_side(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        let params = real_params(&[("m", 1.0)]);
        assert!(LagrangianSpec::from_text("m*q2^2", 1.0, vec![0.0, 1.0], params.clone()).is_err());
        assert!(LagrangianSpec::from_text("k*q1^2", 1.0, vec![0.0, 1.0], params.clone()).is_err());
        assert!(LagrangianSpec::from_text("q1^2", 1.0, vec![0.0, 0.0], params.clone()).is_err());
        assert!(LagrangianSpec::from_text("q1^2", 1.0, vec![0.5, 1.0], params.clone()).is_err());
        assert!(LagrangianSpec::from_text("q1^2", 1.5, vec![0.0, 1.0], params.clone()).is_err());
        assert!(LagrangianSpec::from_text("p0*q1", 1.0, vec![0.0, 1.0], params.clone()).is_err());
        assert!(LagrangianSpec::from_text("rd(1, q1)", 1.0, vec![0.0, 1.0], params).is_err());
    }

    #[test]
    fn quadratic_parts_of_damped() {
        let d = LagrangianSpec::damped(2.0, 0.5, 4.0).unwrap();
        let parts = d.quadratic_parts().unwrap();
        assert!(!parts.time_dependent);
        let v = parts.at(0.0).unwrap();
        assert_eq!(v.hessian[0][0], Complex64::new(-4.0, 0.0));
        assert_eq!(v.hessian[1][1], Complex64::new(0.0, 0.5));
        assert_eq!(v.hessian[2][2], Complex64::new(2.0, 0.0));
        assert_eq!(v.hessian[0][2], Complex64::new(0.0, 0.0));
        assert!(v.linear.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn non_quadratic_detected() {
        let params = Params::new();
        let l = LagrangianSpec::from_text("q1^2*q0 + sin(q0)", 1.0, vec![0.0, 1.0], params).unwrap();
        assert!(matches!(l.quadratic_parts(), Err(Error::NonQuadratic(_))));
    }

    #[test]
    fn time_dependent_parts() {
        let l = LagrangianSpec::from_text("0.5*q1^2 + t*q0", 1.0, vec![0.0, 1.0], Params::new()).unwrap();
        let parts = l.quadratic_parts().unwrap();
        assert!(parts.time_dependent);
        assert_eq!(parts.at(2.0).unwrap().linear[0], Complex64::new(2.0, 0.0));
    }
}
