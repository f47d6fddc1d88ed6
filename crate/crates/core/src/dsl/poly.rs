//! Canonical Laurent-polynomial form of expressions.
//!
//! Parameters and variables are treated as independent symbols; function
//! calls, `rd(..)` nodes and multi-term denominators become opaque atoms keyed
//! by their canonical text. Two expressions with equal canonical forms are
//! algebraically equal as polynomials.

use num_complex::Complex64;
use std::collections::BTreeMap;

use super::ast::{Expr, Var};
use super::parser::parse;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Param(String),
    Var(Var),
    Opaque(String),
}

/// Sorted `(atom, exponent)` pairs with non-zero exponents.
pub type Monomial = Vec<(Atom, i32)>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Complex64>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: BTreeMap<Atom, i32> = a.iter().cloned().collect();
    for (atom, k) in b {
        *out.entry(atom.clone()).or_insert(0) += k;
    }
    out.into_iter().filter(|(_, k)| *k != 0).collect()
}

impl Poly {
    pub fn constant(z: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if z != Complex64::new(0.0, 0.0) {
            terms.insert(Vec::new(), z);
        }
        Self { terms }
    }

    pub fn atom(a: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(a, 1)], Complex64::new(1.0, 0.0));
        Self { terms }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: Complex64) {
        let entry = self.terms.entry(m.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Inverse of a single-term polynomial.
    fn invert_monomial(&self) -> Option<Poly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        let inv: Monomial = m.iter().map(|(a, k)| (a.clone(), -k)).collect();
        let mut out = Poly::default();
        out.add_term(inv, Complex64::new(1.0, 0.0) / c);
        Some(out)
    }

    pub fn from_expr(e: &Expr) -> Poly {
        match e {
            Expr::Num(z) => Poly::constant(*z),
            Expr::Param(p) => Poly::atom(Atom::Param(p.clone())),
            Expr::Var(v) => Poly::atom(Atom::Var(*v)),
            Expr::Neg(a) => Poly::from_expr(a).scale(Complex64::new(-1.0, 0.0)),
            Expr::Add(a, b) => Poly::from_expr(a).add(&Poly::from_expr(b)),
            Expr::Sub(a, b) => Poly::from_expr(a).sub(&Poly::from_expr(b)),
            Expr::Mul(a, b) => Poly::from_expr(a).mul(&Poly::from_expr(b)),
            Expr::Pow(a, n) => Poly::from_expr(a).pow(*n),
            Expr::Div(a, b) => {
                let num = Poly::from_expr(a);
                let den = Poly::from_expr(b);
                match den.invert_monomial() {
                    Some(inv) => num.mul(&inv),
                    None => {
                        let key = format!("({})", den.to_expr());
                        num.mul(&Poly { terms: [(vec![(Atom::Opaque(key), -1)], Complex64::new(1.0, 0.0))].into() })
                    }
                }
            }
            Expr::Func(f, a) => Poly::atom(Atom::Opaque(format!("{}({})", f.name(), Poly::from_expr(a).to_expr()))),
            Expr::RightDeriv(o, a) => {
                Poly::atom(Atom::Opaque(format!("rd({o}, {})", Poly::from_expr(a).to_expr())))
            }
        }
    }

    /// Equal up to `tol` relative to the largest coefficient.
    pub fn approx_eq(&self, other: &Poly, tol: f64) -> bool {
        let diff = self.sub(other);
        let scale = self
            .terms
            .values()
            .chain(other.terms.values())
            .map(|c| c.norm())
            .fold(1.0, f64::max);
        diff.terms.values().all(|c| c.norm() <= tol * scale)
    }

    /// Sum-of-monomials expression; negative exponents go to a denominator.
    pub fn to_expr(&self) -> Expr {
        let mut out: Option<Expr> = None;
        for (m, &c) in &self.terms {
            let negative = c.im == 0.0 && c.re < 0.0;
            let mag = if negative { -c } else { c };
            let mut num: Option<Expr> = None;
            let mut den: Option<Expr> = None;
            for (atom, k) in m {
                let base = match atom {
                    Atom::Param(p) => Expr::Param(p.clone()),
                    Atom::Var(v) => Expr::Var(*v),
                    Atom::Opaque(s) => parse(s).unwrap_or_else(|_| Expr::Param(s.clone())),
                };
                let factor = if k.unsigned_abs() == 1 { base } else { Expr::pow(base, k.unsigned_abs()) };
                let slot = if *k > 0 { &mut num } else { &mut den };
                *slot = Some(match slot.take() {
                    Some(prev) => Expr::mul(prev, factor),
                    None => factor,
                });
            }
            let mut term = match num {
                Some(n) if mag == Complex64::new(1.0, 0.0) => n,
                Some(n) => Expr::mul(Expr::Num(mag), n),
                None => Expr::Num(mag),
            };
            if let Some(d) = den {
                term = Expr::div(term, d);
            }
            out = Some(match out {
                None if negative => Expr::neg(term),
                None => term,
                Some(prev) if negative => Expr::sub(prev, term),
                Some(prev) => Expr::add(prev, term),
            });
        }
        out.unwrap_or_else(Expr::zero)
    }

    /// Splits into `sum_v coef_v * v + constant + nonlinear` over trajectory variables.
    ///
    /// A coefficient may contain parameters only; any term that involves time,
    /// an opaque atom or more than one trajectory factor goes to `nonlinear`.
    pub fn linear_decomposition(&self) -> LinearParts {
        let mut parts = LinearParts::default();
        for (m, &c) in &self.terms {
            let mut traj: Vec<(Var, i32)> = Vec::new();
            let mut other = false;
            let mut coef: Monomial = Vec::new();
            for (atom, k) in m {
                match atom {
                    Atom::Var(Var::Time) | Atom::Opaque(_) => other = true,
                    Atom::Var(v) => traj.push((*v, *k)),
                    Atom::Param(_) => coef.push((atom.clone(), *k)),
                }
            }
            let mut single = Poly::default();
            single.add_term(m.clone(), c);
            if other {
                parts.nonlinear = parts.nonlinear.add(&single);
                continue;
            }
            match traj.as_slice() {
                [] => parts.constant = parts.constant.add(&single),
                [(v, 1)] => {
                    let mut cp = Poly::default();
                    cp.add_term(coef, c);
                    let slot = parts.linear.entry(*v).or_default();
                    *slot = slot.add(&cp);
                }
                _ => parts.nonlinear = parts.nonlinear.add(&single),
            }
        }
        parts
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearParts {
    pub linear: BTreeMap<Var, Poly>,
    pub constant: Poly,
    pub nonlinear: Poly,
}

/// Canonical forms of `a` and `b` agree to `tol`.
pub fn same_polynomial(a: &Expr, b: &Expr, tol: f64) -> bool {
    Poly::from_expr(a).approx_eq(&Poly::from_expr(b), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::from_expr(&parse(s).unwrap())
    }

    #[test]
    fn expansion_matches() {
        assert!(p("(a + b)^2").approx_eq(&p("a^2 + 2*a*b + b^2"), 1e-15));
        assert!(p("0.5*(1+eps^2*w^2)*q1^2").approx_eq(&p("0.5*q1^2 + 0.5*eps^2*w^2*q1^2"), 1e-15));
        assert!(p("p1^2/eps^2").approx_eq(&p("p1*p1/(eps*eps)"), 1e-15));
        assert!(!p("q0").approx_eq(&p("q1"), 1e-12));
    }

    #[test]
    fn to_expr_round_trips() {
        for s in ["0.5*w^2*q0^2 - p1^2/eps^2 + p0*q1", "i*g*q1 + m*d(1.5)", "-(k*q0)", "3", "sin(q0)*2"] {
            let poly = p(s);
            let back = Poly::from_expr(&poly.to_expr());
            assert!(back.approx_eq(&poly, 1e-15), "{s} -> {}", poly.to_expr());
            let reparsed = Poly::from_expr(&parse(&poly.to_expr().to_string()).unwrap());
            assert!(reparsed.approx_eq(&poly, 1e-15));
        }
    }

    #[test]
    fn opaque_denominators() {
        assert!(!p("q0/(1+q1)").approx_eq(&p("2*q0/(2+2*q1)*1"), 1e-15));
        assert!(p("q0/(1+q1)").approx_eq(&p("q0*(1/(q1+1))"), 1e-15));
    }

    #[test]
    fn linear_split() {
        let parts = p("-eps^2*q2 + 3*q1 + k + q0*q1 + t*q0").linear_decomposition();
        assert_eq!(parts.linear.len(), 2);
        assert!(parts.linear[&Var::Coord(1)].approx_eq(&p("3"), 0.0));
        assert!(parts.linear[&Var::Coord(2)].approx_eq(&p("-eps^2"), 0.0));
        assert!(parts.constant.approx_eq(&p("k"), 0.0));
        assert!(parts.nonlinear.approx_eq(&p("q0*q1 + t*q0"), 0.0));
    }
}
