//! Symbolic partial derivatives and constant folding.

use num_complex::Complex64;

use super::ast::{Expr, Func, Var};

/// `d expr / d q<l>`, folded.
pub fn partial(expr: &Expr, l: usize) -> Expr {
    partial_var(expr, &Var::Coord(l))
}

/// Derivative with respect to any variable, folded.
pub fn partial_var(expr: &Expr, v: &Var) -> Expr {
    fold(&raw_partial(expr, v))
}

fn raw_partial(e: &Expr, v: &Var) -> Expr {
    if !e.contains_var(v) {
        return Expr::zero();
    }
    match e {
        Expr::Num(_) | Expr::Param(_) => Expr::zero(),
        Expr::Var(w) => {
            if w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => Expr::neg(raw_partial(a, v)),
        Expr::Add(a, b) => Expr::add(raw_partial(a, v), raw_partial(b, v)),
        Expr::Sub(a, b) => Expr::sub(raw_partial(a, v), raw_partial(b, v)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(raw_partial(a, v), (**b).clone()),
            Expr::mul((**a).clone(), raw_partial(b, v)),
        ),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(
                Expr::mul(raw_partial(a, v), (**b).clone()),
                Expr::mul((**a).clone(), raw_partial(b, v)),
            ),
            Expr::pow((**b).clone(), 2),
        ),
        Expr::Pow(a, n) => match n {
            0 => Expr::zero(),
            1 => raw_partial(a, v),
            _ => Expr::mul(
                Expr::mul(Expr::num(*n as f64), Expr::pow((**a).clone(), n - 1)),
                raw_partial(a, v),
            ),
        },
        Expr::Func(f, a) => {
            let outer = match f {
                Func::Sin => Expr::Func(Func::Cos, a.clone()),
                Func::Cos => Expr::neg(Expr::Func(Func::Sin, a.clone())),
                Func::Exp => e.clone(),
            };
            Expr::mul(outer, raw_partial(a, v))
        }
        // linear operator: differentiate under it
        Expr::RightDeriv(o, a) => Expr::right_deriv(*o, raw_partial(a, v)),
    }
}

/// Constant folding plus zero/one elimination.
///
/// Numeric factors of a product chain are multiplied together and moved to
/// the front; no other rewriting is done.
pub fn fold(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Param(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(a) => neg(fold(a)),
        Expr::Func(f, a) => {
            let a = fold(a);
            match a.as_num() {
                Some(z) => Expr::Num(f.apply(z)),
                None => Expr::Func(*f, Box::new(a)),
            }
        }
        Expr::RightDeriv(o, a) => {
            let a = fold(a);
            if *o == 0.0 {
                a
            } else if a.is_zero() {
                Expr::zero()
            } else {
                Expr::right_deriv(*o, a)
            }
        }
        Expr::Add(a, b) => {
            let (a, b) = (fold(a), fold(b));
            match (a.as_num(), b.as_num()) {
                (Some(x), Some(y)) => Expr::Num(x + y),
                _ if a.is_zero() => b,
                _ if b.is_zero() => a,
                _ => match b {
                    Expr::Neg(inner) => Expr::sub(a, *inner),
                    b => Expr::add(a, b),
                },
            }
        }
        Expr::Sub(a, b) => {
            let (a, b) = (fold(a), fold(b));
            match (a.as_num(), b.as_num()) {
                (Some(x), Some(y)) => Expr::Num(x - y),
                _ if b.is_zero() => a,
                _ if a.is_zero() => neg(b),
                _ => match b {
                    Expr::Neg(inner) => Expr::add(a, *inner),
                    b => Expr::sub(a, b),
                },
            }
        }
        Expr::Mul(..) => fold_product(e),
        Expr::Div(a, b) => {
            let (a, b) = (fold(a), fold(b));
            if b.is_one() {
                return a;
            }
            if a.is_zero() && !b.is_zero() {
                return Expr::zero();
            }
            match (a.as_num(), b.as_num()) {
                (Some(x), Some(y)) if y != Complex64::new(0.0, 0.0) => Expr::Num(x / y),
                _ => match (a, b.as_num()) {
                    // c*x / k -> (c/k)*x for numeric k
                    (a, Some(k)) if k != Complex64::new(0.0, 0.0) => {
                        fold_product(&Expr::mul(Expr::Num(Complex64::new(1.0, 0.0) / k), a))
                    }
                    (a, _) => Expr::div(a, b),
                },
            }
        }
        Expr::Pow(a, n) => {
            let a = fold(a);
            match (n, a.as_num()) {
                (0, _) => Expr::one(),
                (1, _) => a,
                (_, Some(z)) => Expr::Num(z.powu(*n)),
                _ => Expr::pow(a, *n),
            }
        }
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(z) => Expr::Num(-z),
        Expr::Neg(inner) => *inner,
        a => {
            // fold a leading numeric factor into the sign
            if let Expr::Mul(l, r) = &a {
                if let Some(z) = l.as_num() {
                    return with_coefficient(-z, (**r).clone());
                }
            }
            Expr::neg(a)
        }
    }
}

fn collect_factors(e: Expr, coef: &mut Complex64, out: &mut Vec<Expr>) {
    match e {
        Expr::Mul(a, b) => {
            collect_factors(*a, coef, out);
            collect_factors(*b, coef, out);
        }
        Expr::Num(z) => *coef *= z,
        Expr::Neg(a) => {
            *coef = -*coef;
            collect_factors(*a, coef, out);
        }
        other => out.push(other),
    }
}

fn fold_product(e: &Expr) -> Expr {
    let Expr::Mul(a, b) = e else {
        return fold(e);
    };
    let (a, b) = (fold(a), fold(b));
    let mut coef = Complex64::new(1.0, 0.0);
    let mut factors = Vec::new();
    collect_factors(a, &mut coef, &mut factors);
    collect_factors(b, &mut coef, &mut factors);
    if coef == Complex64::new(0.0, 0.0) {
        return Expr::zero();
    }
    let Some(rest) = factors.into_iter().reduce(Expr::mul) else {
        return Expr::Num(coef);
    };
    with_coefficient(coef, rest)
}

fn with_coefficient(coef: Complex64, rest: Expr) -> Expr {
    if coef == Complex64::new(1.0, 0.0) {
        rest
    } else if coef == Complex64::new(-1.0, 0.0) {
        Expr::neg(rest)
    } else if coef == Complex64::new(0.0, 0.0) {
        Expr::zero()
    } else {
        Expr::mul(Expr::Num(coef), rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parser::parse;

    #[test]
    fn square() {
        let e = parse("q1^2").unwrap();
        assert_eq!(partial(&e, 1), Expr::mul(Expr::num(2.0), Expr::q(1)));
        assert_eq!(partial(&e, 1).to_string(), "2*q1");
    }

    #[test]
    fn absent_variable_gives_zero_node() {
        let e = parse("sin(q0)*m + q2^3").unwrap();
        assert!(partial(&e, 1).is_zero());
    }

    #[test]
    fn pu_highest_partial() {
        let e = parse("0.5*(1+eps^2*w^2)*q1^2 - 0.5*w^2*q0^2 - 0.5*eps^2*q2^2").unwrap();
        assert_eq!(partial(&e, 2).to_string(), "-(eps^2*q2)");
        assert_eq!(partial(&e, 2), parse("-(eps^2*q2)").unwrap());
    }

    #[test]
    fn potential_partial() {
        let e = parse("0.5*m*q2^2 + i*(g/2)*q1^2 - 0.5*k*q0^2").unwrap();
        assert_eq!(partial(&e, 0), fold(&parse("-k*q0").unwrap()));
        assert_eq!(partial(&e, 0).to_string(), "-(k*q0)");
    }

    #[test]
    fn folding_rules() {
        assert_eq!(fold(&parse("0*q1 + 1*q2").unwrap()), Expr::q(2));
        assert_eq!(fold(&parse("q1^1 - 0").unwrap()), Expr::q(1));
        assert_eq!(fold(&parse("2*3").unwrap()), Expr::num(6.0));
        assert_eq!(fold(&parse("q0^0").unwrap()), Expr::one());
        assert_eq!(fold(&parse("--q0").unwrap()), Expr::q(0));
        assert_eq!(fold(&parse("0 - q0").unwrap()), Expr::neg(Expr::q(0)));
        assert_eq!(fold(&parse("rd(0, q1)").unwrap()), Expr::q(1));
        assert_eq!(fold(&parse("(2*q0)/4").unwrap()), Expr::mul(Expr::num(0.5), Expr::q(0)));
    }
}
