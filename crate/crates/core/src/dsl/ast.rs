use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// A fractional order used as a map key (ordered by `f64::total_cmp`).
#[derive(Debug, Clone, Copy)]
pub struct OrderKey(pub f64);

impl PartialEq for OrderKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for OrderKey {}

impl PartialOrd for OrderKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Variables of the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    /// `t`
    Time,
    /// `q<l>`: the ladder coordinate of order `ladder[l]`.
    Coord(usize),
    /// `p<l>`: the momentum conjugate to `q<l>`.
    Momentum(usize),
    /// `d(<order>)`: the left derivative of the trajectory of arbitrary total order.
    Composite(OrderKey),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Time => write!(f, "t"),
            Var::Coord(l) => write!(f, "q{l}"),
            Var::Momentum(l) => write!(f, "p{l}"),
            Var::Composite(o) => write!(f, "d({})", o.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Exp => z.exp(),
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Param(String),
    Var(Var),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    /// `rd(order, arg)`: right RL derivative (upper limit b) applied to `arg`.
    RightDeriv(f64, Box<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(Complex64::new(x, 0.0))
    }

    pub fn complex(z: Complex64) -> Self {
        Expr::Num(z)
    }

    pub fn zero() -> Self {
        Expr::num(0.0)
    }

    pub fn one() -> Self {
        Expr::num(1.0)
    }

    pub fn param(name: &str) -> Self {
        Expr::Param(name.to_string())
    }

    pub fn q(l: usize) -> Self {
        Expr::Var(Var::Coord(l))
    }

    pub fn p(l: usize) -> Self {
        Expr::Var(Var::Momentum(l))
    }

    pub fn composite(order: f64) -> Self {
        Expr::Var(Var::Composite(OrderKey(order)))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Self {
        Expr::Neg(Box::new(a))
    }

    pub fn pow(a: Expr, n: u32) -> Self {
        Expr::Pow(Box::new(a), n)
    }

    pub fn right_deriv(order: f64, a: Expr) -> Self {
        Expr::RightDeriv(order, Box::new(a))
    }

    pub fn as_num(&self) -> Option<Complex64> {
        match self {
            Expr::Num(z) => Some(*z),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_num() == Some(Complex64::new(1.0, 0.0))
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Param(_) | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) | Expr::RightDeriv(_, a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(*v);
            }
        });
        out
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let Expr::Var(w) = e {
                found |= w == v;
            }
        });
        found
    }

    /// True if any trajectory-dependent variable (coordinate, momentum, composite) occurs.
    pub fn depends_on_trajectory(&self) -> bool {
        self.vars().iter().any(|v| !matches!(v, Var::Time)) || self.has_right_deriv()
    }

    pub fn has_right_deriv(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::RightDeriv(..)));
        found
    }

    /// Replaces every occurrence of `v` by `with`.
    pub fn substitute(&self, v: &Var, with: &Expr) -> Expr {
        match self {
            Expr::Var(w) if w == v => with.clone(),
            Expr::Num(_) | Expr::Param(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::neg(a.substitute(v, with)),
            Expr::Func(f, a) => Expr::Func(*f, Box::new(a.substitute(v, with))),
            Expr::Pow(a, n) => Expr::pow(a.substitute(v, with), *n),
            Expr::RightDeriv(o, a) => Expr::right_deriv(*o, a.substitute(v, with)),
            Expr::Add(a, b) => Expr::add(a.substitute(v, with), b.substitute(v, with)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(v, with), b.substitute(v, with)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(v, with), b.substitute(v, with)),
            Expr::Div(a, b) => Expr::div(a.substitute(v, with), b.substitute(v, with)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        write!(f, "{}", x as i64)
    } else {
        write!(f, "{x}")
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, z: Complex64) -> fmt::Result {
    let (re, im) = (z.re, z.im);
    if im == 0.0 {
        if re < 0.0 || (re == 0.0 && re.is_sign_negative()) {
            write!(f, "(-")?;
            write_real(f, -re)?;
            write!(f, ")")
        } else {
            write_real(f, re)
        }
    } else if re == 0.0 {
        if im == 1.0 {
            write!(f, "i")
        } else if im == -1.0 {
            write!(f, "(-i)")
        } else if im < 0.0 {
            write!(f, "(-")?;
            write_real(f, -im)?;
            write!(f, "*i)")
        } else {
            write!(f, "(")?;
            write_real(f, im)?;
            write!(f, "*i)")
        }
    } else {
        write!(f, "(")?;
        write_real(f, re)?;
        if im < 0.0 {
            write!(f, " - ")?;
            write_real(f, -im)?;
        } else {
            write!(f, " + ")?;
            write_real(f, im)?;
        }
        write!(f, "*i)")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints in the DSL grammar; the output parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(z) => write_num(f, *z),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
            Expr::RightDeriv(o, a) => write!(f, "rd({o}, {a})"),
            Expr::Pow(a, n) => {
                write_child(f, a, 5)?;
                write!(f, "^{n}")
            }
            Expr::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 3)
            }
        }
    }
}
