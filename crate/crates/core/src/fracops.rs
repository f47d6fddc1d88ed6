//! Discrete Riemann-Liouville derivatives on uniform grids.
//!
//! Both operators use first-order Grünwald-Letnikov weights
//! `w[k] = (-1)^k binom(alpha, k)`:
//!
//! - left (lower limit `a`): `D f(t_i) = dt^-alpha * sum_{k=0..i} w[k] f[i-k]`
//! - right (upper limit `b`): `D f(t_i) = dt^-alpha * sum_{k=0..n-1-i} w[k] f[i+k]`
//!
//! With this orientation the right operator of order 1 is `-d/dt`, so
//! `f(t) = b - t` maps to the constant 1.
//!
//! Samples whose sum has fewer than four terms are flagged as low accuracy.
//! They are still returned.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma, recip_gamma};

/// Sums with fewer terms than this are flagged. Orders above 3 also flag
/// every sample whose stencil is cut off by the boundary.
pub const MIN_ACCURATE_TERMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    a: f64,
    b: f64,
    n: usize,
}

impl UniformGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if b <= a {
            return Err(Error::InvalidGrid(format!("need b > a, got a = {a}, b = {b}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.t(i)).collect()
    }
}

/// Order `m + frac` with `m` a non-negative integer and `0 <= frac < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    total: f64,
    whole: u32,
    frac: f64,
}

impl FracOrder {
    pub fn new(total: f64) -> Result<Self> {
        if !total.is_finite() || total < 0.0 {
            return Err(Error::Domain(format!("fractional order must be finite and >= 0, got {total}")));
        }
        let whole = total.floor();
        Ok(Self { total, whole: whole as u32, frac: total - whole })
    }

    pub fn zero() -> Self {
        Self { total: 0.0, whole: 0, frac: 0.0 }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn whole(&self) -> u32 {
        self.whole
    }

    pub fn frac(&self) -> f64 {
        self.frac
    }

    pub fn is_integer(&self) -> bool {
        self.frac == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GLWeights {
    pub order: FracOrder,
    pub w: Vec<f64>,
}

impl GLWeights {
    /// Index of the last non-zero weight, if the order is an integer.
    pub fn support(&self) -> usize {
        if self.order.is_integer() {
            (self.order.whole() as usize + 1).min(self.w.len())
        } else {
            self.w.len()
        }
    }
}

/// Grünwald-Letnikov coefficients `w[k] = w[k-1] (k - 1 - alpha) / k`.
pub fn gl_weights(order: FracOrder, count: usize) -> GLWeights {
    let alpha = order.total();
    let mut w = Vec::with_capacity(count.max(1));
    w.push(1.0);
    for k in 1..count {
        let prev = w[k - 1];
        w.push(prev * ((k as f64 - 1.0 - alpha) / k as f64));
    }
    w.truncate(count.max(1));
    GLWeights { order, w }
}

/// Counts of low-accuracy samples at each end of a path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFlags {
    pub head: usize,
    pub tail: usize,
}

impl BoundaryFlags {
    pub fn union(self, other: Self) -> Self {
        Self { head: self.head.max(other.head), tail: self.tail.max(other.tail) }
    }
}

/// Complex samples of a function on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: UniformGrid,
    values: Vec<Complex64>,
    flags: BoundaryFlags,
}

impl SampledPath {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "path has {} samples but the grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, values, flags: BoundaryFlags::default() })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.times().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()], flags: BoundaryFlags::default() }
    }

    /// Builds a path without the finiteness check; for internal arithmetic.
    pub(crate) fn from_parts(grid: UniformGrid, values: Vec<Complex64>, flags: BoundaryFlags) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, flags }
    }

    pub fn grid(&self) -> UniformGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn flags(&self) -> BoundaryFlags {
        self.flags
    }

    pub fn with_flags(mut self, flags: BoundaryFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn is_low_accuracy(&self, i: usize) -> bool {
        i < self.flags.head || i + self.flags.tail >= self.values.len()
    }

    /// Indices not flagged as low accuracy.
    pub fn reliable_range(&self) -> std::ops::Range<usize> {
        let n = self.values.len();
        self.flags.head.min(n)..n.saturating_sub(self.flags.tail).max(self.flags.head.min(n))
    }

    /// All entries finite (checked again after arithmetic).
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.flags)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "paths on different grids");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::from_parts(self.grid, values, self.flags.union(other.flags))
    }

    /// Maximum modulus over the reliable interior.
    pub fn max_abs_reliable(&self) -> f64 {
        self.values[self.reliable_range()].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Left RL derivative with lower limit `a`.
pub fn left_rl_deriv(path: &SampledPath, order: FracOrder) -> SampledPath {
    if order.total() == 0.0 {
        return path.clone();
    }
    let n = path.values.len();
    let weights = gl_weights(order, n);
    let support = weights.support();
    let scale = path.grid.dt().powf(-order.total());
    let v = &path.values;
    let out = (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=i.min(support - 1) {
                acc += v[i - k] * weights.w[k];
            }
            acc * scale
        })
        .collect();
    let head = (MIN_ACCURATE_TERMS - 1).max(order.total().ceil() as usize);
    let flags = BoundaryFlags { head: path.flags.head.max(head), tail: path.flags.tail };
    SampledPath::from_parts(path.grid, out, flags)
}

/// Right RL derivative with upper limit `b`, in the orientation where order 1 is `-d/dt`.
pub fn right_rl_deriv(path: &SampledPath, order: FracOrder) -> SampledPath {
    if order.total() == 0.0 {
        return path.clone();
    }
    let n = path.values.len();
    let weights = gl_weights(order, n);
    let support = weights.support();
    let scale = path.grid.dt().powf(-order.total());
    let v = &path.values;
    let out = (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=(n - 1 - i).min(support - 1) {
                acc += v[i + k] * weights.w[k];
            }
            acc * scale
        })
        .collect();
    let tail = (MIN_ACCURATE_TERMS - 1).max(order.total().ceil() as usize);
    let flags = BoundaryFlags { head: path.flags.head, tail: path.flags.tail.max(tail) };
    SampledPath::from_parts(path.grid, out, flags)
}

/// Samples at `t_i + s dt` by linear interpolation between neighbours.
///
/// Entries whose interpolation point leaves the grid take the end value and
/// are flagged.
pub fn shift_samples(path: &SampledPath, s: f64) -> SampledPath {
    if s == 0.0 {
        return path.clone();
    }
    let n = path.values.len();
    let v = &path.values;
    let out = (0..n)
        .map(|i| {
            let p = (i as f64 + s).clamp(0.0, (n - 1) as f64);
            let j = (p.floor() as usize).min(n.saturating_sub(2));
            let f = p - j as f64;
            v[j] * (1.0 - f) + v[(j + 1).min(n - 1)] * f
        })
        .collect();
    let reach = s.abs().ceil() as usize;
    let mut flags = path.flags;
    if s > 0.0 {
        flags.tail += reach;
    } else {
        flags.head += reach;
    }
    SampledPath::from_parts(path.grid, out, flags)
}

/// RL derivative of `s^beta`: `Gamma(beta+1)/Gamma(beta-alpha+1) s^(beta-alpha)`.
///
/// Exactly zero when `beta - alpha + 1` is a pole of Gamma.
pub fn rl_power_rule(beta: f64, order: FracOrder, s: f64) -> Result<Complex64> {
    if beta <= -1.0 {
        return Err(Error::Domain(format!("power rule needs beta > -1, got {beta}")));
    }
    if s <= 0.0 {
        return Err(Error::Domain(format!("power rule needs s > 0, got {s}")));
    }
    let alpha = order.total();
    let denom = recip_gamma(beta - alpha + 1.0);
    if denom == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::new(gamma(beta + 1.0) * denom * s.powf(beta - alpha), 0.0))
}
