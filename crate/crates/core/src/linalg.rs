//! Banded and dense complex matrices with LU factorisations.
//!
//! Banded storage keeps integer-order systems at O(N) memory; dense matrices
//! hold real and imaginary parts separately so purely real systems factor on
//! the `f64` path.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![ZERO; n * (kl + ku + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            ZERO
        }
    }

    /// Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band ({}, {})", self.kl, self.ku);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Columns `i - kl ..= i + ku` clipped to the matrix.
    pub fn row_range(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1)
    }

    pub fn widened(&self, kl: usize, ku: usize) -> Self {
        let mut out = Self::zeros(self.n, kl.max(self.kl), ku.max(self.ku));
        for i in 0..self.n {
            for j in self.row_range(i) {
                out.add(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in self.row_range(i) {
                out.add(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn lu(&self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        // row slot r holds columns r - kl ..= r + kl + ku
        let w = 2 * kl + ku + 1;
        let mut a = vec![ZERO; n * w];
        let at = |r: usize, j: usize| r * w + (j + kl - r);
        for i in 0..n {
            for j in self.row_range(i) {
                a[at(i, j)] = self.get(i, j);
            }
        }
        let mut piv = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = a[at(k, k)].norm();
            for i in k + 1..=last_row {
                let v = a[at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in k..=last_col {
                    a.swap(at(k, j), at(p, j));
                }
            }
            let d = a[at(k, k)];
            for i in k + 1..=last_row {
                let m = a[at(i, k)] / d;
                a[at(i, k)] = m;
                if m != ZERO {
                    for j in k + 1..=last_col {
                        let u = a[at(k, j)];
                        a[at(i, j)] -= m * u;
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, w, a, piv })
    }

    /// Positive definiteness of a real symmetric band matrix, by Cholesky.
    pub fn is_positive_definite(&self) -> bool {
        let b = self.kl.max(self.ku);
        let mut m = self.widened(b, b);
        for k in 0..self.n {
            let d = m.get(k, k);
            if d.im.abs() > 1e-12 * d.re.abs() || d.re <= 0.0 {
                return false;
            }
            let last = (k + b).min(self.n - 1);
            for i in k + 1..=last {
                let f = m.get(i, k) / d;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..=last {
                    let u = m.get(k, j);
                    m.add(i, j, -f * u);
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    a: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn at(&self, r: usize, j: usize) -> Complex64 {
        self.a[r * self.w + (j + self.kl - r)]
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                x[i] -= self.at(i, k) * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                s -= self.at(i, j) * x[j];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }

    fn pivots(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n).map(|i| self.at(i, i))
    }

    fn swaps(&self) -> usize {
        self.piv.iter().enumerate().filter(|(k, p)| *k != **p).count()
    }
}

/// Dense square matrix stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    re: Mat<f64>,
    im: Option<Mat<f64>>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { re: Mat::zeros(n, n), im: None }
    }

    pub fn from_real(re: Mat<f64>) -> Self {
        assert_eq!(re.nrows(), re.ncols());
        Self { re, im: None }
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im.as_ref().map_or(0.0, |m| m[(i, j)]))
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        self.re[(i, j)] += v.re;
        if v.im != 0.0 {
            let n = self.dim();
            self.im.get_or_insert_with(|| Mat::zeros(n, n))[(i, j)] += v.im;
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    pub fn real_part(&self) -> &Mat<f64> {
        &self.re
    }

    fn complex(&self) -> Mat<c64> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn lu(&self) -> Result<DenseLu> {
        let lu = match &self.im {
            None => DenseLu::Real(self.re.partial_piv_lu()),
            Some(_) => DenseLu::Complex(self.complex().partial_piv_lu()),
        };
        if lu.pivots().any(|p| p == ZERO || !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::Singular("zero pivot in dense LU".into()));
        }
        Ok(lu)
    }

    pub fn is_positive_definite(&self) -> bool {
        if self.im.as_ref().is_some_and(|m| m.norm_max() > 1e-12 * self.re.norm_max()) {
            return false;
        }
        self.re.llt(Side::Lower).is_ok()
    }
}

pub enum DenseLu {
    Real(PartialPivLu<f64>),
    Complex(PartialPivLu<c64>),
}

impl DenseLu {
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = rhs.len();
        match self {
            DenseLu::Real(lu) => {
                let mut b = Mat::from_fn(n, 2, |i, j| if j == 0 { rhs[i].re } else { rhs[i].im });
                lu.solve_in_place(b.as_mut());
                (0..n).map(|i| Complex64::new(b[(i, 0)], b[(i, 1)])).collect()
            }
            DenseLu::Complex(lu) => {
                let mut b = Mat::from_fn(n, 1, |i, _| rhs[i]);
                lu.solve_in_place(b.as_mut());
                (0..n).map(|i| b[(i, 0)]).collect()
            }
        }
    }

    fn pivots(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        match self {
            DenseLu::Real(lu) => {
                let u = lu.U();
                Box::new((0..u.nrows()).map(move |i| Complex64::new(u[(i, i)], 0.0)))
            }
            DenseLu::Complex(lu) => {
                let u = lu.U();
                Box::new((0..u.nrows()).map(move |i| u[(i, i)]))
            }
        }
    }

    fn perm_parity_odd(&self) -> bool {
        let fwd = match self {
            DenseLu::Real(lu) => lu.P().arrays().0.to_vec(),
            DenseLu::Complex(lu) => lu.P().arrays().0.to_vec(),
        };
        permutation_is_odd(&fwd)
    }
}

fn permutation_is_odd(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    let mut transpositions = 0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        transpositions += len - 1;
    }
    transpositions % 2 == 1
}

/// A square system in whichever storage suits its structure.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemMatrix {
    Band(BandMatrix),
    Dense(DenseMatrix),
}

impl SystemMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SystemMatrix::Band(m) => m.dim(),
            SystemMatrix::Dense(m) => m.dim(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            SystemMatrix::Band(m) => m.get(i, j),
            SystemMatrix::Dense(m) => m.get(i, j),
        }
    }

    /// Adds `v` at `(i, j)`, widening or densifying storage if needed.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        if v == ZERO {
            return;
        }
        if let SystemMatrix::Band(m) = self {
            if !m.in_band(i, j) {
                let (kl, ku) = m.bandwidths();
                let (kl, ku) = (kl.max(i.saturating_sub(j)), ku.max(j.saturating_sub(i)));
                *self = if 4 * (kl + ku) > m.dim() {
                    SystemMatrix::Dense(m.to_dense())
                } else {
                    SystemMatrix::Band(m.widened(kl, ku))
                };
            }
        }
        match self {
            SystemMatrix::Band(m) => m.add(i, j, v),
            SystemMatrix::Dense(m) => m.add(i, j, v),
        }
    }

    /// Column indices that may hold non-zeros in row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        match self {
            SystemMatrix::Band(m) => m.row_range(i),
            SystemMatrix::Dense(m) => 0..=m.dim() - 1,
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        match self {
            SystemMatrix::Band(m) => (0..m.dim())
                .map(|i| m.row_range(i).map(|j| m.get(i, j) * x[j]).sum())
                .collect(),
            SystemMatrix::Dense(m) => {
                let n = m.dim();
                let mut out = vec![ZERO; n];
                for j in 0..n {
                    let xj = x[j];
                    if xj == ZERO {
                        continue;
                    }
                    let col = m.re.col(j);
                    for i in 0..n {
                        out[i] += xj * col[i];
                    }
                    if let Some(im) = &m.im {
                        let col = im.col(j);
                        let ix = Complex64::new(0.0, 1.0) * xj;
                        for i in 0..n {
                            out[i] += ix * col[i];
                        }
                    }
                }
                out
            }
        }
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in self.row_range(i) {
                if j > i {
                    worst = worst.max((self.get(i, j) - self.get(j, i)).norm());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.dim())
            .flat_map(|i| self.row_range(i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces `A` by `(A + A^T) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.dim();
        for i in 0..n {
            for j in self.row_range(i) {
                if j > i {
                    let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                    let (dij, dji) = (avg - self.get(i, j), avg - self.get(j, i));
                    self.add(i, j, dij);
                    self.add(j, i, dji);
                }
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            SystemMatrix::Band(m) => m.data.iter().all(|z| z.im == 0.0),
            SystemMatrix::Dense(m) => m.is_real(),
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        match self {
            SystemMatrix::Band(m) => m.is_positive_definite(),
            SystemMatrix::Dense(m) => m.is_positive_definite(),
        }
    }

    pub fn lu(&self) -> Result<Factorization> {
        Ok(match self {
            SystemMatrix::Band(m) => Factorization::Band(m.lu()?),
            SystemMatrix::Dense(m) => Factorization::Dense(m.lu()?),
        })
    }
}

pub enum Factorization {
    Band(BandLu),
    Dense(DenseLu),
}

impl Factorization {
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        match self {
            Factorization::Band(f) => f.solve(rhs),
            Factorization::Dense(f) => f.solve(rhs),
        }
    }

    fn pivots(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        match self {
            Factorization::Band(f) => Box::new(f.pivots()),
            Factorization::Dense(f) => f.pivots(),
        }
    }

    /// `min |u_ii| / max |u_ii|`; tiny values signal a (near-)singular matrix.
    pub fn pivot_ratio(&self) -> f64 {
        let (lo, hi) = self
            .pivots()
            .map(|p| p.norm())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    /// `log |det A|`.
    pub fn log_abs_det(&self) -> f64 {
        self.pivots().map(|p| p.norm().ln()).sum()
    }

    /// `det A / |det A|`.
    pub fn det_phase(&self) -> Complex64 {
        let odd = match self {
            Factorization::Band(f) => f.swaps() % 2 == 1,
            Factorization::Dense(f) => f.perm_parity_odd(),
        };
        let mut phase = Complex64::new(if odd { -1.0 } else { 1.0 }, 0.0);
        for p in self.pivots() {
            phase *= p / p.norm();
            phase /= phase.norm();
        }
        phase
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn tridiag(n: usize, d: f64, o: f64) -> BandMatrix {
        let mut m = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.add(i, i, c(d));
            if i + 1 < n {
                m.add(i, i + 1, c(o));
                m.add(i + 1, i, c(o));
            }
        }
        m
    }

    #[test]
    fn band_matches_dense() {
        let n = 9;
        let mut m = BandMatrix::zeros(n, 2, 1);
        for i in 0..n {
            for j in m.row_range(i) {
                let v = Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + j) % 3) as f64 * 0.5);
                m.add(i, j, v);
            }
        }
        m.add(0, 0, c(0.0));
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let band = SystemMatrix::Band(m.clone());
        let dense = SystemMatrix::Dense(m.to_dense());
        let b = band.matvec(&x);
        assert_eq!(b, dense.matvec(&x));
        for sys in [&band, &dense] {
            let f = sys.lu().unwrap();
            let y = f.solve(&b);
            for (u, v) in y.iter().zip(&x) {
                assert!((u - v).norm() < 1e-10);
            }
        }
        let (fb, fd) = (band.lu().unwrap(), dense.lu().unwrap());
        assert!((fb.log_abs_det() - fd.log_abs_det()).abs() < 1e-10);
        assert!((fb.det_phase() - fd.det_phase()).norm() < 1e-10);
    }

    #[test]
    fn determinant_sign() {
        let mut m = DenseMatrix::zeros(2);
        m.add(0, 1, c(1.0));
        m.add(1, 0, c(1.0));
        let f = SystemMatrix::Dense(m).lu().unwrap();
        assert!((f.det_phase() - c(-1.0)).norm() < 1e-15);
        assert!(f.log_abs_det().abs() < 1e-15);
    }

    #[test]
    fn tridiagonal_log_det() {
        // det of tridiag(-1, 2, -1) of size n is n + 1
        let f = SystemMatrix::Band(tridiag(50, 2.0, -1.0)).lu().unwrap();
        assert!((f.log_abs_det() - 51f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.add(0, 0, c(1.0));
        m.add(1, 1, c(1.0));
        assert!(matches!(m.lu(), Err(Error::Singular(_))));
        let f = SystemMatrix::Band(tridiag(4, 1.0, 1.0)).lu().unwrap();
        assert!(f.pivot_ratio() > 0.0);
    }

    #[test]
    fn positive_definite() {
        assert!(SystemMatrix::Band(tridiag(10, 2.0, -1.0)).is_positive_definite());
        assert!(!SystemMatrix::Band(tridiag(10, 1.0, -1.0)).is_positive_definite());
        assert!(SystemMatrix::Dense(tridiag(10, 2.0, -1.0).to_dense()).is_positive_definite());
        assert!(!SystemMatrix::Dense(tridiag(10, -2.0, 0.0).to_dense()).is_positive_definite());
    }

    #[test]
    fn add_outside_band_widens() {
        let mut s = SystemMatrix::Band(tridiag(40, 2.0, -1.0));
        s.add(0, 3, c(1.0));
        assert!(matches!(&s, SystemMatrix::Band(m) if m.bandwidths() == (1, 3)));
        s.add(39, 0, c(1.0));
        assert!(matches!(s, SystemMatrix::Dense(_)));
    }

    #[test]
    fn symmetrize_averages() {
        let mut s = SystemMatrix::Band(tridiag(5, 2.0, -1.0));
        s.add(0, 1, c(0.5));
        assert!(s.asymmetry() > 0.4);
        s.symmetrize();
        assert_eq!(s.asymmetry(), 0.0);
        assert_eq!(s.get(0, 1), c(-0.75));
    }
}
