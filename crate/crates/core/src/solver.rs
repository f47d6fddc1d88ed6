//! Discretize-then-optimize stationary trajectories of quadratic actions.
//!
//! The discrete action is `S[x] = dt * sum_i L(t_i, q_0(i), ..., q_n(i))` with
//! `q_l = G_l x` the Grünwald-Letnikov matrices of the ladder orders. For a
//! quadratic Lagrangian this is `1/2 x^T A x + b^T x + c` over all samples.
//! Boundary values pin a few samples at each end; eliminating them leaves a
//! form over the interior unknowns `y` with `x = P y + x0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::fracops::{gl_weights, FracOrder, SampledPath, UniformGrid};
use crate::lagrangian::{Convention, LagrangianSpec, QuadraticValues};
use crate::linalg::{BandMatrix, DenseMatrix, Factorization, SystemMatrix};
use crate::special::unit_phase;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Boundary values `(ladder index, value)` at `t = a` and `t = b`.
///
/// A left value for `q_l` constrains the first sample where the stencil of
/// order `ladder[l]` is complete, `ceil(ladder[l])`; right values constrain
/// the last sample. Constraints on one side are sorted by `l` and pin samples
/// `0, 1, ...` (left) or `N-1, N-2, ...` (right).
///
/// A momentum entry `(l, p)` leaves the end free and adds `p q_l(a)` (left) or
/// `-p q_l(b)` (right) to the action, so the stationary path has conjugate
/// momentum `p` there. Each side needs as many entries, values plus momenta,
/// as the ladder's boundary count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub left: Vec<(usize, Complex64)>,
    pub right: Vec<(usize, Complex64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub left_momentum: Vec<(usize, Complex64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub right_momentum: Vec<(usize, Complex64)>,
}

impl BoundaryData {
    pub fn new(left: Vec<(usize, Complex64)>, right: Vec<(usize, Complex64)>) -> Self {
        Self { left, right, ..Self::default() }
    }

    pub fn with_momenta(mut self, left: Vec<(usize, Complex64)>, right: Vec<(usize, Complex64)>) -> Self {
        self.left_momentum = left;
        self.right_momentum = right;
        self
    }

    pub fn has_momenta(&self) -> bool {
        !(self.left_momentum.is_empty() && self.right_momentum.is_empty())
    }

    /// `x(a) = xa`, `x(b) = xb`.
    pub fn dirichlet(xa: f64, xb: f64) -> Self {
        Self::new(vec![(0, xa.into())], vec![(0, xb.into())])
    }

    pub fn validate(&self, ladder: &[f64], per_side: usize) -> Result<()> {
        let sides = [("left", &self.left, &self.left_momentum), ("right", &self.right, &self.right_momentum)];
        for (side, values, momenta) in sides {
            let mut seen = Vec::new();
            for (l, v) in values.iter().chain(momenta.iter()) {
                if *l >= ladder.len() {
                    return Err(Error::Boundary(format!("{side} value for q{l} but the ladder has {} orders", ladder.len())));
                }
                if seen.contains(l) {
                    return Err(Error::Boundary(format!("duplicate {side} value for q{l}")));
                }
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Boundary(format!("{side} value for q{l} is not finite")));
                }
                seen.push(*l);
            }
            if seen.len() != per_side {
                return Err(Error::Boundary(format!(
                    "{side} side has {} entries; this ladder needs {per_side} per side",
                    seen.len()
                )));
            }
        }
        Ok(())
    }

    fn sorted(list: &[(usize, Complex64)]) -> Vec<(usize, Complex64)> {
        let mut v = list.to_vec();
        v.sort_by_key(|(l, _)| *l);
        v
    }
}

/// Affine map `x = P y + x0` from interior unknowns to all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    n: usize,
    free: Range<usize>,
    fixed: Vec<usize>,
    /// Row `f` of `P` restricted to fixed sample `fixed[f]`, over reduced indices.
    k: Vec<Vec<(usize, Complex64)>>,
    x0: Vec<Complex64>,
}

impl Lift {
    /// Grid indices of the unknowns.
    pub fn free(&self) -> Range<usize> {
        self.free.clone()
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    pub fn offset(&self) -> &[Complex64] {
        &self.x0
    }

    pub fn expand(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.free.len());
        let mut x = self.x0.clone();
        for (u, v) in y.iter().enumerate() {
            x[self.free.start + u] += v;
        }
        for (f, row) in self.fixed.iter().zip(&self.k) {
            for &(u, kv) in row {
                x[*f] += kv * y[u];
            }
        }
        x
    }

    /// Row `i` of `M P` as sparse `(reduced column, value)` pairs.
    fn right_multiply(&self, m: &SystemMatrix, i: usize) -> Vec<(usize, Complex64)> {
        let mut out = Vec::new();
        for j in m.row_range(i) {
            let v = m.get(i, j);
            if v == ZERO {
                continue;
            }
            if self.free.contains(&j) {
                out.push((j - self.free.start, v));
            } else if let Some(f) = self.fixed.iter().position(|&p| p == j) {
                out.extend(self.k[f].iter().map(|&(u, kv)| (u, v * kv)));
            }
        }
        out
    }
}

/// Metadata attached to an assembled form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormMetadata {
    pub ladder: Vec<f64>,
    pub convention: Convention,
    /// `d2L/dq_l^2` at `t = a`, one per ladder order.
    pub hessian_diagonal: Vec<Complex64>,
    pub euclidean: bool,
    pub notes: Vec<String>,
}

/// `S(y) = 1/2 y^T A y + b^T y + c` over the interior unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub a: SystemMatrix,
    pub b: Vec<Complex64>,
    pub c: Complex64,
    pub grid: UniformGrid,
    pub lift: Lift,
    pub metadata: FormMetadata,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn energy(&self, y: &[Complex64]) -> Complex64 {
        let ay = self.a.matvec(y);
        y.iter().zip(&ay).zip(&self.b).map(|((yi, ai), bi)| yi * (0.5 * ai + bi)).sum::<Complex64>() + self.c
    }

    /// `A y + b`.
    pub fn gradient(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.a.matvec(y).iter().zip(&self.b).map(|(a, b)| a + b).collect()
    }

    pub fn expand(&self, y: &[Complex64]) -> Result<SampledPath> {
        SampledPath::new(self.grid, self.lift.expand(y))
    }

    /// Samples of grid index `i` for each unknown.
    pub fn unknown_indices(&self) -> Range<usize> {
        self.lift.free()
    }
}

/// Grünwald-Letnikov matrix of one order, applied lazily.
struct GlMatrix {
    w: Vec<f64>,
    scale: f64,
    support: usize,
}

impl GlMatrix {
    fn new(order: f64, grid: &UniformGrid) -> Result<Self> {
        let o = FracOrder::new(order)?;
        let wts = gl_weights(o, grid.len());
        let support = wts.support();
        Ok(Self { w: wts.w, scale: grid.dt().powf(-order), support })
    }

    /// Entry `(k, j)`.
    fn get(&self, k: usize, j: usize) -> f64 {
        if k < j || k - j >= self.support {
            0.0
        } else {
            self.w[k - j] * self.scale
        }
    }

    fn banded(&self) -> bool {
        self.support < self.w.len()
    }

    fn band(&self) -> usize {
        self.support - 1
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .map(|k| {
                let lo = (k + 1).saturating_sub(self.support);
                (lo..=k).map(|j| x[j] * self.get(k, j)).sum()
            })
            .collect()
    }
}

/// Per-time quadratic coefficients of a Lagrangian.
pub(crate) struct Coefficients {
    pub ladder: Vec<f64>,
    pub values: Vec<QuadraticValues>,
    pub time_dependent: bool,
}

impl Coefficients {
    pub fn from_spec(lag: &LagrangianSpec, grid: &UniformGrid) -> Result<Self> {
        let parts = lag.quadratic_parts()?;
        let values = if parts.time_dependent {
            grid.times().into_iter().map(|t| parts.at(t)).collect::<Result<Vec<_>>>()?
        } else {
            vec![parts.at(grid.a())?]
        };
        Ok(Self { ladder: lag.ladder().to_vec(), values, time_dependent: parts.time_dependent })
    }

    fn at(&self, i: usize) -> &QuadraticValues {
        if self.time_dependent {
            &self.values[i]
        } else {
            &self.values[0]
        }
    }

    pub fn map(&self, f: impl Fn(&QuadraticValues) -> QuadraticValues) -> Self {
        Self { ladder: self.ladder.clone(), values: self.values.iter().map(f).collect(), time_dependent: self.time_dependent }
    }
}

/// Full-grid symmetric matrix `dt * sum G_l^T H_ll' G_l'`.
fn full_hessian(co: &Coefficients, grid: &UniformGrid) -> Result<SystemMatrix> {
    let n = grid.len();
    let dt = grid.dt();
    let mats = co.ladder.iter().map(|&o| GlMatrix::new(o, grid)).collect::<Result<Vec<_>>>()?;
    let nl = co.ladder.len();
    let pairs: Vec<(usize, usize)> = (0..nl)
        .flat_map(|l| (0..nl).map(move |lp| (l, lp)))
        .filter(|&(l, lp)| co.values.iter().any(|v| v.hessian[l][lp] != ZERO))
        .collect();
    let all_banded = pairs.iter().all(|&(l, lp)| mats[l].banded() && mats[lp].banded());
    if all_banded {
        let bw = pairs.iter().map(|&(l, lp)| mats[l].band().max(mats[lp].band())).max().unwrap_or(0);
        let mut a = BandMatrix::zeros(n, bw, bw);
        for &(l, lp) in &pairs {
            let (gl, gp) = (&mats[l], &mats[lp]);
            for i in 0..n {
                for j in a.row_range(i) {
                    let hi = (i + gl.band()).min(j + gp.band()).min(n - 1);
                    let mut s = ZERO;
                    for k in i.max(j)..=hi {
                        s += co.at(k).hessian[l][lp] * (gl.get(k, i) * gp.get(k, j));
                    }
                    if s != ZERO {
                        a.add(i, j, s * dt);
                    }
                }
            }
        }
        return Ok(SystemMatrix::Band(a));
    }
    let mut a = DenseMatrix::zeros(n);
    for &(l, lp) in &pairs {
        let (gl, gp) = (&mats[l], &mats[lp]);
        if co.time_dependent {
            // O(N^3): sum_k G_l(k, i) h_k G_l'(k, j)
            let g = faer::Mat::from_fn(n, n, |k, i| gl.get(k, i));
            for part in 0..2 {
                let hg = faer::Mat::from_fn(n, n, |k, j| {
                    let h = co.at(k).hessian[l][lp];
                    (if part == 0 { h.re } else { h.im }) * gp.get(k, j)
                });
                let prod = g.transpose() * &hg;
                let unit = if part == 0 { Complex64::new(dt, 0.0) } else { Complex64::new(0.0, dt) };
                for i in 0..n {
                    for j in 0..n {
                        a.add(i, j, unit * prod[(i, j)]);
                    }
                }
            }
            continue;
        }
        // S(i, j) = sum_{k >= max(i, j)} w_{k-i} w'_{k-j}
        //         = S(i+1, j+1) + w_{N-1-i} w'_{N-1-j}
        let h = co.at(0).hessian[l][lp] * dt;
        let mut s = faer::Mat::<f64>::zeros(n, n);
        for i in (0..n).rev() {
            for j in (0..n).rev() {
                let next = if i + 1 < n && j + 1 < n { s[(i + 1, j + 1)] } else { 0.0 };
                s[(i, j)] = next + gl.get(n - 1, i) * gp.get(n - 1, j);
            }
        }
        for i in 0..n {
            for j in 0..n {
                a.add(i, j, h * s[(i, j)]);
            }
        }
    }
    Ok(SystemMatrix::Dense(a))
}

/// Full-grid linear term and constant.
fn full_linear(co: &Coefficients, grid: &UniformGrid) -> Result<(Vec<Complex64>, Complex64)> {
    let n = grid.len();
    let dt = grid.dt();
    let mut b = vec![ZERO; n];
    for (l, &o) in co.ladder.iter().enumerate() {
        if !(0..n).any(|k| co.at(k).linear[l] != ZERO) {
            continue;
        }
        let g = GlMatrix::new(o, grid)?;
        // b_j += dt sum_k g_l(t_k) G_l(k, j)
        for j in 0..n {
            let hi = if g.banded() { (j + g.band()).min(n - 1) } else { n - 1 };
            for k in j..=hi {
                b[j] += co.at(k).linear[l] * g.get(k, j) * dt;
            }
        }
    }
    let c = (0..n).map(|k| co.at(k).constant).sum::<Complex64>() * dt;
    Ok((b, c))
}

/// Linear terms `p q_l(a) - p' q_l(b)` of prescribed end momenta.
fn add_momentum_terms(ladder: &[f64], grid: &UniformGrid, bc: &BoundaryData, b: &mut [Complex64]) -> Result<()> {
    let n = grid.len();
    for (sign, list) in [(1.0, &bc.left_momentum), (-1.0, &bc.right_momentum)] {
        for &(l, p) in list {
            let g = GlMatrix::new(ladder[l], grid)?;
            let e = if sign > 0.0 { ladder[l].ceil() as usize } else { n - 1 };
            for j in (e + 1).saturating_sub(g.support)..=e {
                b[j] += p * (sign * g.get(e, j));
            }
        }
    }
    Ok(())
}

/// Builds the lift from boundary data; `ceil(order)` is the first complete left stencil.
fn build_lift(ladder: &[f64], grid: &UniformGrid, bc: &BoundaryData) -> Result<Lift> {
    let n = grid.len();
    let left = BoundaryData::sorted(&bc.left);
    let right = BoundaryData::sorted(&bc.right);
    let (kl, kr) = (left.len(), right.len());
    let first_rows = left.iter().map(|(l, _)| ladder[*l].ceil() as usize).max().unwrap_or(0);
    if kl + kr + 1 > n || first_rows >= n - kr {
        return Err(Error::InvalidGrid(format!("{n} samples cannot hold {kl} + {kr} boundary values")));
    }
    let free = kl..n - kr;
    let fixed: Vec<usize> = (0..kl).chain((0..kr).map(|j| n - 1 - j)).collect();
    let nf = fixed.len();
    let r = free.len();
    // constraint rows over all samples
    let mut rows: Vec<(Vec<(usize, Complex64)>, Complex64)> = Vec::new();
    for (side, list) in [(0, &left), (1, &right)] {
        for (l, v) in list {
            let g = GlMatrix::new(ladder[*l], grid)?;
            let e = if side == 0 { ladder[*l].ceil() as usize } else { n - 1 };
            let lo = (e + 1).saturating_sub(g.support);
            let row = (lo..=e).map(|j| (j, Complex64::new(g.get(e, j), 0.0))).filter(|(_, c)| *c != ZERO).collect();
            rows.push((row, *v));
        }
    }
    // C_F (nf x nf), and C_U as sparse rows over reduced indices
    let mut cf = DenseMatrix::zeros(nf);
    let mut cu: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); nf];
    for (ri, (row, _)) in rows.iter().enumerate() {
        for &(j, c) in row {
            if let Some(f) = fixed.iter().position(|&p| p == j) {
                cf.add(ri, f, c);
            } else {
                cu[ri].push((j - free.start, c));
            }
        }
    }
    let lu = SystemMatrix::Dense(cf).lu().map_err(|_| {
        Error::Boundary("boundary values do not determine the pinned samples (singular constraint block)".into())
    })?;
    let v: Vec<Complex64> = rows.iter().map(|(_, v)| *v).collect();
    let xf = lu.solve(&v);
    let mut x0 = vec![ZERO; n];
    for (f, &p) in fixed.iter().enumerate() {
        x0[p] = xf[f];
    }
    // K = -C_F^{-1} C_U, one column of C_U at a time
    let mut k: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); nf];
    let mut cols: Vec<usize> = cu.iter().flatten().map(|(u, _)| *u).collect();
    cols.sort_unstable();
    cols.dedup();
    for u in cols {
        let col: Vec<Complex64> =
            cu.iter().map(|row| row.iter().filter(|(j, _)| *j == u).map(|(_, c)| *c).sum()).collect();
        let sol = lu.solve(&col);
        for (f, s) in sol.into_iter().enumerate() {
            if s != ZERO {
                k[f].push((u, -s));
            }
        }
    }
    debug_assert!(r > 0);
    Ok(Lift { n, free, fixed, k, x0 })
}

/// Reduced matrix from sparse rows; banded storage when the full matrix is banded.
fn collect_rows(
    r: usize,
    dense: bool,
    rows: impl Iterator<Item = (usize, Vec<(usize, Complex64)>)>,
) -> SystemMatrix {
    if dense {
        let mut m = SystemMatrix::Dense(DenseMatrix::zeros(r));
        for (i, row) in rows {
            for (j, v) in row {
                m.add(i, j, v);
            }
        }
        return m;
    }
    let entries: Vec<(usize, usize, Complex64)> =
        rows.flat_map(|(i, row)| row.into_iter().map(move |(j, v)| (i, j, v))).collect();
    let kl = entries.iter().map(|(i, j, _)| i.saturating_sub(*j)).max().unwrap_or(0);
    let ku = entries.iter().map(|(i, j, _)| j.saturating_sub(*i)).max().unwrap_or(0);
    let mut m = if 4 * (kl + ku) > r {
        SystemMatrix::Dense(DenseMatrix::zeros(r))
    } else {
        SystemMatrix::Band(BandMatrix::zeros(r, kl, ku))
    };
    for (i, j, v) in entries {
        m.add(i, j, v);
    }
    m
}

fn metadata(co: &Coefficients, convention: Convention, euclidean: bool) -> FormMetadata {
    let v = co.at(0);
    FormMetadata {
        ladder: co.ladder.clone(),
        convention,
        hessian_diagonal: (0..co.ladder.len()).map(|l| v.hessian[l][l]).collect(),
        euclidean,
        notes: Vec::new(),
    }
}

fn check_size(n: usize, bc: &BoundaryData, limit: usize) -> Result<()> {
    let unknowns = n.saturating_sub(bc.left.len() + bc.right.len());
    if unknowns > limit {
        return Err(Error::TooLarge { unknowns, limit });
    }
    Ok(())
}

pub(crate) fn assemble_coefficients(
    co: &Coefficients,
    grid: &UniformGrid,
    bc: &BoundaryData,
    convention: Convention,
    euclidean: bool,
) -> Result<QuadraticForm> {
    let n = grid.len();
    let lift = build_lift(&co.ladder, grid, bc)?;
    let full = full_hessian(co, grid)?;
    let (mut b_full, c_full) = full_linear(co, grid)?;
    add_momentum_terms(&co.ladder, grid, bc, &mut b_full)?;
    let r = lift.free.len();

    let fixed_rows: Vec<Vec<(usize, Complex64)>> = lift.fixed.iter().map(|&f| lift.right_multiply(&full, f)).collect();
    let dense = matches!(full, SystemMatrix::Dense(_));
    let rows = (0..r).map(|u| {
        let mut row = lift.right_multiply(&full, lift.free.start + u);
        for (f, krow) in lift.k.iter().enumerate() {
            for &(uu, kv) in krow {
                if uu == u {
                    row.extend(fixed_rows[f].iter().map(|&(j, v)| (j, kv * v)));
                }
            }
        }
        (u, row)
    });
    let mut a = collect_rows(r, dense, rows);
    a.symmetrize();

    // b = P^T (A x0 + b_full), c = 1/2 x0^T A x0 + b_full^T x0 + c_full
    let ax0 = full.matvec(&lift.x0);
    let t: Vec<Complex64> = ax0.iter().zip(&b_full).map(|(a, b)| a + b).collect();
    let mut b: Vec<Complex64> = t[lift.free.clone()].to_vec();
    for (f, krow) in lift.k.iter().enumerate() {
        for &(u, kv) in krow {
            b[u] += kv * t[lift.fixed[f]];
        }
    }
    let c = c_full + (0..n).map(|i| lift.x0[i] * (0.5 * ax0[i] + b_full[i])).sum::<Complex64>();
    Ok(QuadraticForm { a, b, c, grid: *grid, lift, metadata: metadata(co, convention, euclidean) })
}

/// Discrete action of a quadratic Lagrangian over the interior unknowns.
pub fn assemble_action(lag: &LagrangianSpec, grid: &UniformGrid, bc: &BoundaryData) -> Result<QuadraticForm> {
    assemble_with_limit(lag, grid, bc, SolverOptions::default().max_unknowns)
}

fn assemble_with_limit(lag: &LagrangianSpec, grid: &UniformGrid, bc: &BoundaryData, limit: usize) -> Result<QuadraticForm> {
    bc.validate(lag.ladder(), lag.boundary_count_per_side())?;
    check_size(grid.len(), bc, limit)?;
    let co = Coefficients::from_spec(lag, grid)?;
    assemble_coefficients(&co, grid, bc, lag.convention(), false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_unknowns: usize,
    /// Smallest accepted `min |pivot| / max |pivot|` of the LU factors.
    pub singular_tolerance: f64,
    /// Accepted `||A y + b||_inf / ||b||_inf`.
    pub residual_tolerance: f64,
    /// The system counts as resonant when its smallest eigenvalue modulus is
    /// below `resonance_tolerance * dt^(2 top + 1) * ||A||_inf`, the size at
    /// which a zero mode of the continuous problem survives discretisation.
    pub resonance_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_unknowns: 20000, singular_tolerance: 1e-13, residual_tolerance: 1e-9, resonance_tolerance: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub unknowns: usize,
    pub pivot_ratio: f64,
    pub relative_residual: f64,
    /// Smallest eigenvalue modulus over `dt^(2 top + 1) ||A||_inf`.
    pub resonance_margin: f64,
    pub convention: Convention,
    pub storage: &'static str,
}

struct Checked {
    y: Vec<Complex64>,
    pivot_ratio: f64,
    relative_residual: f64,
    resonance_margin: f64,
}

/// Upper bound on the smallest eigenvalue modulus by inverse iteration.
fn smallest_eigenvalue(lu: &Factorization, n: usize) -> f64 {
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.5 * (1.3 * i as f64).sin(), 0.0)).collect();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut mu = f64::INFINITY;
    for _ in 0..25 {
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        v = lu.solve(&v);
        mu = mu.min(1.0 / norm(&v));
    }
    mu
}

fn norm_inf(m: &SystemMatrix) -> f64 {
    (0..m.dim()).map(|i| m.row_range(i).map(|j| m.get(i, j).norm()).sum::<f64>()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub path: SampledPath,
    pub report: SolveReport,
}

/// Solves `M y = rhs` with singularity and residual checks.
///
/// `resolution` is `dt^(2 top + 1)` of the discretisation.
fn checked_solve(m: &SystemMatrix, rhs: &[Complex64], resolution: f64, opts: &SolverOptions) -> Result<Checked> {
    let lu = m.lu().map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("{msg}; boundary data may be resonant")),
        other => other,
    })?;
    let ratio = lu.pivot_ratio();
    if ratio < opts.singular_tolerance {
        return Err(Error::Singular(format!(
            "pivot ratio {ratio:.3e} below {:.1e}; boundary data are resonant with the discrete operator",
            opts.singular_tolerance
        )));
    }
    let resonance_margin = smallest_eigenvalue(&lu, rhs.len()) / (resolution * norm_inf(m));
    if resonance_margin < opts.resonance_tolerance {
        return Err(Error::Singular(format!(
            "smallest eigenvalue is {resonance_margin:.3e} x dt^(2 top + 1) ||A||; boundary data are resonant"
        )));
    }
    let y = lu.solve(rhs);
    let my = m.matvec(&y);
    let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let res = my.iter().zip(rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let rel = if scale == 0.0 { res } else { res / scale };
    if !(rel <= opts.residual_tolerance) {
        return Err(Error::Singular(format!("relative residual {rel:.3e} exceeds {:.1e}", opts.residual_tolerance)));
    }
    Ok(Checked { y, pivot_ratio: ratio, relative_residual: rel, resonance_margin })
}

fn resolution(lag: &LagrangianSpec, grid: &UniformGrid) -> f64 {
    grid.dt().powf(2.0 * lag.ladder()[lag.top()] + 1.0)
}

fn storage(m: &SystemMatrix) -> &'static str {
    match m {
        SystemMatrix::Band(_) => "band",
        SystemMatrix::Dense(_) => "dense",
    }
}

pub fn solve_stationary(
    lag: &LagrangianSpec,
    grid: &UniformGrid,
    bc: &BoundaryData,
    options: &SolverOptions,
) -> Result<SampledPath> {
    Ok(solve_stationary_with_report(lag, grid, bc, options)?.path)
}

pub fn solve_stationary_with_report(
    lag: &LagrangianSpec,
    grid: &UniformGrid,
    bc: &BoundaryData,
    options: &SolverOptions,
) -> Result<Solution> {
    match lag.convention() {
        Convention::Variational => {
            let form = assemble_with_limit(lag, grid, bc, options.max_unknowns)?;
            let rhs: Vec<Complex64> = form.b.iter().map(|z| -z).collect();
            let ch = checked_solve(&form.a, &rhs, resolution(lag, grid), options)?;
            let report = SolveReport {
                unknowns: ch.y.len(),
                pivot_ratio: ch.pivot_ratio,
                relative_residual: ch.relative_residual,
                resonance_margin: ch.resonance_margin,
                convention: Convention::Variational,
                storage: storage(&form.a),
            };
            Ok(Solution { path: form.expand(&ch.y)?, report })
        }
        Convention::Riewe => solve_collocation(lag, grid, bc, options),
    }
}

/// Riewe convention: `sum phase(a_l) H_ll' D^{a_l + a_l'} x + sum phase(a_l) D^{a_l} g_l = 0`,
/// collocated on the last rows so every stencil is complete.
fn solve_collocation(lag: &LagrangianSpec, grid: &UniformGrid, bc: &BoundaryData, opts: &SolverOptions) -> Result<Solution> {
    bc.validate(lag.ladder(), lag.boundary_count_per_side())?;
    check_size(grid.len(), bc, opts.max_unknowns)?;
    let co = Coefficients::from_spec(lag, grid)?;
    if co.time_dependent {
        return Err(Error::Unsupported("time-dependent coefficients under the Riewe convention".into()));
    }
    if bc.has_momenta() {
        return Err(Error::Unsupported("momentum boundary data under the Riewe convention".into()));
    }
    let n = grid.len();
    let ladder = lag.ladder();
    let nl = ladder.len();
    let v = co.at(0);
    let mut terms: Vec<(f64, Complex64)> = Vec::new();
    for l in 0..nl {
        for lp in 0..nl {
            let h = v.hessian[l][lp];
            if h != ZERO {
                terms.push((ladder[l] + ladder[lp], unit_phase(ladder[l]) * h));
            }
        }
    }
    // Row k of G_o is a second-order approximation at t_k - o dt / 2. Every
    // term is moved to the centre of the highest-order stencil by linear
    // interpolation between neighbouring rows.
    let top = terms.iter().map(|(o, _)| *o).fold(0.0, f64::max);
    let rows_for = |i: usize, o: f64| -> [(usize, f64); 2] {
        let s = 0.5 * (top - o);
        let f = s - s.floor();
        let hi = i.saturating_sub(s.floor() as usize);
        [(hi, 1.0 - f), (hi.saturating_sub(1), f)]
    };
    let mats = terms.iter().map(|(o, _)| GlMatrix::new(*o, grid)).collect::<Result<Vec<_>>>()?;
    let full = if mats.iter().all(GlMatrix::banded) {
        let bw = mats.iter().map(GlMatrix::band).max().unwrap_or(0) + (0.5 * top).ceil() as usize;
        let mut m = BandMatrix::zeros(n, bw, 0);
        for ((o, c), g) in terms.iter().zip(&mats) {
            for i in 0..n {
                for (k, wk) in rows_for(i, *o) {
                    if wk == 0.0 {
                        continue;
                    }
                    for j in (k + 1).saturating_sub(g.support)..=k {
                        m.add(i, j, c * (wk * g.get(k, j)));
                    }
                }
            }
        }
        SystemMatrix::Band(m)
    } else {
        let mut m = DenseMatrix::zeros(n);
        for ((o, c), g) in terms.iter().zip(&mats) {
            for i in 0..n {
                for (k, wk) in rows_for(i, *o) {
                    if wk == 0.0 {
                        continue;
                    }
                    for j in 0..=k {
                        m.add(i, j, c * (wk * g.get(k, j)));
                    }
                }
            }
        }
        SystemMatrix::Dense(m)
    };
    let mut e = vec![ZERO; n];
    for (l, &o) in ladder.iter().enumerate() {
        if v.linear[l] == ZERO {
            continue;
        }
        let g = GlMatrix::new(o, grid)?;
        let dg = g.apply(&vec![v.linear[l]; n]);
        for (i, ei) in e.iter_mut().enumerate() {
            for (k, wk) in rows_for(i, o) {
                *ei += unit_phase(o) * dg[k] * wk;
            }
        }
    }
    let lift = build_lift(ladder, grid, bc)?;
    let r = lift.free.len();
    let first = n - r;
    let mx0 = full.matvec(&lift.x0);
    let rhs: Vec<Complex64> = (first..n).map(|i| -(mx0[i] + e[i])).collect();
    let dense = matches!(full, SystemMatrix::Dense(_));
    let m = collect_rows(r, dense, (0..r).map(|i| (i, lift.right_multiply(&full, first + i))));
    let ch = checked_solve(&m, &rhs, resolution(lag, grid), opts)?;
    let report = SolveReport {
        unknowns: r,
        pivot_ratio: ch.pivot_ratio,
        relative_residual: ch.relative_residual,
        resonance_margin: ch.resonance_margin,
        convention: Convention::Riewe,
        storage: storage(&m),
    };
    Ok(Solution { path: SampledPath::new(*grid, lift.expand(&ch.y))?, report })
}

/// `max |x(t_i) - f(t_i)|` over all samples.
pub fn max_error(path: &SampledPath, f: impl Fn(f64) -> f64) -> f64 {
    let g = path.grid();
    path.values().iter().enumerate().map(|(i, z)| (z - Complex64::new(f(g.t(i)), 0.0)).norm()).fold(0.0, f64::max)
}

/// `max |x(t_i) - y(t_i)|`.
pub fn sup_distance(a: &SampledPath, b: &SampledPath) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
