//! Gaussian Euclidean path integrals of quadratic actions.
//!
//! Under `t -> -i tau` a coordinate of order `a` picks up `i^a`, the measure
//! `dt -> -i dtau`, and `exp(i S)` becomes `exp(-S_E)` with
//!
//! ```text
//! S_E = -dtau * sum L(q_l -> i^{a_l} q_l)
//! ```
//!
//! so `H_ll' -> -i^{a_l + a_l'} H_ll'`, `g_l -> -i^{a_l} g_l`, `L0 -> -L0`.
//! Every integral is then done by linear algebra; nothing is sampled.

use num_complex::Complex64;
use serde::Serialize;

use crate::dsl::Params;
use crate::error::{Error, Result};
use crate::fracops::UniformGrid;
use crate::lagrangian::{real_params, Convention, LagrangianSpec, QuadraticValues};
use crate::linalg::{BandMatrix, SystemMatrix};
use crate::solver::{assemble_coefficients, BoundaryData, Coefficients, QuadraticForm};
use crate::special::i_pow;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn wick(ladder: &[f64], v: &QuadraticValues) -> QuadraticValues {
    let n = ladder.len();
    QuadraticValues {
        hessian: (0..n)
            .map(|l| (0..n).map(|lp| -i_pow(ladder[l] + ladder[lp]) * v.hessian[l][lp]).collect())
            .collect(),
        linear: (0..n).map(|l| -i_pow(ladder[l]) * v.linear[l]).collect(),
        constant: -v.constant,
    }
}

/// Wick-rotated action over the interior unknowns.
pub fn euclidean_quadratic_form(lag: &LagrangianSpec, grid: &UniformGrid, bc: &BoundaryData) -> Result<QuadraticForm> {
    bc.validate(lag.ladder(), lag.boundary_count_per_side())?;
    let co = Coefficients::from_spec(lag, grid)?;
    let ladder = co.ladder.clone();
    let co = co.map(|v| wick(&ladder, v));
    let mut form = assemble_coefficients(&co, grid, bc, Convention::Variational, true)?;
    let top = lag.top();
    let h = form.metadata.hessian_diagonal[top];
    if h.im == 0.0 && top > 1 {
        let sign = if h.re < 0.0 { "negative" } else { "positive" };
        form.metadata.notes.push(format!("highest-order block q{top}^2 has {sign} Euclidean weight {}", h.re));
    }
    Ok(form)
}

/// `log |det A|` with its phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Determinant {
    pub log_abs: f64,
    pub phase: Complex64,
}

pub fn determinant(a: &SystemMatrix) -> Result<Determinant> {
    let lu = a.lu()?;
    Ok(Determinant { log_abs: lu.log_abs_det(), phase: lu.det_phase() })
}

/// `-1/2 log |det A| + (N/2) log 2 pi` for an `N x N` matrix.
pub fn gaussian_log_det(a: &SystemMatrix) -> Result<f64> {
    let d = determinant(a)?;
    Ok(-0.5 * d.log_abs + 0.5 * a.dim() as f64 * LN_2PI)
}

/// Log of the Gaussian kernel normalisation of a form.
pub fn kernel_log_det(form: &QuadraticForm) -> Result<f64> {
    gaussian_log_det(&form.a)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GridMeta {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub dt: f64,
}

impl From<&UniformGrid> for GridMeta {
    fn from(g: &UniformGrid) -> Self {
        Self { a: g.a(), b: g.b(), n: g.len(), dt: g.dt() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpectralReport {
    pub log_det: f64,
    /// `(tau, <x(t_s) x(t_s + tau)>)` from the source sample onwards.
    pub correlator: Vec<(f64, f64)>,
    pub gap_estimates: Vec<f64>,
    pub grid: GridMeta,
    pub unknowns: usize,
    pub source_time: f64,
    pub notes: Vec<String>,
}

/// Where the correlator starts and which part of it is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelatorOptions {
    /// Source time; the grid sample nearest the midpoint when absent.
    pub source: Option<f64>,
    /// Fit window in `tau`. When absent, points with
    /// `1e-6 <= C(tau) / C(0) <= 1e-1` and `tau` at most half the distance to
    /// the boundary are used.
    pub window: Option<(f64, f64)>,
}

/// Slope of `ln |C|` against `tau` by least squares, negated.
pub fn fit_decay_rate(points: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, c)| *c > 0.0).map(|(t, c)| (*t, c.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Domain("fit window holds fewer than two positive correlator values".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    Ok(-sxy / sxx)
}

fn fit_points(corr: &[(f64, f64)], window: Option<(f64, f64)>, reach: f64) -> Vec<(f64, f64)> {
    let c0 = corr.first().map_or(0.0, |p| p.1);
    corr.iter()
        .copied()
        .filter(|&(tau, c)| match window {
            Some((lo, hi)) => tau >= lo && tau <= hi,
            None => {
                let r = c / c0;
                (1e-6..=1e-1).contains(&r) && tau <= 0.5 * reach
            }
        })
        .collect()
}

/// `<x_i x_j> = (A^{-1})_{ij}` from the source onwards, with a fitted decay rate.
pub fn correlator(form: &QuadraticForm, options: &CorrelatorOptions) -> Result<SpectralReport> {
    if !form.a.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(
            "Gaussian moments need a positive definite Euclidean form".into(),
        ));
    }
    let grid = form.grid;
    let free = form.unknown_indices();
    let r = form.dim();
    let source_time = options.source.unwrap_or(0.5 * (grid.a() + grid.b()));
    let s_grid = ((source_time - grid.a()) / grid.dt()).round() as isize;
    if s_grid < free.start as isize || s_grid >= free.end as isize {
        return Err(Error::Domain(format!("source time {source_time} is not an interior sample")));
    }
    let s = s_grid as usize - free.start;
    let lu = form.a.lu()?;
    let mut e = vec![Complex64::new(0.0, 0.0); r];
    e[s] = 1.0.into();
    let col = lu.solve(&e);
    let corr: Vec<(f64, f64)> = (s..r).map(|j| ((j - s) as f64 * grid.dt(), col[j].re)).collect();
    let reach = (r - 1 - s).min(s) as f64 * grid.dt();
    let rate = fit_decay_rate(&fit_points(&corr, options.window, reach))?;
    Ok(SpectralReport {
        log_det: -0.5 * lu.log_abs_det() + 0.5 * r as f64 * LN_2PI,
        correlator: corr,
        gap_estimates: vec![rate],
        grid: GridMeta::from(&grid),
        unknowns: r,
        source_time: grid.t(s + free.start),
        notes: Vec::new(),
    })
}

/// Damped system with the half-order field integrated out.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginalization {
    /// Euclidean form on `q0` alone: kinetic plus potential.
    pub effective: QuadraticForm,
    /// `(N/2) log(2 pi / (gamma dt))`.
    pub log_c: f64,
    /// Per-sample weight `gamma * dt` of the auxiliary field.
    pub auxiliary_weight: Complex64,
}

impl Marginalization {
    pub fn auxiliary_count(&self) -> usize {
        self.effective.dim()
    }

    /// Joint matrix over `(q0 unknowns, q_half samples)`; block diagonal.
    pub fn joint_matrix(&self) -> SystemMatrix {
        let n = self.auxiliary_count();
        let (kl, ku) = match &self.effective.a {
            SystemMatrix::Band(m) => m.bandwidths(),
            SystemMatrix::Dense(_) => (n, n),
        };
        let mut out = SystemMatrix::Band(BandMatrix::zeros(2 * n, kl, ku));
        for i in 0..n {
            for j in self.effective.a.row_range(i) {
                out.add(i, j, self.effective.a.get(i, j));
            }
            out.add(n + i, n + i, self.auxiliary_weight);
        }
        out
    }

    pub fn joint_log_det(&self) -> Result<f64> {
        gaussian_log_det(&self.joint_matrix())
    }
}

/// Integrates the half-order coordinate of a Riewe damped system out of the
/// Euclidean kernel, treating it as an independent field.
///
/// The field contributes `exp(-(gamma/2) dt sum q_half^2)` over as many
/// samples as `q0` has unknowns.
pub fn marginalize_auxiliary(lag: &LagrangianSpec, grid: &UniformGrid, bc: &BoundaryData) -> Result<Marginalization> {
    if lag.convention() != Convention::Riewe {
        return Err(Error::Unsupported(
            "the half-order field couples to q0 unless the Riewe convention is on".into(),
        ));
    }
    let ladder = lag.ladder();
    let aux = lag
        .ladder_index(0.5)
        .ok_or_else(|| Error::Unsupported("no half-order coordinate on the ladder".into()))?;
    let parts = lag.quadratic_parts()?;
    if parts.time_dependent {
        return Err(Error::Unsupported("time-dependent damped systems".into()));
    }
    let v = wick(ladder, &parts.at(grid.a())?);
    let n = ladder.len();
    let coupled = (0..n).any(|l| l != aux && (v.hessian[aux][l] != 0.0.into() || v.hessian[l][aux] != 0.0.into()));
    if coupled || v.linear[aux] != 0.0.into() {
        return Err(Error::Unsupported("the half-order block is coupled to other coordinates".into()));
    }
    let gamma = v.hessian[aux][aux];
    if gamma.norm() == 0.0 {
        return Err(Error::Unsupported("the half-order block has zero weight".into()));
    }
    // what remains lives on the integer orders of the ladder
    let keep: Vec<usize> = (0..n).filter(|&l| l != aux).collect();
    if keep.iter().any(|&l| ladder[l].fract() != 0.0) {
        return Err(Error::Unsupported("non-integer orders besides the half-order field".into()));
    }
    let reduced_ladder: Vec<f64> = keep.iter().map(|&l| ladder[l]).collect();
    let reduced = QuadraticValues {
        hessian: keep.iter().map(|&l| keep.iter().map(|&lp| v.hessian[l][lp]).collect()).collect(),
        linear: keep.iter().map(|&l| v.linear[l]).collect(),
        constant: v.constant,
    };
    let bc = remap_boundary(bc, &keep)?;
    let co = Coefficients { ladder: reduced_ladder, values: vec![reduced], time_dependent: false };
    let effective = assemble_coefficients(&co, grid, &bc, Convention::Variational, true)?;
    let weight = gamma * grid.dt();
    let count = effective.dim() as f64;
    let log_c = 0.5 * count * (LN_2PI - weight.norm().ln());
    Ok(Marginalization { effective, log_c, auxiliary_weight: weight })
}

fn remap_boundary(bc: &BoundaryData, keep: &[usize]) -> Result<BoundaryData> {
    let map = |list: &[(usize, Complex64)]| {
        list.iter()
            .map(|(l, v)| {
                keep.iter()
                    .position(|k| k == l)
                    .map(|p| (p, *v))
                    .ok_or_else(|| Error::Boundary(format!("boundary value on the integrated field q{l}")))
            })
            .collect::<Result<Vec<_>>>()
    };
    Ok(BoundaryData::new(map(&bc.left)?, map(&bc.right)?).with_momenta(map(&bc.left_momentum)?, map(&bc.right_momentum)?))
}

/// Partial fractions of the Pais-Uhlenbeck propagator
/// `1/((k^2 + w^2)(eps^2 k^2 + 1)) = ws/(k^2 + w^2) + wf/(eps^2 k^2 + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSplit {
    pub slow: LagrangianSpec,
    pub fast: LagrangianSpec,
    pub slow_weight: f64,
    /// Negative: the ghost.
    pub fast_weight: f64,
}

pub fn pu_mode_split(eps: f64, omega: f64) -> Result<ModeSplit> {
    let det = 1.0 - eps * eps * omega * omega;
    if det.abs() < 1e-12 {
        return Err(Error::Domain("eps * omega = 1: the two modes are degenerate".into()));
    }
    let params: Params = real_params(&[("eps", eps), ("w", omega)]);
    let slow = LagrangianSpec::from_text("0.5*q1^2 - 0.5*w^2*q0^2", 1.0, vec![0.0, 1.0], params.clone())?;
    let fast = LagrangianSpec::from_text("0.5*eps^2*q1^2 - 0.5*q0^2", 1.0, vec![0.0, 1.0], params)?;
    Ok(ModeSplit { slow, fast, slow_weight: 1.0 / det, fast_weight: -eps * eps / det })
}

/// Correlators of both PU modes, combined with their weights; gaps are
/// fitted per mode.
pub fn pu_spectral_report(eps: f64, omega: f64, grid: &UniformGrid, options: &CorrelatorOptions) -> Result<SpectralReport> {
    let split = pu_mode_split(eps, omega)?;
    let bc = BoundaryData::dirichlet(0.0, 0.0);
    let slow = correlator(&euclidean_quadratic_form(&split.slow, grid, &bc)?, options)?;
    let fast = correlator(&euclidean_quadratic_form(&split.fast, grid, &bc)?, options)?;
    let correlator = slow
        .correlator
        .iter()
        .zip(&fast.correlator)
        .map(|(&(t, a), &(_, b))| (t, split.slow_weight * a + split.fast_weight * b))
        .collect();
    Ok(SpectralReport {
        log_det: slow.log_det + fast.log_det,
        correlator,
        gap_estimates: vec![slow.gap_estimates[0], fast.gap_estimates[0]],
        grid: slow.grid,
        unknowns: slow.unknowns,
        source_time: slow.source_time,
        notes: vec![
            format!("slow mode weight {}", split.slow_weight),
            format!("fast (ghost) mode weight {}", split.fast_weight),
        ],
    })
}

/// Largest relative mismatch between the Fourier symbol of an interior row of
/// the Euclidean PU operator and `(K^2 + w^2)(eps^2 K^2 + 1)`, with
/// `K^2 = 4 sin^2(k dt / 2) / dt^2`, over `samples` wave numbers.
pub fn pu_symbol_residual(eps: f64, omega: f64, grid: &UniformGrid, samples: usize) -> Result<f64> {
    let lag = LagrangianSpec::pais_uhlenbeck(1.0, eps, omega)?;
    let zero = Complex64::new(0.0, 0.0);
    let bc = BoundaryData::new(vec![(0, zero), (1, zero)], vec![(0, zero), (1, zero)]);
    let form = euclidean_quadratic_form(&lag, grid, &bc)?;
    let dt = grid.dt();
    let mid = form.dim() / 2;
    let mut worst = 0.0f64;
    for s in 1..=samples {
        let k = std::f64::consts::PI / dt * s as f64 / (samples + 1) as f64;
        let symbol: Complex64 = form
            .a
            .row_range(mid)
            .map(|j| form.a.get(mid, j) * Complex64::from_polar(1.0, k * dt * (j as f64 - mid as f64)))
            .sum::<Complex64>()
            / dt;
        let k2 = 4.0 * (0.5 * k * dt).sin().powi(2) / (dt * dt);
        let product = (k2 + omega * omega) * (eps * eps * k2 + 1.0);
        worst = worst.max((symbol - product).norm() / product);
    }
    Ok(worst)
}
