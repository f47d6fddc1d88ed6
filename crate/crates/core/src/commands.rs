//! The four batch commands. Each returns its standard output and the files it
//! would write; the binary does the writing.

use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{KernelMode, RunConfig, SystemKind};
use crate::error::{Error, Result};
use crate::fracops::{BoundaryFlags, SampledPath};
use crate::lagrangian::LagrangianSpec;
use crate::pathint::{correlator, euclidean_quadratic_form, marginalize_auxiliary, pu_spectral_report, SpectralReport};
use crate::solver::{solve_stationary_with_report, sup_distance, BoundaryData, SolveReport};
use crate::variational::{coordinate_stack, derive, euler_lagrange_residual, reduced_hamiltonian, relative_variation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Derive,
    Solve,
    Kernel,
    Sweep,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub stdout: String,
    /// `(path, contents)`, relative to the output directory.
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    /// Writes every file below `dir`, creating it if needed.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        if self.files.is_empty() {
            return Ok(());
        }
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

/// `out` says whether an output directory is available.
pub fn run(cmd: Command, cfg: &RunConfig, out: bool) -> Result<Output> {
    match cmd {
        Command::Derive => cmd_derive(cfg, out),
        Command::Solve => cmd_solve(cfg, out),
        Command::Kernel => cmd_kernel(cfg, out),
        Command::Sweep => cmd_sweep(cfg, out),
    }
}

/// One real number with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

/// Euler-Lagrange expression, momenta and reduced Hamiltonian, one per line.
pub fn derivation_text(lag: &LagrangianSpec) -> Result<String> {
    let d = derive(lag)?;
    let mut s = String::new();
    writeln!(s, "EL = {}", d.euler_lagrange).unwrap();
    for (k, p) in d.momenta.iter().enumerate() {
        writeln!(s, "p{k} = {p}").unwrap();
    }
    writeln!(s, "H = {}", d.hamiltonian).unwrap();
    Ok(s)
}

fn cmd_derive(cfg: &RunConfig, out: bool) -> Result<Output> {
    let text = derivation_text(&cfg.lagrangian()?)?;
    let files = if out { vec![(PathBuf::from("derivation.txt"), text.clone())] } else { Vec::new() };
    Ok(Output { stdout: text, files })
}

/// Trajectory CSV: `t, re_x, im_x` then real and imaginary parts of each
/// higher ladder coordinate.
pub fn trajectory_csv(lag: &LagrangianSpec, x: &SampledPath) -> Result<String> {
    let stack = coordinate_stack(lag, x)?;
    let mut s = String::from("t,re_x,im_x");
    for l in 1..stack.derived.len() {
        write!(s, ",re_q{l},im_q{l}").unwrap();
    }
    s.push('\n');
    let grid = x.grid();
    for i in 0..grid.len() {
        s.push_str(&fmt_real(grid.t(i)));
        for q in std::iter::once(&stack.base).chain(&stack.derived[1..]) {
            let z = q.values()[i];
            write!(s, ",{},{}", fmt_real(z.re), fmt_real(z.im)).unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    solver: SolveReport,
    /// Largest `|EL|` of the sampled derivation over reliable samples.
    euler_lagrange_residual: f64,
    /// `max |H - H(t0)| / |H(t0)|`; absent when the Legendre map is singular.
    hamiltonian_variation: Option<f64>,
    low_accuracy: BoundaryFlags,
    max_imaginary: f64,
}

fn required_boundary(cfg: &RunConfig) -> Result<BoundaryData> {
    cfg.boundary().ok_or_else(|| Error::Config("this command needs a \"boundary\" section".into()))
}

fn solve_one(cfg: &RunConfig, lag: &LagrangianSpec) -> Result<(SampledPath, SolveSummary)> {
    let grid = cfg.grid()?;
    let bc = required_boundary(cfg)?;
    let sol = solve_stationary_with_report(lag, &grid, &bc, &cfg.solver)?;
    let el = euler_lagrange_residual(lag, &sol.path)?;
    let hamiltonian_variation = match reduced_hamiltonian(lag, &sol.path) {
        Ok(h) => Some(relative_variation(&h.sampled)),
        Err(Error::SingularLegendre(_)) => None,
        Err(e) => return Err(e),
    };
    let summary = SolveSummary {
        solver: sol.report,
        euler_lagrange_residual: el.max_abs_reliable(),
        hamiltonian_variation,
        low_accuracy: el.flags(),
        max_imaginary: sol.path.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max),
    };
    Ok((sol.path, summary))
}

fn cmd_solve(cfg: &RunConfig, out: bool) -> Result<Output> {
    let lag = cfg.lagrangian()?;
    let (path, summary) = solve_one(cfg, &lag)?;
    let csv = trajectory_csv(&lag, &path)?;
    let report = json(&summary);
    Ok(if out {
        Output {
            stdout: report.clone(),
            files: vec![(PathBuf::from("trajectory.csv"), csv), (PathBuf::from("solve_report.json"), report)],
        }
    } else {
        Output { stdout: csv, files: Vec::new() }
    })
}

#[derive(Debug, Serialize)]
struct KernelOutput {
    system: &'static str,
    method: &'static str,
    #[serde(flatten)]
    report: SpectralReport,
    /// Constant from integrating out the half-order field.
    #[serde(skip_serializing_if = "Option::is_none")]
    log_c: Option<f64>,
    /// Log normalisation of the joint `(q0, q_half)` Gaussian.
    #[serde(skip_serializing_if = "Option::is_none")]
    joint_log_det: Option<f64>,
}

/// Zero values on the first `per_side` coordinates at both ends.
fn homogeneous(lag: &LagrangianSpec) -> BoundaryData {
    let zero = Complex64::new(0.0, 0.0);
    let side = || (0..lag.boundary_count_per_side()).map(|l| (l, zero)).collect();
    BoundaryData::new(side(), side())
}

fn system_name(kind: SystemKind) -> &'static str {
    match kind {
        SystemKind::Pu => "pu",
        SystemKind::Damped => "damped",
        SystemKind::Custom => "custom",
    }
}

fn cmd_kernel(cfg: &RunConfig, out: bool) -> Result<Output> {
    let lag = cfg.lagrangian()?;
    let grid = cfg.grid()?;
    let auto = cfg.kernel.mode == KernelMode::Auto;
    let mut k = KernelOutput {
        system: system_name(cfg.system),
        method: "direct",
        report: SpectralReport::default(),
        log_c: None,
        joint_log_det: None,
    };
    match cfg.system {
        SystemKind::Pu if auto && lag.ladder() == [0.0, 1.0, 2.0] => {
            if cfg.boundary.is_some() {
                return Err(Error::Config("the PU mode split uses zero Dirichlet data; drop \"boundary\"".into()));
            }
            k.method = "mode_split";
            let (eps, w) = (cfg.real_param("eps", 0.1), cfg.real_param("w", 1.0));
            k.report = pu_spectral_report(eps, w, &grid, &cfg.correlator)?;
        }
        SystemKind::Damped if auto => {
            let bc = cfg.boundary().unwrap_or_else(|| BoundaryData::dirichlet(0.0, 0.0));
            let m = marginalize_auxiliary(&lag, &grid, &bc)?;
            k.method = "marginalized";
            k.report = correlator(&m.effective, &cfg.correlator)?;
            k.report.log_det += m.log_c;
            k.report.notes.push(format!("{} half-order samples integrated out", m.auxiliary_count()));
            k.log_c = Some(m.log_c);
            k.joint_log_det = Some(m.joint_log_det()?);
        }
        _ => {
            let bc = cfg.boundary().unwrap_or_else(|| homogeneous(&lag));
            let form = euclidean_quadratic_form(&lag, &grid, &bc)?;
            k.report = correlator(&form, &cfg.correlator)?;
            k.report.notes.extend(form.metadata.notes.iter().cloned());
        }
    }
    let text = json(&k);
    let files = if out { vec![(PathBuf::from("kernel.json"), text.clone())] } else { Vec::new() };
    Ok(Output { stdout: text, files })
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    alpha: f64,
    file: String,
    sup_distance: f64,
    unknowns: usize,
    pivot_ratio: f64,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    reference_alpha: f64,
    entries: Vec<SweepEntry>,
    /// Sup-distance non-decreasing in `|alpha - reference|`.
    monotone: bool,
}

fn sweep_file(alpha: f64) -> String {
    format!("trajectory_alpha_{alpha}.csv")
}

fn cmd_sweep(cfg: &RunConfig, out: bool) -> Result<Output> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config("sweep needs a \"sweep\" section".into()))?;
    if !out {
        return Err(Error::Config("sweep writes one file per alpha; pass --out or set \"out\"".into()));
    }
    let reference_alpha = sweep.reference.unwrap_or(sweep.alphas[0]);
    let mut files = Vec::new();
    let mut paths = Vec::new();
    for &alpha in &sweep.alphas {
        let lag = cfg.lagrangian_at(alpha)?;
        let (path, summary) = solve_one(cfg, &lag)?;
        files.push((PathBuf::from(sweep_file(alpha)), trajectory_csv(&lag, &path)?));
        paths.push((alpha, path, summary));
    }
    let reference = match paths.iter().find(|(a, _, _)| *a == reference_alpha) {
        Some((_, p, _)) => p.clone(),
        None => solve_one(cfg, &cfg.lagrangian_at(reference_alpha)?)?.0,
    };
    let entries: Vec<SweepEntry> = paths
        .iter()
        .map(|(alpha, path, s)| SweepEntry {
            alpha: *alpha,
            file: sweep_file(*alpha),
            sup_distance: sup_distance(path, &reference),
            unknowns: s.solver.unknowns,
            pivot_ratio: s.solver.pivot_ratio,
        })
        .collect();
    let mut order: Vec<&SweepEntry> = entries.iter().collect();
    order.sort_by(|a, b| (a.alpha - reference_alpha).abs().total_cmp(&(b.alpha - reference_alpha).abs()));
    let monotone = order.windows(2).all(|w| w[1].sup_distance >= w[0].sup_distance);
    let text = json(&SweepSummary { reference_alpha, entries, monotone });
    files.push((PathBuf::from("sweep_summary.json"), text.clone()));
    Ok(Output { stdout: text, files })
}
