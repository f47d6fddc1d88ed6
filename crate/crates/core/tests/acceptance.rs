//! Acceptance suite: one line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails when a criterion fails, unless every failing check of that
//! criterion is listed in `KNOWN_ISSUES` (see the README).

use num_complex::Complex64;
use std::time::{Duration, Instant};

use fracmech::basis::dual_pairing;
use fracmech::commands::{run, Command};
use fracmech::config::RunConfig;
use fracmech::dsl::{parse, same_polynomial, Expr, Params};
use fracmech::fracops::{left_rl_deriv, rl_power_rule, FracOrder, SampledPath, UniformGrid};
use fracmech::lagrangian::LagrangianSpec;
use fracmech::pathint::{
    correlator, euclidean_quadratic_form, gaussian_log_det, kernel_log_det, marginalize_auxiliary, pu_spectral_report,
    CorrelatorOptions,
};
use fracmech::solver::{max_error, solve_stationary, BoundaryData, SolverOptions};
use fracmech::special::gamma;
use fracmech::variational::{momenta_symbolic, reduced_hamiltonian, relative_variation};

const LN_2PI: f64 = 1.8378770664093453;

/// Checks that are expected to fail, with the reason.
const KNOWN_ISSUES: &[(&str, &str)] = &[
    (
        "6.relative",
        "x = sin t + 0.1 sin 10t has PU mode energies +0.495 and -0.495, so H(t) = 0 exactly and \
         max|H - H(0)|/|H(0)| divides discretisation error by discretisation error",
    ),
    ("6.shrinks", "same ratio as 6.relative"),
];

struct Check {
    id: &'static str,
    ok: bool,
    detail: String,
}

fn check(id: &'static str, ok: bool, detail: impl Into<String>) -> Check {
    Check { id, ok, detail: detail.into() }
}

struct Criterion {
    number: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Vec<Check>,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|&(k, v)| (k.to_string(), c(v))).collect()
}

fn criterion_1() -> Vec<Check> {
    let order = FracOrder::new(0.5).unwrap();
    let err = |n: usize| {
        let g = UniformGrid::new(0.0, 1.0, n).unwrap();
        let x = SampledPath::from_real_fn(g, |t| t.powf(2.5)).unwrap();
        let d = left_rl_deriv(&x, order);
        d.reliable_range()
            .map(|i| (d.values()[i] - rl_power_rule(2.5, order, g.t(i)).unwrap()).norm())
            .fold(0.0, f64::max)
    };
    let (e256, e512) = (err(256), err(512));
    let ratio = e512 / e256;
    vec![check("1.ratio", ratio <= 0.6, format!("err(256) = {e256:.3e}, err(512) = {e512:.3e}, ratio {ratio:.3}"))]
}

fn criterion_2() -> Vec<Check> {
    let mut worst = 0.0f64;
    let mut cancel = 0.0f64;
    for alpha in [0.0, 0.25, 0.5, 0.75] {
        for m in 0..=6 {
            for mp in 0..=6 {
                let delta = if m == mp { 1.0 } else { 0.0 };
                worst = worst.max((dual_pairing(m, mp, alpha).unwrap() - c(delta)).norm());
                if mp >= m {
                    // power rule on s^{alpha_m'} / Gamma(alpha_m' + 1) at s = 1
                    let am = m as f64 + alpha;
                    let amp = mp as f64 + alpha;
                    let v = rl_power_rule(amp, FracOrder::new(am).unwrap(), 1.0).unwrap() / gamma(amp + 1.0);
                    cancel = cancel.max((v - c(1.0 / gamma((mp - m) as f64 + 1.0))).norm());
                }
            }
        }
    }
    vec![
        check("2.delta", worst <= 1e-12, format!("max |pairing - delta| = {worst:.1e}")),
        check("2.power_rule", cancel <= 1e-12, format!("power-rule coefficient mismatch {cancel:.1e}")),
    ]
}

fn golden_lines(text: &str) -> Vec<(String, Expr)> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (k, v) = l.split_once(" = ").expect("`name = expr` line");
            (k.trim().to_string(), parse(v).expect("parseable expression"))
        })
        .collect()
}

fn compare_derive(system: &str, golden: &str) -> Check {
    let cfg = RunConfig::from_json(&format!(r#"{{"schema": 1, "system": "{system}"}}"#)).unwrap();
    let out = run(Command::Derive, &cfg, false).unwrap();
    let got = golden_lines(&out.stdout);
    let want = golden_lines(golden);
    let mismatched: Vec<String> = want
        .iter()
        .filter(|(k, e)| !got.iter().any(|(gk, ge)| gk == k && same_polynomial(ge, e, 1e-14)))
        .map(|(k, _)| k.clone())
        .collect();
    let ok = mismatched.is_empty() && got.len() == want.len();
    let detail = if ok { format!("{system}: {} lines match", want.len()) } else { format!("{system}: mismatch in {mismatched:?}") };
    check(if system == "pu" { "3.pu" } else { "3.damped" }, ok, detail)
}

fn criterion_3() -> Vec<Check> {
    vec![
        compare_derive("pu", include_str!("golden/derive_pu.txt")),
        compare_derive("damped", include_str!("golden/derive_damped.txt")),
    ]
}

fn criterion_4() -> Vec<Check> {
    // classical n = 2: p1 = dL/dx' - d/dt dL/dx'', p2 = dL/dx''
    let text = "a*q1^2 + b*q0*q2 + c*q2^2 + e*q1*q2 + f*q0*q1 + h*q0^3";
    let p = params(&[("a", 0.7), ("b", -1.1), ("c", 0.3), ("e", 2.5), ("f", 0.9), ("h", 0.2)]);
    let lag = LagrangianSpec::from_text(text, 1.0, vec![0.0, 1.0, 2.0], p).unwrap();
    let mom = momenta_symbolic(&lag);
    // dL/dx' = 2a x' + e x'' + f x ; dL/dx'' = b x + 2c x'' + e x'
    // d/dt dL/dx'' = b x' + 2c x''' + e x''
    let p1 = parse("2*a*q1 + e*q2 + f*q0 - (b*q1 + 2*c*d(3) + e*q2)").unwrap();
    let p2 = parse("b*q0 + 2*c*q2 + e*q1").unwrap();
    let ok1 = same_polynomial(&mom[0], &p1, 1e-14);
    let ok2 = same_polynomial(&mom[1], &p2, 1e-14);
    vec![
        check("4.p1", ok1, format!("p0 = {}", mom[0])),
        check("4.p2", ok2, format!("p1 = {}", mom[1])),
    ]
}

fn pu_solution(n: usize) -> (LagrangianSpec, SampledPath, f64) {
    let (eps, w) = (0.1, 1.0);
    let f = |t: f64| (w * t).sin() + 0.1 * (t / eps).sin();
    let fp = |t: f64| w * (w * t).cos() + 0.1 / eps * (t / eps).cos();
    let lag = LagrangianSpec::pais_uhlenbeck(1.0, eps, w).unwrap();
    let t_end = std::f64::consts::PI;
    let g = UniformGrid::new(0.0, t_end, n).unwrap();
    let bc = BoundaryData::new(vec![(0, c(f(0.0))), (1, c(fp(0.0)))], vec![(0, c(f(t_end))), (1, c(fp(t_end)))]);
    let x = solve_stationary(&lag, &g, &bc, &SolverOptions::default()).unwrap();
    let err = max_error(&x, f);
    (lag, x, err)
}

fn criterion_5() -> Vec<Check> {
    // (a) x(0) = 0 with the end momentum x'(T) fixed: Dirichlet data at three
    // full periods would be homogeneous and resonant
    let w = 1.0;
    let t_end = 3.0 * 2.0 * std::f64::consts::PI / w;
    let sho = LagrangianSpec::harmonic(1.0, 1.0, w * w).unwrap();
    let g = UniformGrid::new(0.0, t_end, 2000).unwrap();
    let bc = BoundaryData::new(vec![(0, c(0.0))], vec![]).with_momenta(vec![], vec![(0, c(w * (w * t_end).cos()))]);
    let xa = solve_stationary(&sho, &g, &bc, &SolverOptions::default()).unwrap();
    let ea = max_error(&xa, |t| (w * t).sin());

    let (_, _, eb) = pu_solution(4000);

    let (m, gam, k) = (1.0, 0.5, 4.0);
    let damped = LagrangianSpec::damped(m, gam, k).unwrap();
    let wd = (k / m - gam * gam / (4.0 * m * m)).sqrt();
    let exact = |t: f64| (-gam * t / (2.0 * m)).exp() * (wd * t).sin();
    let g = UniformGrid::new(0.0, 10.0, 2000).unwrap();
    let xc = solve_stationary(&damped, &g, &BoundaryData::dirichlet(0.0, exact(10.0)), &SolverOptions::default()).unwrap();
    let ec = max_error(&xc, exact);
    let scale = xc.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let im = xc.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;
    vec![
        check("5a", ea < 5e-3, format!("SHO max error {ea:.2e}")),
        check("5b", eb < 2e-2, format!("PU max error {eb:.2e}")),
        check("5c", ec < 2e-2 && im < 1e-6, format!("damped max error {ec:.2e}, relative imaginary part {im:.1e}")),
    ]
}

fn criterion_6() -> Vec<Check> {
    let pu_var = |n: usize| {
        let (lag, x, _) = pu_solution(n);
        let h = reduced_hamiltonian(&lag, &x).unwrap().sampled;
        let r = h.reliable_range();
        let v = &h.values()[r];
        let abs = v.iter().map(|z| (z - v[0]).norm()).fold(0.0, f64::max);
        (relative_variation(&h), abs)
    };
    let (r2, a2) = pu_var(2000);
    let (r4, a4) = pu_var(4000);
    let sho_var = |alpha: f64| {
        let lag = LagrangianSpec::harmonic(alpha, 1.0, 1.0).unwrap();
        let g = UniformGrid::new(0.0, 10.0, 4000).unwrap();
        let x = solve_stationary(&lag, &g, &BoundaryData::dirichlet(0.0, 10f64.sin()), &SolverOptions::default()).unwrap();
        relative_variation(&reduced_hamiltonian(&lag, &x).unwrap().sampled)
    };
    let (v1, v09) = (sho_var(1.0), sho_var(0.9));
    vec![
        check("6.relative", r4 < 1e-2, format!("PU relative variation at n=4000: {r4:.3e} (|H - H0| max {a4:.2e})")),
        check("6.shrinks", r4 < r2, format!("n=2000: {r2:.3e} (|H - H0| max {a2:.2e})")),
        check("6.absolute_shrinks", a4 < a2, format!("absolute variation {a2:.2e} -> {a4:.2e}")),
        check("6.fractional", v09 > 10.0 * v1, format!("SHO alpha=0.9: {v09:.3e} vs alpha=1: {v1:.3e}")),
    ]
}

/// `log |det|` of a symmetric tridiagonal matrix with constant off-diagonal,
/// from the recursion `D_k = d_k D_{k-1} - e^2 D_{k-2}` carried as ratios
/// `r_k = D_k / D_{k-1}`.
fn tridiagonal_log_det(diag: &[f64], off: f64) -> f64 {
    let mut r = diag[0];
    let mut log = r.abs().ln();
    for &d in &diag[1..] {
        r = d - off * off / r;
        log += r.abs().ln();
    }
    log
}

/// Euclidean SHO on Dirichlet data: `dt sum (m/2 (dx/dt)^2 + k/2 x^2)` over
/// the interior samples.
fn sho_oracle(m: f64, k: f64, n: usize, dt: f64) -> (Vec<f64>, f64) {
    (vec![2.0 * m / dt + k * dt; n - 2], -m / dt)
}

fn criterion_7() -> Vec<Check> {
    let (m, k) = (1.3, 2.0);
    let g = UniformGrid::new(0.0, 5.0, 1500).unwrap();
    let form = euclidean_quadratic_form(&LagrangianSpec::harmonic(1.0, m, k).unwrap(), &g, &BoundaryData::dirichlet(0.0, 0.0)).unwrap();
    let (diag, off) = sho_oracle(m, k, g.len(), g.dt());
    let oracle = -0.5 * tridiagonal_log_det(&diag, off) + 0.5 * diag.len() as f64 * LN_2PI;
    let got = kernel_log_det(&form).unwrap();
    let recursion = (got - oracle).abs();

    let gam = 0.5;
    let mut ident = 0.0f64;
    let mut formula = 0.0f64;
    let mut logc = Vec::new();
    for kk in [0.0, 4.0] {
        let lag = LagrangianSpec::damped(1.0, gam, kk).unwrap();
        let mg = marginalize_auxiliary(&lag, &g, &BoundaryData::dirichlet(0.0, 0.0)).unwrap();
        let n = mg.auxiliary_count();
        let expected_c = 0.5 * n as f64 * (LN_2PI - (gam * g.dt()).ln());
        formula = formula.max((mg.log_c - expected_c).abs());
        // independent joint matrix: tridiagonal q0 block plus gamma dt on the half-order samples
        let (d, o) = sho_oracle(1.0, kk, g.len(), g.dt());
        let joint = -0.5 * (tridiagonal_log_det(&d, o) + n as f64 * (gam * g.dt()).ln()) + n as f64 * LN_2PI;
        let eff = gaussian_log_det(&mg.effective.a).unwrap();
        ident = ident.max((joint - (eff + mg.log_c)).abs()).max((mg.joint_log_det().unwrap() - joint).abs());
        logc.push(mg.log_c);
    }
    let invariant = (logc[0] - logc[1]).abs();
    vec![
        check("7.recursion", recursion <= 1e-8, format!("|kernel_log_det - recursion| = {recursion:.1e}")),
        check("7.marginal", ident <= 1e-8 && formula <= 1e-8, format!("identity {ident:.1e}, log_C formula {formula:.1e}")),
        check("7.invariant", invariant <= 1e-8, format!("log_C = {:.6} for V = 0 and V = k q0^2/2 (diff {invariant:.1e})", logc[0])),
    ]
}

fn criterion_8() -> Vec<Check> {
    let w = 1.0;
    let g = UniformGrid::new(0.0, 40.0 / w, 2000).unwrap();
    let sho = LagrangianSpec::harmonic(1.0, 1.0, w * w).unwrap();
    let form = euclidean_quadratic_form(&sho, &g, &BoundaryData::dirichlet(0.0, 0.0)).unwrap();
    let rate = correlator(&form, &CorrelatorOptions::default()).unwrap().gap_estimates[0];
    let (eps, pw) = (0.1, 1.0);
    let pu = pu_spectral_report(eps, pw, &g, &CorrelatorOptions::default()).unwrap();
    let (slow, fast) = (pu.gap_estimates[0], pu.gap_estimates[1]);
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    vec![
        check("8.sho", rel(rate, w) < 0.02, format!("SHO gap {rate:.5} vs {w}")),
        check(
            "8.pu",
            rel(slow, pw) < 0.02 && rel(fast, 1.0 / eps) < 0.02,
            format!("PU gaps {slow:.5}, {fast:.4} vs {pw}, {}", 1.0 / eps),
        ),
    ]
}

fn main() {
    let criteria = [
        Criterion { number: 1, title: "GL convergence", budget: Duration::from_secs(1), run: criterion_1 },
        Criterion { number: 2, title: "biorthogonality", budget: Duration::from_secs(1), run: criterion_2 },
        Criterion { number: 3, title: "symbolic reproduction", budget: Duration::from_secs(1), run: criterion_3 },
        Criterion { number: 4, title: "integer-limit Ostrogradski", budget: Duration::from_secs(1), run: criterion_4 },
        Criterion { number: 5, title: "classical solutions", budget: Duration::from_secs(30), run: criterion_5 },
        Criterion { number: 6, title: "Hamiltonian behaviour", budget: Duration::from_secs(30), run: criterion_6 },
        Criterion { number: 7, title: "kernel identities", budget: Duration::from_secs(5), run: criterion_7 },
        Criterion { number: 8, title: "spectral gaps", budget: Duration::from_secs(10), run: criterion_8 },
    ];
    let mut unexpected = 0;
    for cr in &criteria {
        let start = Instant::now();
        let checks = (cr.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= cr.budget;
        let failed: Vec<&Check> = checks.iter().filter(|c| !c.ok).collect();
        let pass = failed.is_empty() && in_time;
        let known = !pass && in_time && failed.iter().all(|c| KNOWN_ISSUES.iter().any(|(id, _)| *id == c.id));
        if !pass && !known {
            unexpected += 1;
        }
        let status = if pass { "PASS" } else if known { "FAIL (known)" } else { "FAIL" };
        println!("criterion {}: {status} {} [{:.2?} of {:?}]", cr.number, cr.title, elapsed, cr.budget);
        for ch in &checks {
            println!("    {} {}: {}", if ch.ok { "ok  " } else { "FAIL" }, ch.id, ch.detail);
            if !ch.ok {
                if let Some((_, why)) = KNOWN_ISSUES.iter().find(|(id, _)| *id == ch.id) {
                    println!("         known: {why}");
                }
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
