//! Stationary trajectories of the oscillator, Pais-Uhlenbeck and damped systems.

use fracmech::fracops::UniformGrid;
use fracmech::lagrangian::LagrangianSpec;
use fracmech::solver::{max_error, solve_stationary_with_report, BoundaryData, SolverOptions};
use num_complex::Complex64;
use std::f64::consts::PI;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn main() -> fracmech::Result<()> {
    let opts = SolverOptions::default();

    // three periods: x(0) = 0 and the end momentum x'(T) = 1
    let t = 6.0 * PI;
    let sho = LagrangianSpec::harmonic(1.0, 1.0, 1.0)?;
    let bc = BoundaryData::new(vec![(0, c(0.0))], vec![]).with_momenta(vec![], vec![(0, c(1.0))]);
    let s = solve_stationary_with_report(&sho, &UniformGrid::new(0.0, t, 2000)?, &bc, &opts)?;
    println!("oscillator      error {:.2e}  {:?}", max_error(&s.path, f64::sin), s.report);

    let f = |t: f64| t.sin() + 0.1 * (10.0 * t).sin();
    let fp = |t: f64| t.cos() + (10.0 * t).cos();
    let pu = LagrangianSpec::pais_uhlenbeck(1.0, 0.1, 1.0)?;
    let bc = BoundaryData::new(vec![(0, c(f(0.0))), (1, c(fp(0.0)))], vec![(0, c(f(PI))), (1, c(fp(PI)))]);
    let s = solve_stationary_with_report(&pu, &UniformGrid::new(0.0, PI, 4000)?, &bc, &opts)?;
    println!("Pais-Uhlenbeck  error {:.2e}", max_error(&s.path, f));

    let damped = LagrangianSpec::damped(1.0, 0.5, 4.0)?;
    let wd = (4.0f64 - 0.0625).sqrt();
    let exact = |t: f64| (-0.25 * t).exp() * (wd * t).sin();
    let s = solve_stationary_with_report(&damped, &UniformGrid::new(0.0, 10.0, 2000)?, &BoundaryData::dirichlet(0.0, exact(10.0)), &opts)?;
    println!("damped          error {:.2e}", max_error(&s.path, exact));

    // x(0) = x(pi) = 0 admits every multiple of sin t
    let g = UniformGrid::new(0.0, PI, 201)?;
    match solve_stationary_with_report(&sho, &g, &BoundaryData::dirichlet(0.0, 0.0), &opts) {
        Err(e) => println!("resonant data   {e}"),
        Ok(_) => println!("resonant data   solved?"),
    }
    Ok(())
}
