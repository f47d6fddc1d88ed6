//! Oscillator solutions and energy drift as alpha moves away from 1.

use fracmech::fracops::UniformGrid;
use fracmech::lagrangian::LagrangianSpec;
use fracmech::solver::{solve_stationary, sup_distance, BoundaryData, SolverOptions};
use fracmech::variational::{reduced_hamiltonian, relative_variation};

fn main() -> fracmech::Result<()> {
    let g = UniformGrid::new(0.0, 10.0, 1000)?;
    let bc = BoundaryData::dirichlet(0.0, 10f64.sin());
    let opts = SolverOptions::default();
    let solve = |alpha: f64| -> fracmech::Result<_> {
        let lag = LagrangianSpec::harmonic(alpha, 1.0, 1.0)?;
        let x = solve_stationary(&lag, &g, &bc, &opts)?;
        let h = reduced_hamiltonian(&lag, &x)?;
        Ok((x, relative_variation(&h.sampled)))
    };
    let (reference, _) = solve(1.0)?;
    println!("alpha  sup|x - x_1|  H variation");
    for alpha in [1.0, 0.99, 0.95, 0.9, 0.8] {
        let (x, dh) = solve(alpha)?;
        println!("{alpha:5}  {:.4e}    {dh:.3e}", sup_distance(&x, &reference));
    }
    Ok(())
}
