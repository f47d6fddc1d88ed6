//! Euclidean kernels: oscillator gap, PU modes and the damped marginalisation.

use fracmech::fracops::UniformGrid;
use fracmech::lagrangian::LagrangianSpec;
use fracmech::pathint::{
    correlator, euclidean_quadratic_form, gaussian_log_det, marginalize_auxiliary, pu_mode_split, pu_spectral_report,
    CorrelatorOptions,
};
use fracmech::solver::BoundaryData;

fn main() -> fracmech::Result<()> {
    let g = UniformGrid::new(0.0, 40.0, 2000)?;
    let opts = CorrelatorOptions::default();
    let bc = BoundaryData::dirichlet(0.0, 0.0);

    for w in [0.5, 1.0, 2.0] {
        let form = euclidean_quadratic_form(&LagrangianSpec::harmonic(1.0, 1.0, w * w)?, &g, &bc)?;
        let r = correlator(&form, &opts)?;
        println!("oscillator w = {w}: gap {:.5}, log K = {:.4}", r.gap_estimates[0], r.log_det);
    }

    let split = pu_mode_split(0.1, 1.0)?;
    println!("PU weights: slow {:.6}, fast {:.6}", split.slow_weight, split.fast_weight);
    let r = pu_spectral_report(0.1, 1.0, &g, &opts)?;
    println!("PU gaps {:?}", r.gap_estimates);

    let small = UniformGrid::new(0.0, 10.0, 1001)?;
    for k in [0.0, 4.0] {
        let m = marginalize_auxiliary(&LagrangianSpec::damped(1.0, 0.5, k)?, &small, &bc)?;
        let eff = gaussian_log_det(&m.effective.a)?;
        println!(
            "damped k = {k}: log C = {:.6}, effective {:.6}, joint {:.6}",
            m.log_c,
            eff,
            m.joint_log_det()?
        );
    }
    Ok(())
}
