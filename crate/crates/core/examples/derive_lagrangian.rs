//! Symbolic Euler-Lagrange expression, momenta and reduced Hamiltonian.

use fracmech::dsl::Params;
use fracmech::lagrangian::{uniform_ladder, LagrangianSpec};
use fracmech::variational::derive;
use num_complex::Complex64;

fn show(name: &str, lag: &LagrangianSpec) -> fracmech::Result<()> {
    let d = derive(lag)?;
    println!("{name}  (ladder {:?}, {:?})", lag.ladder(), lag.convention());
    println!("  EL = {}", d.euler_lagrange);
    for (k, p) in d.momenta.iter().enumerate() {
        println!("  p{k} = {p}");
    }
    println!("  H  = {}\n", d.hamiltonian);
    Ok(())
}

fn main() -> fracmech::Result<()> {
    show("Pais-Uhlenbeck", &LagrangianSpec::pais_uhlenbeck(1.0, 0.1, 1.0)?)?;
    show("Pais-Uhlenbeck, alpha = 0.6", &LagrangianSpec::pais_uhlenbeck(0.6, 0.1, 1.0)?)?;
    show("damped", &LagrangianSpec::damped(1.0, 0.5, 4.0)?)?;

    let mut params = Params::new();
    params.insert("lam".into(), Complex64::new(0.3, 0.0));
    let text = "0.5*q1^2 - 0.5*q0^2 - lam*q0^4";
    show(text, &LagrangianSpec::from_text(text, 0.8, uniform_ladder(0.8, 1), params)?)
}
