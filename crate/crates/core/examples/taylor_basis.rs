//! Fractional Taylor basis: pairing table and a projected series.

use fracmech::basis::{dual_pairing, project, reconstruct, TruncationWindow};
use num_complex::Complex64;

fn main() -> fracmech::Result<()> {
    let alpha = 0.5;
    println!("<e^m, e_m'> for alpha = {alpha}");
    for m in 0..5 {
        let row: Vec<String> = (0..5).map(|mp| format!("{:.0}", dual_pairing(m, mp, alpha).unwrap().re)).collect();
        println!("  {}", row.join(" "));
    }

    // f = 2 s^0.5 - s^2.5 lives on the ladder m + 0.5
    let f = [(0.5, Complex64::new(2.0, 0.0)), (2.5, Complex64::new(-1.0, 0.0))];
    let series = project(&f, alpha, TruncationWindow::default())?;
    for (m, c) in series.coeffs() {
        println!("c_{m} = {:.6}", c.re);
    }
    for lambda in [0.1, 0.5, 1.0] {
        let exact = 2.0 * f64::powf(lambda, 0.5) - f64::powf(lambda, 2.5);
        println!("lambda = {lambda}: series {:.12}, exact {exact:.12}", reconstruct(&series, lambda)?.re);
    }
    Ok(())
}
