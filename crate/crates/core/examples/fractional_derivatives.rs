//! Grünwald-Letnikov derivatives of `t^2.5` against the power rule.

use fracmech::fracops::{left_rl_deriv, rl_power_rule, FracOrder, SampledPath, UniformGrid};

fn main() -> fracmech::Result<()> {
    println!("order      n     max error");
    for order in [0.25, 0.5, 1.0, 1.5] {
        let o = FracOrder::new(order)?;
        for n in [128, 256, 512, 1024] {
            let g = UniformGrid::new(0.0, 1.0, n)?;
            let x = SampledPath::from_real_fn(g, |t| t.powf(2.5))?;
            let d = left_rl_deriv(&x, o);
            let mut err = 0.0f64;
            for i in d.reliable_range() {
                err = err.max((d.values()[i] - rl_power_rule(2.5, o, g.t(i))?).norm());
            }
            println!("{order:5}  {n:5}  {err:.3e}");
        }
    }
    Ok(())
}
