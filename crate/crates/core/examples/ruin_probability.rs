//! Undiscounted Parisian ruin probability with no upper barrier, for a few
//! Parisian rates, with and without the Brownian component.

use parisian::formulas::{ruin_probability, sweep};
use parisian::{DrawdownSpec, ModelParams, QuadratureConfig};

fn main() -> parisian::Result<()> {
    let xi = DrawdownSpec::linear(0.8)?;
    let quad = QuadratureConfig::default();
    let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
    for sigma in [0.0, 0.2] {
        let model = ModelParams::insurance_example(sigma);
        for lambda in [0.1, 0.2, 0.5] {
            let p = sweep(&xs, |x| ruin_probability(x, lambda, &model, &xi, &quad))?;
            let row: Vec<String> = p.iter().map(|v| format!("{v:.5}")).collect();
            println!("sigma={sigma} lambda={lambda}: {}", row.join(" "));
        }
    }
    Ok(())
}
