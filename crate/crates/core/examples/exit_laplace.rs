//! Two-sided exit of the draw-down reflected process below a barrier `b`:
//! the discounted up-crossing and Parisian-ruin transforms, and their sum.

use parisian::formulas::{exit_pair, u_xi};
use parisian::{DrawdownSpec, ModelParams, Query, TransformSpec};

fn main() -> parisian::Result<()> {
    let model = ModelParams::insurance_example(0.2);
    let xi = DrawdownSpec::linear(0.8)?;
    let t = TransformSpec::new(0.05, 0.2)?;
    let b = 3.0;
    println!("{:>5} {:>14} {:>14} {:>14}", "x", "upcross", "ruin", "u_xi");
    for x in [0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
        let q = Query::new(model, xi.clone(), t, x, b);
        let (up, ruin) = exit_pair(&q)?;
        println!("{x:>5.2} {up:>14.10} {ruin:>14.10} {:>14.10}", u_xi(&q)?);
    }
    Ok(())
}
