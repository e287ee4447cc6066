//! Non-linear draw-down functions: a user closure and a tabulated curve.

use parisian::formulas::{exit_pair, expected_injections};
use parisian::{DrawdownSpec, ModelParams, Query, TransformSpec};

fn main() -> parisian::Result<()> {
    let model = ModelParams::insurance_example(0.2);
    let t = TransformSpec::new(0.05, 0.2)?;
    // tolerance grows like sqrt(x)
    let sqrt = DrawdownSpec::custom(|x| x - 0.3 * x.sqrt(), 1e-6, 50.0, vec![], "x - 0.3 sqrt(x)")?;
    let table = DrawdownSpec::tabulated(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 0.7, 1.2, 2.0], 1e-6)?;
    for (name, xi) in [("sqrt", sqrt), ("table", table)] {
        for x in [0.5, 1.5, 2.5] {
            let q = Query::new(model, xi.clone(), t, x, 3.0);
            let (up, ruin) = exit_pair(&q)?;
            println!("{name:>5} x={x}: upcross={up:.8} ruin={ruin:.8} V={:.8}", expected_injections(&q)?);
        }
    }
    // a draw-down level that reaches the surplus is rejected
    let bad = DrawdownSpec::custom(|x| 1.2 * x - 0.5, 1e-6, 10.0, vec![], "bad");
    println!("invalid xi -> {}", bad.err().map(|e| e.to_string()).unwrap_or_default());
    Ok(())
}
