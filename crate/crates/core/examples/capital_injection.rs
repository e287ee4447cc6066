//! Expected discounted capital injections, up to a barrier and with none.

use parisian::formulas::expected_injections;
use parisian::{DrawdownSpec, ModelParams, Query, TransformSpec};

fn main() -> parisian::Result<()> {
    let t = TransformSpec::new(0.05, 0.2)?;
    for (label, xi) in [("linear 0.8", DrawdownSpec::linear(0.8)?), ("capped 1.0/0.8", DrawdownSpec::capped(1.0, 0.8)?)] {
        let model = ModelParams::insurance_example(0.2);
        println!("xi = {label}");
        println!("{:>5} {:>14} {:>14}", "x", "V(x; b=5)", "V(x; inf)");
        for x in [0.5, 1.0, 2.0, 3.0, 4.0, 5.0] {
            let finite = expected_injections(&Query::new(model, xi.clone(), t, x, 5.0))?;
            let unbounded = expected_injections(&Query::new(model, xi.clone(), t, x, f64::INFINITY))?;
            println!("{x:>5.1} {finite:>14.8} {unbounded:>14.8}");
        }
    }
    Ok(())
}
