//! Joint transform of exit time, final surplus and total injections,
//! `E[e^{-qT + u U(T) - v R(T)}]`, for a few tilts.

use parisian::formulas::{joint_laplace_g, u_xi};
use parisian::{DrawdownSpec, ModelParams, Query, TransformSpec};

fn main() -> parisian::Result<()> {
    let model = ModelParams::insurance_example(0.2);
    let xi = DrawdownSpec::linear(0.8)?;
    let (x, b) = (1.0, 3.0);
    for (u, v) in [(0.0, 0.0), (0.1, 0.0), (0.0, 0.3), (0.1, 0.3), (0.5, 2.0)] {
        let q = Query::new(model, xi.clone(), TransformSpec::with_tilts(0.05, 0.2, u, v)?, x, b);
        println!("u={u:<4} v={v:<4} G = {:.12}", joint_laplace_g(&q)?);
    }
    let plain = Query::new(model, xi, TransformSpec::new(0.05, 0.2)?, x, b);
    println!("u_xi        = {:.12}  (equals G at u = v = 0)", u_xi(&plain)?);
    Ok(())
}
