//! Occupation density of the killed process, and the check that the killed
//! mass plus the survival transform adds up to one.

use parisian::formulas::u_xi;
use parisian::{DrawdownSpec, ModelParams, Query, Resolvent, TransformSpec};

fn main() -> parisian::Result<()> {
    let q = Query::new(
        ModelParams::insurance_example(0.2),
        DrawdownSpec::linear(0.8)?,
        TransformSpec::new(0.05, 0.2)?,
        1.0,
        3.0,
    );
    let r = Resolvent::new(&q)?;
    println!("non-smooth points: {:?}", r.breakpoints());
    for i in 0..=24 {
        let u = 0.7 + 2.4 * i as f64 / 24.0;
        println!("u={u:.2}  density={:.8}", r.density(u)?);
    }
    let mass = r.killed_mass()?;
    let survive = u_xi(&q)?;
    println!("q * mass = {mass:.12}, u_xi = {survive:.12}, sum = {:.12}", mass + survive);
    Ok(())
}
