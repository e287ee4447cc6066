//! Monte Carlo estimates next to the formulas, for the compound-Poisson
//! model (exact event-driven paths) and the jump-diffusion (adaptive steps).
//! Run with `--release`; the diffusive case takes a few seconds.

use parisian::formulas::{exit_pair, expected_injections, joint_laplace_g, ruin_probability};
use parisian::quadrature::adaptive_pieces;
use parisian::simulator::{estimate_many, killed_position_histogram, Functional, SimConfig};
use parisian::{DrawdownSpec, ModelParams, Query, Resolvent, TransformSpec};

fn main() -> parisian::Result<()> {
    let xi = DrawdownSpec::linear(0.8)?;
    let (x, b, lambda) = (1.0, 3.0, 0.2);
    let functionals =
        [Functional::UpcrossLaplace, Functional::RuinLaplace, Functional::RuinProb, Functional::VXi, Functional::JointG { u: 0.1, v: 0.3 }];
    for (sigma, n) in [(0.0, 100_000), (0.2, 10_000)] {
        let model = ModelParams::insurance_example(sigma);
        let q = Query::new(model, xi.clone(), TransformSpec::new(0.05, lambda)?, x, b);
        let tilted = Query { transform: TransformSpec::with_tilts(0.05, lambda, 0.1, 0.3)?, ..q.clone() };
        let (up, ruin) = exit_pair(&q)?;
        let formula = [
            up,
            ruin,
            ruin_probability(x, lambda, &model, &xi, &q.quad)?,
            expected_injections(&q)?,
            joint_laplace_g(&tilted)?,
        ];
        let sim = SimConfig { n_paths: n, seed: 1, ..Default::default() };
        let est = estimate_many(&q, &sim, &functionals)?;
        println!("sigma = {sigma}, {n} paths");
        for ((f, e), v) in functionals.iter().zip(&est).zip(formula) {
            println!("  {:<28} mc {:.5} ± {:.5}   formula {:.5}   z = {:+.2}", format!("{f:?}"), e.mean, e.std_error, v, e.z_score(v));
        }
    }

    // killed occupation histogram against the density
    let q = Query::new(ModelParams::insurance_example(0.0), xi, TransformSpec::new(0.05, lambda)?, x, b);
    let edges: Vec<f64> = (0..=12).map(|i| 0.8 + 0.2 * i as f64).collect();
    let h = killed_position_histogram(&q, &SimConfig { n_paths: 100_000, seed: 2, ..Default::default() }, &edges)?;
    let r = Resolvent::new(&q)?;
    let pts = r.breakpoints();
    println!("bin        mc density        formula (bin average)");
    for (i, e) in edges.windows(2).enumerate() {
        let mass = adaptive_pieces(|u| r.density(u), e[0], e[1], &pts, 1e-10, 1e-8)?;
        println!("[{:.1},{:.1})  {:.4} ± {:.4}   {:.4}", e[0], e[1], h.density[i], h.std_error[i], mass / (e[1] - e[0]));
    }
    Ok(())
}
