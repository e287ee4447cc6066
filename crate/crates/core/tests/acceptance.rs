//! End-to-end acceptance checks. Runs as a plain binary so each criterion
//! prints exactly one PASS/FAIL line, then exits non-zero if any failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::time::{Duration, Instant};

use parisian::cli;
use parisian::formulas::{
    exit_pair, expected_injections, joint_laplace_g, parisian_ruin_laplace, ruin_probability, u_xi,
    upcross_laplace,
};
use parisian::simulator::{estimate_many, Estimate, Functional, SimConfig};
use parisian::{
    DrawdownSpec, KernelContext, ModelParams, QuadratureConfig, Query, Resolvent, ScaleFamily, ScaleRep,
    TransformSpec,
};

const Q: f64 = 0.05;
const LAMBDA: f64 = 0.2;
const K: f64 = 0.8;
const B: f64 = 3.0;
const XS: [f64; 3] = [0.5, 1.0, 2.0];
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;
/// Per x: formula values and the matching MC estimates.
type McRows = Vec<(f64, [f64; 5], Vec<Estimate>)>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn query(sigma: f64, x: f64, b: f64) -> Query {
    Query::new(
        ModelParams::insurance_example(sigma),
        DrawdownSpec::linear(K).unwrap(),
        TransformSpec::new(Q, LAMBDA).unwrap(),
        x,
        b,
    )
}

fn tilted(q: &Query, u: f64, v: f64) -> Query {
    let mut g = q.clone();
    g.transform = TransformSpec::with_tilts(Q, LAMBDA, u, v).unwrap();
    g
}

fn within(name: &str, got: f64, want: f64, tol: f64, worst: &mut f64) -> Result<(), String> {
    let e = rel(got, want);
    *worst = worst.max(e);
    if e <= tol {
        Ok(())
    } else {
        Err(format!("{name}: got {got:e}, want {want:e} (rel {e:.2e})"))
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let r = f()?;
    let el = t.elapsed();
    if el > limit {
        Err(format!("{r}; took {el:.2?} > {limit:?}"))
    } else {
        Ok(format!("{r}; {el:.2?}"))
    }
}

// ---------------------------------------------------------------------------

fn laplace_identity() -> Outcome {
    let model = ModelParams::insurance_example(0.2);
    let w = ScaleRep::new(&model, Q).map_err(|e| e.to_string())?;
    let phi = w.phi();
    let mut worst = 0.0f64;
    for dtheta in [0.5, 1.0, 2.0] {
        let theta = phi + dtheta;
        // integrand decays at least like e^{-dtheta x}
        let end = 80.0 / dtheta;
        let f = |x: f64| (-theta * x).exp() * w.w(x);
        let mut num = 0.0;
        let cuts = [0.0, 0.5, 2.0, 8.0, end / 4.0, end];
        for p in cuts.windows(2) {
            num += quadrature::integrate(f, p[0], p[1], 1e-14).integral;
        }
        let want = 1.0 / (model.psi(theta).unwrap() - Q);
        within(&format!("theta=Phi+{dtheta}"), num, want, 1e-6, &mut worst)?;
    }
    Ok(format!("max rel err {worst:.2e}"))
}

fn boundary_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut check = |name: &str, got: f64, want: f64| -> Result<(), String> {
        let e = (got - want).abs();
        worst = worst.max(e);
        if e <= 1e-12 {
            Ok(())
        } else {
            Err(format!("{name}: got {got:e}, want {want:e}"))
        }
    };
    for sigma in [0.0, 0.2] {
        let q = query(sigma, B, B);
        let u = 0.1;
        let g = tilted(&q, u, 0.3);
        check("upcross(b,b)", upcross_laplace(&q).map_err(|e| e.to_string())?, 1.0)?;
        check("ruin(b,b)", parisian_ruin_laplace(&q).map_err(|e| e.to_string())?, 0.0)?;
        check("G(b,b)", joint_laplace_g(&g).map_err(|e| e.to_string())?, (u * B).exp())?;
        check("V(b,b)", expected_injections(&q).map_err(|e| e.to_string())?, 0.0)?;
        let w = ScaleRep::new(&ModelParams::insurance_example(sigma), Q).map_err(|e| e.to_string())?;
        check("Z(0)", w.z(0.0), 1.0)?;
        if sigma > 0.0 {
            check("W(0)", w.w(0.0), 0.0)?;
        }
    }
    Ok(format!("max abs err {worst:.1e}"))
}

fn limit_suite() -> Outcome {
    let mut worst = 0.0f64;
    let quad = QuadratureConfig::default();
    for sigma in [0.0, 0.2] {
        let model = ModelParams::insurance_example(sigma);
        for x in XS {
            let mut big = query(sigma, x, B);
            big.transform = TransformSpec::new(Q, 1e8).unwrap();
            let classical = big.context().map_err(|e| e.to_string())?.classical_upcross(x, B, &quad).map_err(|e| e.to_string())?;
            within("lambda=1e8 upcross", upcross_laplace(&big).map_err(|e| e.to_string())?, classical, 1e-4, &mut worst)?;

            let q = query(sigma, x, B);
            let g = joint_laplace_g(&tilted(&q, 0.0, 0.0)).map_err(|e| e.to_string())?;
            within("G(u=v=0)", g, u_xi(&q).map_err(|e| e.to_string())?, 1e-4, &mut worst)?;

            let mut tiny = q.clone();
            tiny.transform = TransformSpec::new(1e-8, LAMBDA).unwrap();
            within("q=1e-8 u_xi", u_xi(&tiny).map_err(|e| e.to_string())?, 1.0, 1e-4, &mut worst)?;
        }
        let ctx = KernelContext::new(&model, TransformSpec::new(Q, LAMBDA).unwrap(), DrawdownSpec::linear(K).unwrap())
            .map_err(|e| e.to_string())?;
        for z in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
            let want = LAMBDA / (Q + LAMBDA) * (1.0 - 1.0 / ctx.boosted().z(z));
            let got = ctx.hbar(z).map_err(|e| e.to_string())?;
            let e = rel(got, want);
            if e > 1e-10 {
                return Err(format!("hbar({z}): got {got:e}, want {want:e}"));
            }
        }
    }
    Ok(format!("max rel err {worst:.2e}"))
}

fn mass_balance() -> Outcome {
    let configs = [(0.0, 0.8, 0.1, 2.0), (0.2, 0.6, 0.5, 5.0), (0.0, 0.6, 0.5, 5.0), (0.2, 0.8, 0.1, 2.0), (0.2, 0.8, 0.5, 5.0)];
    let mut worst = 0.0f64;
    for (sigma, k, lambda, b) in configs {
        let q = Query::new(
            ModelParams::insurance_example(sigma),
            DrawdownSpec::linear(k).unwrap(),
            TransformSpec::new(Q, lambda).unwrap(),
            1.0,
            b,
        );
        let mass = Resolvent::new(&q).and_then(|r| r.killed_mass()).map_err(|e| e.to_string())?;
        let survive = u_xi(&q).map_err(|e| e.to_string())?;
        within(&format!("sigma={sigma} K={k} lambda={lambda} b={b}"), mass + survive, 1.0, 1e-5, &mut worst)?;
    }
    Ok(format!("max rel err {worst:.2e}"))
}

/// Formula values for the five criterion-5 functionals, in `FUNCTIONALS` order.
fn formula_values(q: &Query) -> parisian::Result<[f64; 5]> {
    let (up, ruin) = exit_pair(q)?;
    Ok([
        up,
        ruin,
        ruin_probability(q.x, LAMBDA, &q.model, &q.drawdown, &q.quad)?,
        expected_injections(q)?,
        joint_laplace_g(&tilted(q, 0.1, 0.3))?,
    ])
}

// Ruin probability is estimated by the escape-level method with the escape
// level placed at b: paths reaching b are completed with the formula.
const FUNCTIONALS: [Functional; 5] = [
    Functional::UpcrossLaplace,
    Functional::RuinLaplace,
    Functional::RuinProb,
    Functional::VXi,
    Functional::JointG { u: 0.1, v: 0.3 },
];
const NAMES: [&str; 5] = ["upcross", "ruin-laplace", "ruin-prob", "injections", "joint"];

fn mc_run(sigma: f64, dt: f64) -> Result<McRows, String> {
    let sim = SimConfig { n_paths: 100_000, dt, seed: SEED, ..Default::default() };
    XS.iter()
        .map(|&x| {
            let q = query(sigma, x, B);
            let f = formula_values(&q).map_err(|e| e.to_string())?;
            let e = estimate_many(&q, &sim, &FUNCTIONALS).map_err(|e| e.to_string())?;
            Ok((x, f, e))
        })
        .collect()
}

fn agreement(rows: &McRows) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (x, f, est) in rows {
        for ((name, want), e) in NAMES.iter().zip(f).zip(est) {
            let z = e.z_score(*want).abs();
            worst = worst.max(z);
            if !(z <= 3.0) {
                return Err(format!("x={x} {name}: mc {} ± {} vs formula {want} (z={z:.2})", e.mean, e.std_error));
            }
        }
    }
    Ok(worst)
}

fn mc_exact() -> Outcome {
    let rows = mc_run(0.0, 1e-3)?;
    let z = agreement(&rows)?;
    Ok(format!("15 estimates, max |z| {z:.2}"))
}

fn mc_diffusive() -> Outcome {
    let coarse = mc_run(0.2, 1e-3)?;
    let fine = mc_run(0.2, 5e-4)?;
    let mut shift = 0.0f64;
    for ((x, _, a), (_, _, b)) in coarse.iter().zip(&fine) {
        for ((name, ea), eb) in NAMES.iter().zip(a).zip(b) {
            let s = (ea.mean - eb.mean).abs() / ea.std_error.max(f64::MIN_POSITIVE);
            shift = shift.max(s);
            if !(s < 1.0) {
                return Err(format!("dt-halving moved x={x} {name} by {s:.2} SE"));
            }
        }
    }
    let z = agreement(&coarse)?;
    Ok(format!("max halving shift {shift:.2} SE, max |z| {z:.2}"))
}

fn csv_column(csv: &str, col: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == col).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

fn cli_curve(cmd: &str, extra: &[&str]) -> Result<Vec<f64>, String> {
    let mut args = vec!["parisian".to_string(), cmd.to_string(), "--x-grid".into(), "0.2:6:30".into()];
    args.extend(extra.iter().map(|s| s.to_string()));
    let csv = cli::run(args).map_err(|e| e.message)?;
    Ok(csv_column(&csv, "value"))
}

fn pointwise(name: &str, lo: &[f64], hi: &[f64]) -> Result<(), String> {
    match lo.iter().zip(hi).position(|(a, b)| !(a < b)) {
        None => Ok(()),
        Some(i) => Err(format!("{name}: not strictly below at point {i} ({} vs {})", lo[i], hi[i])),
    }
}

fn decreasing(name: &str, v: &[f64]) -> Result<(), String> {
    match v.windows(2).position(|w| !(w[1] < w[0])) {
        None => Ok(()),
        Some(i) => Err(format!("{name}: not decreasing at point {i}")),
    }
}

fn figure_shapes() -> Outcome {
    let xs: Vec<f64> = (0..30).map(|i| 0.2 + i as f64 * (6.0 - 0.2) / 29.0).collect();
    let mut checks = 0;

    // ruin probability
    let rp = |extra: &[&str]| cli_curve("ruin-prob", extra);
    let base = rp(&["--sigma", "0.2"])?;
    decreasing("ruin-prob in x", &base)?;
    pointwise("ruin-prob sigma 0 < 0.2", &rp(&["--sigma", "0"])?, &base)?;
    pointwise("ruin-prob lambda 0.1 < 0.2", &rp(&["--lambda", "0.1"])?, &base)?;
    pointwise("ruin-prob lambda 0.2 < 0.5", &base, &rp(&["--lambda", "0.5"])?)?;
    pointwise("ruin-prob K 0.6 < 0.8", &rp(&["--xi", "linear:0.6"])?, &base)?;
    let capped = rp(&["--xi", "capped:0.8:0.8"])?;
    let over: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] > 1.0).collect();
    let pick = |v: &[f64]| over.iter().map(|&i| v[i]).collect::<Vec<_>>();
    pointwise("ruin-prob capped < linear", &pick(&capped), &pick(&base))?;
    checks += 6;

    // expected capital injection
    let ci = |extra: &[&str]| cli_curve("capital-injection", extra);
    let v = ci(&["--sigma", "0.2"])?;
    decreasing("V in x", &v)?;
    if let Some(i) = v.windows(3).position(|w| w[0] - 2.0 * w[1] + w[2] < -1e-6) {
        return Err(format!("V not convex at point {}", i + 1));
    }
    pointwise("V sigma 0 < 0.2", &ci(&["--sigma", "0"])?, &v)?;
    pointwise("V K 0.6 < 0.8", &ci(&["--xi", "linear:0.6"])?, &v)?;
    let vcap = ci(&["--xi", "capped:0.8:0.8"])?;
    pointwise("V capped < linear", &pick(&vcap), &pick(&v))?;
    checks += 5;
    Ok(format!("{checks} shape assertions over 30-point sweeps"))
}

fn panel_doubling() -> Outcome {
    let mut worst = 0.0f64;
    for sigma in [0.0, 0.2] {
        for x in XS {
            let q = query(sigma, x, B);
            let fine = q.clone().with_quad(QuadratureConfig { panel: 2 * q.quad.panel, ..q.quad });
            let a = formula_values(&q).map_err(|e| e.to_string())?;
            let b = formula_values(&fine).map_err(|e| e.to_string())?;
            for (name, (va, vb)) in NAMES.iter().zip(a.iter().zip(&b)) {
                within(&format!("sigma={sigma} x={x} {name}"), *va, *vb, 1e-6, &mut worst)?;
            }
        }
    }
    Ok(format!("max rel change {worst:.2e}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("scale-function Laplace identity", Duration::from_secs(1), laplace_identity),
        ("boundary values", Duration::MAX, boundary_suite),
        ("limit reductions", Duration::MAX, limit_suite),
        ("resolvent mass balance", Duration::from_secs(30), mass_balance),
        ("formula vs exact MC (sigma=0)", Duration::from_secs(120), mc_exact),
        ("formula vs discretised MC (sigma=0.2)", Duration::from_secs(600), mc_diffusive),
        ("figure shapes via CLI", Duration::from_secs(60), figure_shapes),
        ("panel doubling stability", Duration::MAX, panel_doubling),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        match timed(*limit, f) {
            Ok(msg) => println!("criterion {}: PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
