//! Command-line front end. Every subcommand evaluates one quantity over an
//! x-grid and prints a [`CurveTable`] as CSV.
//!
//! A `--config FILE` of `key=value` lines supplies defaults for any long flag;
//! flags given on the command line win. The `# key=value` header of an output
//! file is itself a valid config file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::drawdown::DrawdownSpec;
use crate::error::Error;
use crate::formulas::{self, Query};
use crate::kernels::TransformSpec;
use crate::levy_model::ModelParams;
use crate::quadrature::QuadratureConfig;
use crate::simulator::{self, Functional, SimConfig};
use crate::table::{Cell, CurveTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "parisian", version, about = "Parisian ruin of draw-down reflected jump-diffusions", args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ruin probability P_x(theta < inf) over the x-grid, one curve per lambda.
    RuinProb(Common),
    /// Expected discounted capital injections (b defaults to inf).
    CapitalInjection(Common),
    /// Exit transforms: upcrossing before ruin, ruin before upcrossing, and their sum.
    ExitLaplace(Common),
    /// Joint transform of exit time, position and injected capital.
    JointLaplace(Common),
    /// Killed occupation density; the x-grid is read as positions u.
    Resolvent(Common),
    /// Monte Carlo estimates of the same quantities.
    Simulate(Common),
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Drift [0.075].
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Brownian volatility [0.2].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Jump rate [0.5].
    #[arg(long)]
    pub a: Option<f64>,
    /// Rate of the exponential jump sizes [9].
    #[arg(long)]
    pub c: Option<f64>,
    /// Discount rate [0.05].
    #[arg(long)]
    pub q: Option<f64>,
    /// One value, or a comma-separated list (ruin-prob only).
    #[arg(long)]
    pub lambda: Option<String>,
    /// `linear:K` or `capped:CAP:K`.
    #[arg(long)]
    pub xi: Option<String>,
    /// `lo:hi:n`, endpoints included.
    #[arg(long = "x-grid")]
    pub x_grid: Option<String>,
    /// Upper barrier; `inf` allowed where meaningful.
    #[arg(long)]
    pub b: Option<f64>,
    /// Tilt on the final surplus (joint-laplace, simulate) [0].
    #[arg(long)]
    pub u: Option<f64>,
    /// Penalty on injected capital (joint-laplace, simulate) [0].
    #[arg(long)]
    pub v: Option<f64>,
    /// Starting surplus for `resolvent`.
    #[arg(long)]
    pub start: Option<f64>,
    /// RNG seed; required by `simulate`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores); results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Base time step for sigma > 0 [1e-3].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Monte Carlo paths [100000].
    #[arg(long = "n-paths")]
    pub n_paths: Option<usize>,
    /// Time at which a path is censored [1e4].
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Level counted as escape when b = inf [x + 2].
    #[arg(long = "escape-level")]
    pub escape_level: Option<f64>,
    /// Quadrature nodes per unit length.
    #[arg(long)]
    pub panel: Option<usize>,
    /// For `simulate`: comma-separated subset of
    /// upcross,ruin-laplace,u-xi,ruin-prob,joint,injections.
    #[arg(long)]
    pub functionals: Option<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key=value` file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(m: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: m.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_)
            | Error::Domain(_)
            | Error::DomainViolation { .. }
            | Error::TransformPole { .. }
            | Error::Pole { .. }
            | Error::DegenerateModel(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Resolved settings of one invocation.
struct Settings {
    model: ModelParams,
    drawdown: DrawdownSpec,
    q: f64,
    lambdas: Vec<f64>,
    xs: Vec<f64>,
    b: Option<f64>,
    u: f64,
    v: f64,
    start: f64,
    quad: QuadratureConfig,
    sim: SimConfig,
    seed_given: bool,
    functionals: Option<String>,
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<T> {
    s.trim().parse().map_err(|_| CliError::usage(format!("bad {what}: {s:?}")))
}

pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("x-grid must be lo:hi:n, got {s:?}")));
    }
    let lo: f64 = parse_num(parts[0], "x-grid lo")?;
    let hi: f64 = parse_num(parts[1], "x-grid hi")?;
    let n: usize = parse_num(parts[2], "x-grid n")?;
    if n == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() || (n == 1 && lo != hi) {
        return Err(CliError::usage(format!("invalid x-grid {s:?}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

impl Settings {
    fn resolve(c: &Common) -> CliResult<Settings> {
        let model = ModelParams::new(
            c.mu.unwrap_or(0.075),
            c.sigma.unwrap_or(0.2),
            c.a.unwrap_or(0.5),
            c.c.unwrap_or(9.0),
        )?;
        let drawdown: DrawdownSpec = c.xi.as_deref().unwrap_or("linear:0.8").parse()?;
        let lambdas = c
            .lambda
            .as_deref()
            .unwrap_or("0.2")
            .split(',')
            .map(|s| parse_num(s, "lambda"))
            .collect::<CliResult<Vec<f64>>>()?;
        let xs = parse_grid(c.x_grid.as_deref().unwrap_or("0.1:10:100"))?;
        let mut quad = QuadratureConfig::default();
        if let Some(p) = c.panel {
            quad.panel = p;
        }
        quad.validate()?;
        let defaults = SimConfig::default();
        let sim = SimConfig {
            n_paths: c.n_paths.unwrap_or(defaults.n_paths),
            dt: c.dt.unwrap_or(defaults.dt),
            horizon: c.horizon.unwrap_or(defaults.horizon),
            escape_level: c.escape_level,
            seed: c.seed.unwrap_or(0),
            workers: c.workers.unwrap_or(0),
            ..defaults
        };
        sim.validate()?;
        Ok(Settings {
            model,
            drawdown,
            q: c.q.unwrap_or(0.05),
            lambdas,
            xs,
            b: c.b,
            u: c.u.unwrap_or(0.0),
            v: c.v.unwrap_or(0.0),
            start: c.start.unwrap_or(1.0),
            quad,
            sim,
            seed_given: c.seed.is_some(),
            functionals: c.functionals.clone(),
        })
    }

    fn lambda(&self) -> CliResult<f64> {
        match self.lambdas[..] {
            [l] => Ok(l),
            _ => Err(CliError::usage("this command takes a single lambda")),
        }
    }

    fn transform(&self) -> CliResult<TransformSpec> {
        Ok(TransformSpec::with_tilts(self.q, self.lambda()?, self.u, self.v)?)
    }

    fn query(&self, x: f64, b: f64) -> CliResult<Query> {
        Ok(Query::new(self.model, self.drawdown.clone(), self.transform()?, x, b).with_quad(self.quad))
    }

    fn finite_b(&self) -> CliResult<f64> {
        match self.b {
            Some(b) if b.is_finite() => Ok(b),
            Some(_) => Err(CliError::usage("this command needs a finite --b")),
            None => Ok(3.0),
        }
    }

    fn header(&self, t: &mut CurveTable, command: &str) {
        let lambdas: Vec<String> = self.lambdas.iter().map(|l| l.to_string()).collect();
        t.meta("command", command);
        t.meta("mu", self.model.mu);
        t.meta("sigma", self.model.sigma);
        t.meta("a", self.model.a);
        t.meta("c", self.model.c);
        t.meta("q", self.q);
        t.meta("lambda", lambdas.join(","));
        t.meta("xi", &self.drawdown);
        t.meta("panel", self.quad.panel);
    }
}

fn formula_rows(t: &mut CurveTable, xs: &[f64], vals: &[f64]) {
    for (&x, &v) in xs.iter().zip(vals) {
        t.push(vec![x.into(), v.into(), "formula".into()]);
    }
}

fn parse_functionals(s: Option<&str>, u: f64, v: f64, finite_b: bool) -> CliResult<Vec<(&'static str, Functional)>> {
    let all = ["upcross", "ruin-laplace", "u-xi", "ruin-prob", "joint", "injections"];
    let default: Vec<&str> = if finite_b { all.to_vec() } else { vec!["ruin-prob", "injections"] };
    let names: Vec<&str> = match s {
        Some(s) => s.split(',').map(str::trim).collect(),
        None => default,
    };
    names
        .into_iter()
        .map(|n| {
            let f = match n {
                "upcross" => Functional::UpcrossLaplace,
                "ruin-laplace" => Functional::RuinLaplace,
                "u-xi" => Functional::UXi,
                "ruin-prob" => Functional::RuinProb,
                "joint" => Functional::JointG { u, v },
                "injections" => Functional::VXi,
                other => return Err(CliError::usage(format!("unknown functional {other:?}"))),
            };
            let name = all.iter().find(|a| **a == n).copied().unwrap();
            Ok((name, f))
        })
        .collect()
}

fn execute(command: &Command) -> CliResult<CurveTable> {
    let (name, c) = match command {
        Command::RuinProb(c) => ("ruin-prob", c),
        Command::CapitalInjection(c) => ("capital-injection", c),
        Command::ExitLaplace(c) => ("exit-laplace", c),
        Command::JointLaplace(c) => ("joint-laplace", c),
        Command::Resolvent(c) => ("resolvent", c),
        Command::Simulate(c) => ("simulate", c),
    };
    let s = Settings::resolve(c)?;
    let grid = c.x_grid.clone().unwrap_or_else(|| "0.1:10:100".into());
    let mut t;
    match command {
        Command::RuinProb(_) => {
            t = CurveTable::new(&["x", "lambda", "value", "method"]);
            s.header(&mut t, name);
            let mut vals = vec![];
            for &l in &s.lambdas {
                vals.push(formulas::sweep(&s.xs, |x| formulas::ruin_probability(x, l, &s.model, &s.drawdown, &s.quad))?);
            }
            for (i, &x) in s.xs.iter().enumerate() {
                for (j, &l) in s.lambdas.iter().enumerate() {
                    t.push(vec![x.into(), l.into(), vals[j][i].into(), "formula".into()]);
                }
            }
        }
        Command::CapitalInjection(_) => {
            let b = s.b.unwrap_or(f64::INFINITY);
            t = CurveTable::new(&["x", "value", "method"]);
            s.header(&mut t, name);
            t.meta("b", b);
            let proto = s.query(s.xs[0], b)?;
            let vals = formulas::sweep(&s.xs, |x| formulas::expected_injections(&proto.at(x)))?;
            formula_rows(&mut t, &s.xs, &vals);
        }
        Command::ExitLaplace(_) => {
            let b = s.finite_b()?;
            t = CurveTable::new(&["x", "upcross", "parisian_ruin", "u_xi", "method"]);
            s.header(&mut t, name);
            t.meta("b", b);
            let proto = s.query(s.xs[0], b)?;
            let pairs = s
                .xs
                .par_iter()
                .map(|&x| formulas::exit_pair(&proto.at(x)))
                .collect::<crate::Result<Vec<_>>>()?;
            for (&x, &(up, ru)) in s.xs.iter().zip(&pairs) {
                t.push(vec![x.into(), up.into(), ru.into(), (up + ru).into(), "formula".into()]);
            }
        }
        Command::JointLaplace(_) => {
            let b = s.finite_b()?;
            t = CurveTable::new(&["x", "value", "method"]);
            s.header(&mut t, name);
            t.meta("b", b);
            t.meta("u", s.u);
            t.meta("v", s.v);
            let proto = s.query(s.xs[0], b)?;
            let vals = formulas::sweep(&s.xs, |x| formulas::joint_laplace_g(&proto.at(x)))?;
            formula_rows(&mut t, &s.xs, &vals);
        }
        Command::Resolvent(_) => {
            let b = s.finite_b()?;
            t = CurveTable::new(&["u", "density", "method"]);
            s.header(&mut t, name);
            t.meta("b", b);
            t.meta("start", s.start);
            let q = s.query(s.start, b)?;
            for (u, d) in formulas::resolvent_u_curve(&q, &s.xs)? {
                t.push(vec![u.into(), d.into(), "formula".into()]);
            }
        }
        Command::Simulate(_) => {
            if !s.seed_given {
                return Err(CliError::usage("simulate requires --seed"));
            }
            let b = s.b.unwrap_or(3.0);
            let fs = parse_functionals(s.functionals.as_deref(), s.u, s.v, b.is_finite())?;
            t = CurveTable::new(&["x", "functional", "value", "stderr", "systematic", "method"]);
            s.header(&mut t, name);
            t.meta("b", b);
            t.meta("u", s.u);
            t.meta("v", s.v);
            t.meta("seed", s.sim.seed);
            t.meta("workers", s.sim.workers);
            t.meta("dt", s.sim.dt);
            t.meta("n-paths", s.sim.n_paths);
            t.meta("horizon", s.sim.horizon);
            if let Some(e) = s.sim.escape_level {
                t.meta("escape-level", e);
            }
            let funcs: Vec<Functional> = fs.iter().map(|p| p.1).collect();
            for &x in &s.xs {
                let est = simulator::estimate_many(&s.query(x, b)?, &s.sim, &funcs)?;
                for ((fname, _), e) in fs.iter().zip(est) {
                    t.push(vec![
                        x.into(),
                        Cell::Text(fname.to_string()),
                        e.mean.into(),
                        e.std_error.into(),
                        e.systematic.into(),
                        "mc".into(),
                    ]);
                }
            }
        }
    }
    t.meta("x-grid", grid);
    Ok(t)
}

/// Read `key=value` lines into `--key value` arguments.
pub fn config_args(text: &str) -> CliResult<Vec<String>> {
    let mut out = vec![];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        // the header of an output file names its subcommand; nothing to pass on
        if k == "command" || k == "config" {
            continue;
        }
        out.push(format!("--{k}"));
        out.push(v.to_string());
    }
    Ok(out)
}

/// Splice config-file arguments in front of the explicit flags so the latter win.
fn expand_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let path = if let Some(p) = args[pos].strip_prefix("--config=") {
        p.to_string()
    } else {
        args.get(pos + 1).cloned().ok_or_else(|| CliError::usage("--config needs a file"))?
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::usage(format!("cannot read config {path}: {e}")))?;
    let extra = config_args(&text)?;
    let mut out = args[..2.min(args.len())].to_vec();
    out.extend(extra);
    out.extend(args[2.min(args.len())..].iter().cloned());
    Ok(out)
}

/// Parse, run and write; returns the CSV text on success.
pub fn run(args: Vec<String>) -> CliResult<String> {
    let args = expand_config(args)?;
    let cli = Cli::try_parse_from(&args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        CliError { code, message: e.to_string() }
    })?;
    let common = match &cli.command {
        Command::RuinProb(c)
        | Command::CapitalInjection(c)
        | Command::ExitLaplace(c)
        | Command::JointLaplace(c)
        | Command::Resolvent(c)
        | Command::Simulate(c) => c.clone(),
    };
    let workers = common.workers.unwrap_or(0);
    let table = if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::usage(e.to_string()))?
            .install(|| execute(&cli.command))?
    } else {
        execute(&cli.command)?
    };
    let csv = table.to_csv();
    if let Some(path) = &common.out {
        fs::write(path, &csv).map_err(|e| CliError { code: EXIT_NUMERIC, message: format!("write {}: {e}", path.display()) })?;
    }
    Ok(csv)
}

/// Entry point for the binary: prints to stdout unless `--out` was given.
pub fn main_with(args: Vec<String>) -> i32 {
    let to_file = args.iter().any(|a| a == "--out" || a.starts_with("--out="));
    match run(args) {
        Ok(csv) => {
            if !to_file {
                print!("{csv}");
            }
            EXIT_OK
        }
        Err(e) => {
            if e.code == EXIT_OK {
                print!("{}", e.message);
            } else {
                eprintln!("error: {}", e.message.trim_end());
            }
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("parisian").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("2:1:4").is_err());
    }

    #[test]
    fn config_lines() {
        let a = config_args("# command=ruin-prob\nmu=0.1\n\n sigma = 0 \n").unwrap();
        assert_eq!(a, vec!["--mu", "0.1", "--sigma", "0"]);
        assert!(config_args("oops").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(args("ruin-prob --sigma -1")).unwrap_err().code, EXIT_USAGE);
        assert_eq!(run(args("ruin-prob --bogus 1")).unwrap_err().code, EXIT_USAGE);
        assert_eq!(run(args("simulate --x-grid 1:1:1")).unwrap_err().code, EXIT_USAGE);
        let e = run(args("ruin-prob --xi linear:0.999 --x-grid 1:1:1 --panel 16")).unwrap_err();
        assert_eq!(e.code, EXIT_NUMERIC, "{}", e.message);
    }

    #[test]
    fn exit_laplace_at_barrier() {
        let csv = run(args("exit-laplace --x-grid 3:3:1 --b 3")).unwrap();
        let row = csv.lines().last().unwrap();
        assert!(row.starts_with("3.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,"), "{row}");
    }
}
