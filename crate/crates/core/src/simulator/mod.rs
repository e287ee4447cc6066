//! Monte Carlo oracle for the draw-down reflected process with Parisian
//! clocks and capital injection.
//!
//! Without a Brownian part the path is simulated exactly, event by event.
//! With one, the path moves in adaptive steps: each step draws the Brownian
//! increment from a fixed path ([`brownian`]) and both extremes of the bridge,
//! so the record and the reflection are exact within a step and crossing
//! detection has no grid bias. Only event *times* inside a step are
//! approximated (by the step midpoint), which is why steps shrink to `dt`
//! near boundaries.

mod brownian;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formulas::{self, Query};
use brownian::BrownianPath;

/// Escape margin above `x` used for `b = inf` when none is configured.
pub const DEFAULT_ESCAPE_MARGIN: f64 = 2.0;
/// Paths per work unit; fixed so results do not depend on the thread count.
const CHUNK: usize = 2048;
/// Free-mode steps keep the nearest boundary this many step deviations away.
const STEP_SDS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Smallest step for the Brownian part.
    pub dt: f64,
    pub horizon: f64,
    /// Surplus level at which a `b = inf` path stops and the formula takes over.
    pub escape_level: Option<f64>,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Largest step far from every boundary.
    pub max_step: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 100_000,
            dt: 1e-3,
            horizon: 1e4,
            escape_level: None,
            seed: 0,
            workers: 0,
            max_step: 0.125,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.horizon > 0.0 && self.max_step >= self.dt) {
            return Err(Error::InvalidParameter("need dt > 0, horizon > 0, max_step >= dt".into()));
        }
        Ok(())
    }

    fn episode_step(&self) -> f64 {
        (16.0 * self.dt).min(self.max_step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    UpcrossedB,
    ParisianRuin,
    HorizonCensored,
    Escaped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub kind: OutcomeKind,
    pub event_time: f64,
    pub position: f64,
    pub running_max: f64,
    pub total_injection: f64,
    /// `int_0^T e^{-qt} dR(t)`.
    pub discounted_injection: f64,
    pub discount_factor: f64,
    /// Position at an independent `Exp(q)` time, if that came first.
    pub probe: Option<f64>,
    pub episodes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    UpcrossLaplace,
    RuinLaplace,
    UXi,
    /// `P(theta < inf)`, completed beyond the top level by the formula.
    RuinProb,
    JointG { u: f64, v: f64 },
    /// Discounted injections; beyond an escape level completed by the formula.
    VXi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    /// Bound on the error carried in from the formula completion (0 if unused).
    pub systematic: f64,
}

impl Estimate {
    /// `|mean - reference|` in units of the combined error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let s = (self.std_error.powi(2) + self.systematic.powi(2)).sqrt();
        (self.mean - reference).abs() / s.max(f64::MIN_POSITIVE)
    }
}

/// Density estimate of the killed occupation measure on fixed bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n: usize,
}

#[derive(Clone, Copy)]
enum Mode {
    Free,
    Episode { level: f64, deadline: f64 },
}

struct Streams {
    jumps: ChaCha8Rng,
    clocks: ChaCha8Rng,
    extremes: ChaCha8Rng,
}

fn stream(seed: u64, path: u64, k: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(path * 4 + k);
    r
}

fn exp(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    if rate > 0.0 {
        let e: f64 = rng.sample(Exp1);
        e / rate
    } else {
        f64::INFINITY
    }
}

/// Uniform on `(0, 1]`.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Mutable state of one path.
struct Walker<'a> {
    query: &'a Query,
    top: f64,
    kind_at_top: OutcomeKind,
    t: f64,
    u: f64,
    m: f64,
    r: f64,
    disc_r: f64,
    mode: Mode,
    next_jump: f64,
    probe_time: f64,
    probe: Option<f64>,
    episodes: u32,
    rng: Streams,
}

impl<'a> Walker<'a> {
    fn new(query: &'a Query, sim: &SimConfig, path: u64) -> Self {
        let (top, kind_at_top) = top_level(query, sim);
        let mut rng = Streams {
            jumps: stream(sim.seed, path, 0),
            clocks: stream(sim.seed, path, 1),
            extremes: stream(sim.seed, path, 2),
        };
        let mut probe_rng = stream(sim.seed, path, 3);
        let next_jump = exp(&mut rng.jumps, query.model.a);
        let probe_time = exp(&mut probe_rng, query.transform.q);
        Walker {
            query,
            top,
            kind_at_top,
            t: 0.0,
            u: query.x,
            m: query.x,
            r: 0.0,
            disc_r: 0.0,
            mode: Mode::Free,
            next_jump,
            probe_time,
            probe: None,
            episodes: 0,
            rng,
        }
    }

    fn xi(&self, m: f64) -> f64 {
        self.query.drawdown.xi_unchecked(m)
    }

    fn inject(&mut self, amount: f64, at: f64) {
        if amount > 0.0 {
            self.r += amount;
            self.disc_r += (-self.query.transform.q * at).exp() * amount;
        }
    }

    fn start_episode(&mut self, at: f64) {
        let e = exp(&mut self.rng.clocks, self.query.transform.lambda);
        self.mode = Mode::Episode { level: self.xi(self.m), deadline: at + e };
        self.episodes += 1;
    }

    fn finish(&self, kind: OutcomeKind) -> PathOutcome {
        PathOutcome {
            kind,
            event_time: self.t,
            position: self.u,
            running_max: self.m,
            total_injection: self.r,
            discounted_injection: self.disc_r,
            discount_factor: (-self.query.transform.q * self.t).exp(),
            probe: self.probe,
            episodes: self.episodes,
        }
    }

    /// Apply the jump scheduled at the current time.
    fn jump(&mut self) {
        let size = exp(&mut self.rng.jumps, self.query.model.c);
        self.next_jump = self.t + exp(&mut self.rng.jumps, self.query.model.a);
        self.u -= size;
        match self.mode {
            Mode::Free => {
                let level = self.xi(self.m);
                if self.u < level {
                    self.start_episode(self.t);
                    self.inject(level - self.u, self.t);
                    self.u = level;
                }
            }
            Mode::Episode { level, .. } => {
                if self.u < level {
                    self.inject(level - self.u, self.t);
                    self.u = level;
                }
            }
        }
    }

    fn take_probe(&mut self) {
        self.probe = Some(self.u);
        self.probe_time = f64::INFINITY;
    }

    /// Exact event-driven evolution for a drift plus compound Poisson path.
    fn run_exact(mut self, horizon: f64) -> PathOutcome {
        let mu = self.query.model.mu;
        loop {
            let target = match self.mode {
                Mode::Free => self.top,
                Mode::Episode { .. } => self.m,
            };
            let t_hit = self.t + (target - self.u).max(0.0) / mu;
            let deadline = match self.mode {
                Mode::Episode { deadline, .. } => deadline,
                Mode::Free => f64::INFINITY,
            };
            let t_next = t_hit.min(self.next_jump).min(deadline).min(horizon).min(self.probe_time);
            self.u += mu * (t_next - self.t);
            self.t = t_next;
            if t_next == self.probe_time {
                self.take_probe();
                continue;
            }
            if t_next == t_hit {
                self.u = target;
                self.m = self.m.max(target);
                match self.mode {
                    Mode::Free => return self.finish(self.kind_at_top),
                    Mode::Episode { .. } => self.mode = Mode::Free,
                }
                continue;
            }
            self.m = self.m.max(self.u);
            if t_next == deadline {
                return self.finish(OutcomeKind::ParisianRuin);
            }
            if t_next == horizon {
                return self.finish(OutcomeKind::HorizonCensored);
            }
            self.jump();
        }
    }

    /// Adaptive-step evolution with a Brownian part.
    fn run_diffusive(mut self, sim: &SimConfig, path: u64) -> PathOutcome {
        let (mu, sigma) = (self.query.model.mu, self.query.model.sigma);
        let mut bm = BrownianPath::new(sim.seed, path);
        let mut b_now = 0.0;
        let var_rate = sigma * sigma;
        loop {
            // Reflection is exact given the bridge minimum, so inside an episode
            // only the distance to the record limits the step.
            let (d, cap, deadline) = match self.mode {
                Mode::Free => ((self.u - self.xi(self.m)).min(self.top - self.u), sim.max_step, f64::INFINITY),
                Mode::Episode { deadline, .. } => (self.m - self.u, sim.episode_step(), deadline),
            };
            let h0 = (d / (STEP_SDS * sigma)).powi(2).clamp(sim.dt, cap);
            let t_next = (self.t + h0).min(self.next_jump).min(deadline).min(sim.horizon).min(self.probe_time);
            let h = t_next - self.t;
            let b_next = bm.at(t_next);
            let incr = mu * h + sigma * (b_next - b_now);
            b_now = b_next;
            let t_mid = self.t + 0.5 * h;
            // bridge extremes relative to the start of the step
            let spread = |v: f64| (incr * incr - 2.0 * var_rate * h * v.ln()).sqrt();
            let lo_rel = 0.5 * (incr - spread(unit(&mut self.rng.extremes)));
            let hi_rel = 0.5 * (incr + spread(unit(&mut self.rng.extremes)));
            let start = self.u;
            self.t = t_next;
            match self.mode {
                Mode::Free => {
                    let level = self.xi(self.m);
                    if start + lo_rel < level {
                        // draw-down inside the step; the rest of it is reflected at the frozen level
                        self.start_episode(t_mid);
                        let push = level - (start + lo_rel);
                        self.inject(push, t_mid);
                        self.u = start + incr + push;
                    } else if start + hi_rel >= self.top {
                        self.t = t_mid;
                        self.u = self.top;
                        self.m = self.top;
                        return self.finish(self.kind_at_top);
                    } else {
                        self.u = start + incr;
                        self.m = self.m.max(start + hi_rel);
                    }
                }
                Mode::Episode { level, .. } => {
                    let push = (level - (start + lo_rel)).max(0.0);
                    if push == 0.0 && start + hi_rel >= self.m {
                        self.mode = Mode::Free;
                        self.m = start + hi_rel;
                        self.u = start + incr;
                    } else {
                        self.inject(push, t_mid);
                        self.u = start + incr + push;
                        if self.u >= self.m {
                            self.mode = Mode::Free;
                            self.m = self.u;
                        }
                    }
                }
            }
            if t_next == self.probe_time {
                self.take_probe();
            }
            if let Mode::Episode { deadline, .. } = self.mode {
                if t_next == deadline {
                    return self.finish(OutcomeKind::ParisianRuin);
                }
            }
            if t_next == sim.horizon {
                return self.finish(OutcomeKind::HorizonCensored);
            }
            if t_next == self.next_jump {
                self.jump();
            }
        }
    }
}

/// Level whose crossing ends a path: `b`, or the escape level when `b = inf`.
fn top_level(query: &Query, sim: &SimConfig) -> (f64, OutcomeKind) {
    if query.b.is_finite() {
        (query.b, OutcomeKind::UpcrossedB)
    } else {
        (sim.escape_level.unwrap_or(query.x + DEFAULT_ESCAPE_MARGIN), OutcomeKind::Escaped)
    }
}

/// Simulate path number `path` of the run seeded by `sim.seed`.
pub fn simulate_path(query: &Query, sim: &SimConfig, path: u64) -> PathOutcome {
    let w = Walker::new(query, sim, path);
    if query.model.sigma == 0.0 {
        w.run_exact(sim.horizon)
    } else {
        w.run_diffusive(sim, path)
    }
}

fn check_inputs(query: &Query, sim: &SimConfig) -> Result<()> {
    query.validate()?;
    sim.validate()?;
    let (top, _) = top_level(query, sim);
    if !(top >= query.x) || !top.is_finite() {
        return Err(Error::InvalidParameter(format!("escape level {top} must be finite and >= x")));
    }
    Ok(())
}

/// Formula values used to complete paths that reach the top level.
#[derive(Default, Clone, Copy)]
struct Completion {
    ruin: f64,
    ruin_err: f64,
    injections: f64,
    injections_err: f64,
}

fn completion(query: &Query, sim: &SimConfig, functionals: &[Functional]) -> Result<Completion> {
    let (top, _) = top_level(query, sim);
    let mut c = Completion::default();
    if functionals.contains(&Functional::RuinProb) {
        let rho = |quad| formulas::ruin_probability(top, query.transform.lambda, &query.model, &query.drawdown, quad);
        c.ruin = rho(&query.quad)?;
        c.ruin_err = (c.ruin - rho(&query.quad.refined())?).abs();
    }
    if functionals.contains(&Functional::VXi) && !query.b.is_finite() {
        let q = Query { x: top, b: f64::INFINITY, ..query.clone() };
        c.injections = formulas::expected_injections(&q)?;
        c.injections_err = (c.injections - formulas::expected_injections(&q.clone().with_quad(q.quad.refined()))?).abs();
    }
    Ok(c)
}

fn value(f: Functional, o: &PathOutcome, c: &Completion) -> f64 {
    use OutcomeKind::*;
    match f {
        Functional::UpcrossLaplace => if o.kind == UpcrossedB { o.discount_factor } else { 0.0 },
        Functional::RuinLaplace => if o.kind == ParisianRuin { o.discount_factor } else { 0.0 },
        Functional::UXi => if o.kind == HorizonCensored { 0.0 } else { o.discount_factor },
        Functional::RuinProb => match o.kind {
            ParisianRuin => 1.0,
            UpcrossedB | Escaped => c.ruin,
            HorizonCensored => 0.0,
        },
        Functional::JointG { u, v } => {
            if o.kind == HorizonCensored {
                0.0
            } else {
                o.discount_factor * (u * o.position - v * o.total_injection).exp()
            }
        }
        Functional::VXi => {
            let tail = if o.kind == Escaped { o.discount_factor * c.injections } else { 0.0 };
            o.discounted_injection + tail
        }
    }
}

fn systematic(f: Functional, c: &Completion, reach_fraction: f64, escape_discount: f64) -> f64 {
    match f {
        Functional::RuinProb => c.ruin_err * reach_fraction,
        Functional::VXi => c.injections_err * escape_discount,
        _ => 0.0,
    }
}

/// Running mean and centred second moment, mergeable across chunks.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        let n = self.n + o.n;
        if n == 0.0 {
            return self;
        }
        let d = o.mean - self.mean;
        Moments { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }
}

/// Per-chunk sums, reduced in chunk order.
#[derive(Clone)]
struct Tally {
    sums: Vec<Moments>,
    censored: usize,
    reached_top: usize,
    escape_discount: f64,
    bins: Vec<usize>,
}

impl Tally {
    fn new(k: usize, bins: usize) -> Self {
        Tally { sums: vec![Moments::default(); k], censored: 0, reached_top: 0, escape_discount: 0.0, bins: vec![0; bins] }
    }

    fn merge(mut self, o: Tally) -> Tally {
        for (a, b) in self.sums.iter_mut().zip(o.sums) {
            *a = a.merge(b);
        }
        self.censored += o.censored;
        self.reached_top += o.reached_top;
        self.escape_discount += o.escape_discount;
        for (a, b) in self.bins.iter_mut().zip(o.bins) {
            *a += b;
        }
        self
    }
}

fn run<F>(sim: &SimConfig, per_path: F, k: usize, bins: usize) -> Result<Tally>
where
    F: Fn(u64, &mut Tally) + Sync,
{
    let chunks: Vec<(usize, usize)> =
        (0..sim.n_paths).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(sim.n_paths))).collect();
    let work = || -> Vec<Tally> {
        chunks
            .par_iter()
            .map(|&(s, e)| {
                let mut t = Tally::new(k, bins);
                for p in s..e {
                    per_path(p as u64, &mut t);
                }
                t
            })
            .collect()
    };
    let parts = if sim.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(sim.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };
    let tally = parts.into_iter().fold(Tally::new(k, bins), Tally::merge);
    if tally.censored * 100 > sim.n_paths {
        return Err(Error::CensoringExcess { censored: tally.censored, total: sim.n_paths });
    }
    Ok(tally)
}

/// Estimate several functionals from one set of paths.
pub fn estimate_many(query: &Query, sim: &SimConfig, functionals: &[Functional]) -> Result<Vec<Estimate>> {
    check_inputs(query, sim)?;
    if !query.b.is_finite() {
        if let Some(f) = functionals.iter().find(|f| !matches!(f, Functional::RuinProb | Functional::VXi)) {
            return Err(Error::InvalidParameter(format!("{f:?} needs a finite b")));
        }
    }
    for f in functionals {
        if let Functional::JointG { u, v } = *f {
            if !(u >= 0.0 && v >= 0.0 && u.is_finite() && v.is_finite()) {
                return Err(Error::InvalidParameter("joint transform needs finite u, v >= 0".into()));
            }
        }
    }
    let comp = completion(query, sim, functionals)?;
    let tally = run(
        sim,
        |p, t| {
            let o = simulate_path(query, sim, p);
            match o.kind {
                OutcomeKind::HorizonCensored => t.censored += 1,
                OutcomeKind::Escaped => {
                    t.reached_top += 1;
                    t.escape_discount += o.discount_factor;
                }
                OutcomeKind::UpcrossedB => t.reached_top += 1,
                OutcomeKind::ParisianRuin => {}
            }
            for (s, &f) in t.sums.iter_mut().zip(functionals) {
                s.push(value(f, &o, &comp));
            }
        },
        functionals.len(),
        0,
    )?;
    let n = sim.n_paths as f64;
    Ok(functionals
        .iter()
        .zip(&tally.sums)
        .map(|(&f, m)| {
            let var = m.m2 / (n - 1.0).max(1.0);
            Estimate {
                mean: m.mean,
                std_error: (var / n).sqrt(),
                n: sim.n_paths,
                systematic: systematic(f, &comp, tally.reached_top as f64 / n, tally.escape_discount / n),
            }
        })
        .collect())
}

pub fn estimate(query: &Query, sim: &SimConfig, functional: Functional) -> Result<Estimate> {
    Ok(estimate_many(query, sim, &[functional])?[0])
}

/// Killed occupation density on the bins given by `edges`, from the position
/// at an independent `Exp(q)` time.
pub fn killed_position_histogram(query: &Query, sim: &SimConfig, edges: &[f64]) -> Result<Histogram> {
    check_inputs(query, sim)?;
    if !query.b.is_finite() {
        return Err(Error::InvalidParameter("histogram needs a finite b".into()));
    }
    if !(query.transform.q > 0.0) {
        return Err(Error::InvalidParameter("histogram needs q > 0".into()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("bin edges must be increasing".into()));
    }
    let nb = edges.len() - 1;
    let tally = run(
        sim,
        |p, t| {
            let o = simulate_path(query, sim, p);
            if o.kind == OutcomeKind::HorizonCensored {
                t.censored += 1;
            }
            if let Some(pos) = o.probe {
                let i = edges.partition_point(|&e| e <= pos);
                if i >= 1 && i <= nb {
                    t.bins[i - 1] += 1;
                }
            }
        },
        0,
        nb,
    )?;
    let n = sim.n_paths as f64;
    let q = query.transform.q;
    let (mut density, mut std_error) = (Vec::with_capacity(nb), Vec::with_capacity(nb));
    for (i, &c) in tally.bins.iter().enumerate() {
        let w = edges[i + 1] - edges[i];
        let p = c as f64 / n;
        density.push(p / (q * w));
        std_error.push((p * (1.0 - p) / n).sqrt() / (q * w));
    }
    Ok(Histogram { edges: edges.to_vec(), density, std_error, n: sim.n_paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DrawdownSpec, ModelParams, TransformSpec};

    fn query(sigma: f64, x: f64, b: f64) -> Query {
        Query::new(
            ModelParams::insurance_example(sigma),
            DrawdownSpec::linear(0.8).unwrap(),
            TransformSpec::new(0.05, 0.2).unwrap(),
            x,
            b,
        )
    }

    fn small(n: usize) -> SimConfig {
        SimConfig { n_paths: n, seed: 42, ..Default::default() }
    }

    #[test]
    fn pure_drift_upcrosses_on_time() {
        let q = Query::new(
            ModelParams::new(0.1, 0.0, 0.0, 9.0).unwrap(),
            DrawdownSpec::linear(0.8).unwrap(),
            TransformSpec::new(0.05, 0.2).unwrap(),
            1.0,
            3.0,
        );
        let o = simulate_path(&q, &small(1), 0);
        assert_eq!(o.kind, OutcomeKind::UpcrossedB);
        assert!((o.event_time - 20.0).abs() < 1e-12);
        assert_eq!(o.total_injection, 0.0);
    }

    #[test]
    fn exact_paths_ignore_dt() {
        let q = query(0.0, 1.0, 3.0);
        for p in 0..200 {
            let a = simulate_path(&q, &SimConfig { dt: 1e-3, ..small(1) }, p);
            let b = simulate_path(&q, &SimConfig { dt: 0.37, max_step: 0.37, ..small(1) }, p);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn path_invariants() {
        for sigma in [0.0, 0.2] {
            let q = query(sigma, 1.0, 3.0);
            for p in 0..300 {
                let o = simulate_path(&q, &small(1), p);
                assert!(o.total_injection >= 0.0);
                assert!(o.discounted_injection <= o.total_injection + 1e-15);
                assert!(o.position <= o.running_max + 1e-12);
                assert!(o.position >= q.drawdown.xi_unchecked(o.running_max) - 1e-12);
                if o.kind == OutcomeKind::ParisianRuin {
                    assert!(o.episodes >= 1);
                }
            }
        }
    }

    #[test]
    fn deterministic_across_workers() {
        let q = query(0.2, 1.0, 3.0);
        let f = [Functional::UXi, Functional::VXi];
        let a = estimate_many(&q, &SimConfig { workers: 1, ..small(3000) }, &f).unwrap();
        let b = estimate_many(&q, &SimConfig { workers: 3, ..small(3000) }, &f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn joint_at_zero_equals_u_xi() {
        let q = query(0.0, 1.0, 3.0);
        let e = estimate_many(&q, &small(5000), &[Functional::UXi, Functional::JointG { u: 0.0, v: 0.0 }]).unwrap();
        assert!((e[0].mean - e[1].mean).abs() < 1e-12);
    }

    #[test]
    fn ruin_prob_at_escape_is_formula() {
        let q = query(0.0, 1.0, f64::INFINITY);
        let sim = SimConfig { escape_level: Some(1.0), ..small(100) };
        let e = estimate(&q, &sim, Functional::RuinProb).unwrap();
        let rho = formulas::ruin_probability(1.0, 0.2, &q.model, &q.drawdown, &q.quad).unwrap();
        assert!((e.mean - rho).abs() < 1e-12 && e.std_error < 1e-12);
    }

    #[test]
    fn censoring_is_reported() {
        let q = query(0.0, 1.0, 3.0);
        let sim = SimConfig { horizon: 0.5, ..small(200) };
        assert!(matches!(estimate(&q, &sim, Functional::UXi), Err(Error::CensoringExcess { .. })));
    }
}
