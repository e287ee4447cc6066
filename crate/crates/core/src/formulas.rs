//! The headline quantities, assembled from the kernels by nested quadrature.
//!
//! Every problem has the shape `int_x^b exp(-int_x^y rate) source(y) dy`
//! (possibly plus a boundary term), so each evaluation builds one grid on
//! `[x, b]`, samples the rate, takes its cumulative integral once and then
//! integrates the sources against `exp(-I)` on the same nodes.

use rayon::prelude::*;

use crate::drawdown::DrawdownSpec;
use crate::error::{Error, Result};
use crate::kernels::{KernelContext, TransformSpec};
use crate::levy_model::ModelParams;
use crate::quadrature::{adaptive_pieces, Grid, QuadratureConfig};

/// One problem instance: start `x`, barrier `b` (may be `+inf` where supported).
#[derive(Debug, Clone)]
pub struct Query {
    pub x: f64,
    pub b: f64,
    pub transform: TransformSpec,
    pub drawdown: DrawdownSpec,
    pub model: ModelParams,
    pub quad: QuadratureConfig,
}

impl Query {
    pub fn new(model: ModelParams, drawdown: DrawdownSpec, transform: TransformSpec, x: f64, b: f64) -> Self {
        Query { x, b, transform, drawdown, model, quad: QuadratureConfig::default() }
    }

    pub fn with_quad(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn at(&self, x: f64) -> Self {
        Query { x, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        self.transform.validate()?;
        if !self.x.is_finite() || self.x < self.drawdown.domain_min {
            return Err(Error::DomainViolation { x: self.x, xi: self.drawdown.xi_unchecked(self.x) });
        }
        if !(self.x <= self.b) {
            return Err(Error::Domain(format!("need x <= b, got x={}, b={}", self.x, self.b)));
        }
        Ok(())
    }

    fn finite(&self) -> Result<()> {
        self.validate()?;
        if !self.b.is_finite() {
            return Err(Error::Domain("this quantity needs a finite barrier b".into()));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<KernelContext> {
        KernelContext::new(&self.model, self.transform, self.drawdown.clone())
    }
}

/// A rate sampled on a grid from `x`, with its running integral.
struct Profile {
    grid: Grid,
    rate: Vec<f64>,
    cum: Vec<f64>,
}

impl Profile {
    fn build(x: f64, b: f64, breaks: &[f64], panel: usize, rate: impl Fn(f64) -> Result<f64>) -> Result<Profile> {
        let grid = Grid::new(x, b, breaks, panel);
        let rate: Vec<f64> = grid.nodes.iter().map(|&w| rate(w)).collect::<Result<_>>()?;
        let cum = grid.cumulative(&rate);
        Ok(Profile { grid, rate, cum })
    }

    /// Append `(end, hi]`; returns the index of the first new piece.
    fn extend(&mut self, hi: f64, breaks: &[f64], panel: usize, rate: impl Fn(f64) -> Result<f64>) -> Result<usize> {
        let piece = self.grid.pieces.len();
        let first = self.grid.extend(hi, breaks, panel);
        for &w in &self.grid.nodes[first..] {
            self.rate.push(rate(w)?);
        }
        self.cum.resize(self.grid.len(), 0.0);
        self.grid.cumulative_from(&self.rate, &mut self.cum, piece);
        Ok(piece)
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// `int source(y) exp(-I(y)) dy` over the pieces from `first_piece` on.
    fn weighted(&self, first_piece: usize, source: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let start = self.grid.pieces.get(first_piece).map_or(self.grid.len(), |p| p.0);
        let mut g = vec![0.0; self.grid.len()];
        for (k, gk) in g.iter_mut().enumerate().skip(start) {
            let e = (-self.cum[k]).exp();
            *gk = if e == 0.0 { 0.0 } else { source(self.grid.nodes[k])? * e };
        }
        Ok(self.grid.integral_from(&g, first_piece))
    }

    /// `I(y)` between nodes.
    fn at(&self, y: f64) -> f64 {
        self.grid.hermite(&self.cum, &self.rate, y)
    }
}

/// Length of the first window and node budget per extension piece when
/// chasing an infinite upper limit.
const FIRST_WINDOW: f64 = 8.0;

fn extension_panel(panel: usize, len: f64) -> usize {
    ((panel as f64 * FIRST_WINDOW / len).ceil() as usize).clamp(16, panel)
}

fn truncation_failure(upper: f64, increment: f64) -> Error {
    Error::TruncationFailure { upper, increment }
}

/// `(E_x[e^{-q kappa}; kappa < theta], E_x[e^{-q theta}; theta < kappa])` on one grid.
pub fn exit_pair(query: &Query) -> Result<(f64, f64)> {
    query.finite()?;
    if query.x == query.b {
        return Ok((1.0, 0.0));
    }
    let ctx = query.context()?;
    let breaks = ctx.drawdown.kinks_in(query.x, query.b);
    let p = Profile::build(query.x, query.b, &breaks, query.quad.panel, |w| ctx.ell1(w))?;
    let up = (-p.total()).exp();
    let ruin = p.weighted(0, |y| ctx.ell1_bar(y))?;
    Ok((up, ruin))
}

/// `E_x[e^{-q kappa_b^+}; kappa_b^+ < theta]`.
pub fn upcross_laplace(query: &Query) -> Result<f64> {
    exit_pair(query).map(|p| p.0)
}

/// `E_x[e^{-q theta}; theta < kappa_b^+]`.
pub fn parisian_ruin_laplace(query: &Query) -> Result<f64> {
    exit_pair(query).map(|p| p.1)
}

/// `E_x[e^{-q (kappa_b^+ ^ theta)}]`.
pub fn u_xi(query: &Query) -> Result<f64> {
    exit_pair(query).map(|(a, b)| a + b)
}

/// `P_x(theta < inf)` for the undiscounted problem with no barrier.
pub fn ruin_probability(
    x: f64,
    lambda: f64,
    model: &ModelParams,
    drawdown: &DrawdownSpec,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let query = Query::new(*model, drawdown.clone(), TransformSpec::new(0.0, lambda)?, x, f64::INFINITY).with_quad(*quad);
    query.validate()?;
    let ctx = query.context()?;
    let rate = |w: f64| ctx.ell1(w);
    let mut hi = x + FIRST_WINDOW;
    let mut p = Profile::build(x, hi, &drawdown.kinks_in(x, hi), quad.panel, rate)?;
    loop {
        if p.total() > 745.0 {
            return Ok(1.0);
        }
        if hi >= quad.max_upper {
            let last = p.rate.last().copied().unwrap_or(0.0);
            return Err(truncation_failure(hi, last));
        }
        let next = (x + 2.0 * (hi - x)).min(quad.max_upper.max(x + FIRST_WINDOW));
        let before = p.total();
        p.extend(next, &drawdown.kinks_in(hi, next), extension_panel(quad.panel, next - hi), rate)?;
        let tail = exp_tail(rate(0.5 * (hi + next))?, *p.rate.last().unwrap(), 0.5 * (next - hi));
        hi = next;
        if p.total() - before < quad.truncation_eps {
            return Ok(-(-p.total()).exp_m1());
        }
        if let Some(t) = tail.filter(|&t| t < quad.truncation_eps) {
            return Ok(-(-(p.total() + t)).exp_m1());
        }
    }
}

/// `G(x; b) = E_x[e^{-q T + u U(T) - v R(T)}]`, `T = kappa_b^+ ^ theta`.
pub fn joint_laplace_g(query: &Query) -> Result<f64> {
    query.finite()?;
    let u = query.transform.u;
    if query.x == query.b {
        query.context()?; // still reject a transform pole
        return Ok((u * query.b).exp());
    }
    let ctx = query.context()?;
    let breaks = ctx.drawdown.kinks_in(query.x, query.b);
    let p = Profile::build(query.x, query.b, &breaks, query.quad.panel, |w| ctx.ell2(w))?;
    // e^{ub} e^{-I(b)} formed in log space
    let top = (u * query.b - p.total()).exp();
    let body = p.weighted(0, |z| ctx.joint_source(z))?;
    Ok(top + body)
}

/// `E_x[int_0^T e^{-qt} dR(t)]`, `T = kappa_b^+ ^ theta`; `b` may be infinite.
pub fn expected_injections(query: &Query) -> Result<f64> {
    query.validate()?;
    if query.x == query.b {
        return Ok(0.0);
    }
    let ctx = query.context()?;
    let (x, quad) = (query.x, &query.quad);
    let rate = |w: f64| ctx.ell1(w);
    let source = |y: f64| ctx.ell4(y);
    if query.b.is_finite() {
        let p = Profile::build(x, query.b, &ctx.drawdown.kinks_in(x, query.b), quad.panel, rate)?;
        return p.weighted(0, source);
    }
    let mut hi = x + FIRST_WINDOW;
    let mut p = Profile::build(x, hi, &ctx.drawdown.kinks_in(x, hi), quad.panel, rate)?;
    let mut total = p.weighted(0, source)?;
    loop {
        if hi >= quad.max_upper {
            return Err(truncation_failure(hi, source(hi)? * (-p.total()).exp()));
        }
        let next = (x + 2.0 * (hi - x)).min(quad.max_upper.max(x + FIRST_WINDOW));
        let piece = p.extend(next, &ctx.drawdown.kinks_in(hi, next), extension_panel(quad.panel, next - hi), rate)?;
        let mid = 0.5 * (hi + next);
        let tail = exp_tail(source(mid)? * (-p.at(mid)).exp(), source(next)? * (-p.total()).exp(), 0.5 * (next - hi));
        hi = next;
        let inc = p.weighted(piece, source)?;
        total += inc;
        if inc.abs() < quad.truncation_eps {
            return Ok(total);
        }
        if let Some(t) = tail.filter(|&t| t < quad.truncation_eps) {
            return Ok(total + t);
        }
    }
}

/// Integral beyond the window end of a positive integrand decaying at least
/// as fast as it did over the window's second half (length `half`).
/// `None` unless it is strictly decreasing there.
fn exp_tail(at_mid: f64, at_end: f64, half: f64) -> Option<f64> {
    if at_end == 0.0 && at_mid >= 0.0 {
        return Some(0.0);
    }
    if !(at_end > 0.0 && at_mid > at_end) {
        return None;
    }
    Some(at_end * half / (at_mid / at_end).ln())
}

/// The killed occupation density of `U` for one query, reusable across `u`.
pub struct Resolvent {
    ctx: KernelContext,
    profile: Profile,
    x: f64,
    b: f64,
    quad: QuadratureConfig,
}

impl Resolvent {
    pub fn new(query: &Query) -> Result<Resolvent> {
        query.finite()?;
        let ctx = query.context()?;
        let breaks = ctx.drawdown.kinks_in(query.x, query.b);
        let profile = Profile::build(query.x, query.b, &breaks, query.quad.panel, |w| ctx.ell1(w))?;
        Ok(Resolvent { ctx, profile, x: query.x, b: query.b, quad: query.quad })
    }

    /// Density of `int_0^T e^{-qt} 1{U(t) in du} dt` at `u`.
    pub fn density(&self, u: f64) -> Result<f64> {
        if !(u <= self.b) || u.is_nan() {
            return Ok(0.0);
        }
        let dd = &self.ctx.drawdown;
        let mut total = 0.0;
        if u > self.x && u < self.b {
            total += self.ctx.base().w_zero() * (-self.profile.at(u)).exp();
        }
        let lo = u.max(self.x);
        let hi = dd.preimage_sup(u, lo, self.b);
        if hi > lo {
            let f = |y: f64| -> Result<f64> {
                let pos = u.max(dd.xi_unchecked(y)).min(y);
                Ok((-self.profile.at(y)).exp() * self.ctx.ell3(y, pos)?)
            };
            total += adaptive_pieces(f, lo, hi, &dd.kinks_in(lo, hi), self.quad.abs_tol * 1e-2, self.quad.rel_tol * 1e-1)?;
        }
        Ok(if (-1e-9..0.0).contains(&total) { 0.0 } else { total })
    }

    /// Points where the density (as a function of `u`) may be non-smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let dd = &self.ctx.drawdown;
        let mut pts = vec![dd.xi_unchecked(self.x), self.x, dd.xi_unchecked(self.b), self.b];
        for k in dd.kinks_in(self.x, self.b) {
            pts.push(k);
            pts.push(dd.xi_unchecked(k));
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    /// `q * int density(u) du`, which equals `1 - u_xi`.
    pub fn killed_mass(&self) -> Result<f64> {
        let pts = self.breakpoints();
        let dd = &self.ctx.drawdown;
        // lowest reachable level
        let lo = if dd.is_monotone() {
            dd.xi_unchecked(self.x)
        } else {
            self.profile.grid.nodes.iter().map(|&y| dd.xi_unchecked(y)).fold(f64::INFINITY, f64::min)
        };
        let mass = adaptive_pieces(|u| self.density(u), lo, self.b, &pts, self.quad.abs_tol, self.quad.rel_tol)?;
        Ok(self.ctx.transform.q * mass)
    }
}

pub fn resolvent_u_density(query: &Query, u_pos: f64) -> Result<f64> {
    Resolvent::new(query)?.density(u_pos)
}

/// Density over `us` as `(u, density)` pairs, evaluated in parallel.
pub fn resolvent_u_curve(query: &Query, us: &[f64]) -> Result<Vec<(f64, f64)>> {
    let r = Resolvent::new(query)?;
    us.par_iter().map(|&u| Ok((u, r.density(u)?))).collect()
}

/// Evaluate `f` at every `x`, in parallel, preserving order.
pub fn sweep<F>(xs: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    xs.par_iter().map(|&x| f(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(sigma: f64, x: f64, b: f64) -> Query {
        Query::new(
            ModelParams::insurance_example(sigma),
            DrawdownSpec::linear(0.8).unwrap(),
            TransformSpec::new(0.05, 0.2).unwrap(),
            x,
            b,
        )
    }

    #[test]
    fn boundary_values_are_exact() {
        for sigma in [0.0, 0.2] {
            let q = query(sigma, 3.0, 3.0);
            assert_eq!(upcross_laplace(&q).unwrap(), 1.0);
            assert_eq!(parisian_ruin_laplace(&q).unwrap(), 0.0);
            assert_eq!(expected_injections(&q).unwrap(), 0.0);
            let mut g = q.clone();
            g.transform = TransformSpec::with_tilts(0.05, 0.2, 0.1, 0.3).unwrap();
            assert_eq!(joint_laplace_g(&g).unwrap(), 0.3f64.exp());
        }
    }

    #[test]
    fn exit_values_in_range_and_additive() {
        let q = query(0.2, 1.0, 3.0);
        let (a, b) = exit_pair(&q).unwrap();
        assert!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0);
        assert_eq!(u_xi(&q).unwrap(), a + b);
    }

    #[test]
    fn joint_reduces_to_u_xi() {
        for sigma in [0.0, 0.2] {
            let q = query(sigma, 0.7, 3.0);
            let g = joint_laplace_g(&q).unwrap();
            let u = u_xi(&q).unwrap();
            assert!((g / u - 1.0).abs() < 1e-10, "{g} {u}");
        }
    }

    #[test]
    fn ruin_probability_shape() {
        let m = ModelParams::insurance_example(0.2);
        let d = DrawdownSpec::linear(0.8).unwrap();
        let quad = QuadratureConfig::default();
        let xs = [0.5, 1.0, 5.0, 20.0, 50.0];
        let v = sweep(&xs, |x| ruin_probability(x, 0.2, &m, &d, &quad)).unwrap();
        for w in v.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(v[4] < 0.01 && v[0] <= 1.0);
        let hi = ruin_probability(1.0, 0.5, &m, &d, &quad).unwrap();
        let lo = ruin_probability(1.0, 0.1, &m, &d, &quad).unwrap();
        assert!(hi > lo);
        let s0 = ruin_probability(1.0, 0.2, &ModelParams::insurance_example(0.0), &d, &quad).unwrap();
        assert!(v[1] > s0);
    }

    #[test]
    fn truncation_failure_is_reported() {
        let m = ModelParams::insurance_example(0.2);
        let d = DrawdownSpec::linear(0.99).unwrap();
        let quad = QuadratureConfig { max_upper: 12.0, ..Default::default() };
        assert!(matches!(ruin_probability(1.0, 0.2, &m, &d, &quad), Err(Error::TruncationFailure { .. })));
    }

    #[test]
    fn injections_vanish_without_downward_motion() {
        let q = Query::new(
            ModelParams::new(0.1, 0.0, 0.0, 9.0).unwrap(),
            DrawdownSpec::linear(0.8).unwrap(),
            TransformSpec::new(0.05, 0.2).unwrap(),
            1.0,
            3.0,
        );
        assert_eq!(expected_injections(&q).unwrap(), 0.0);
    }

    #[test]
    fn injections_decrease_in_x() {
        let q = query(0.2, 1.0, f64::INFINITY);
        let v = sweep(&[0.5, 1.0, 2.0, 4.0], |x| expected_injections(&q.at(x))).unwrap();
        for w in v.windows(2) {
            assert!(w[1] < w[0] && w[1] > 0.0);
        }
    }

    #[test]
    fn resolvent_mass_balance() {
        for sigma in [0.0, 0.2] {
            let q = query(sigma, 1.0, 2.0);
            let r = Resolvent::new(&q).unwrap();
            let mass = r.killed_mass().unwrap();
            let u = u_xi(&q).unwrap();
            assert!((mass + u - 1.0).abs() < 1e-6, "sigma {sigma}: {mass} + {u}");
            assert_eq!(r.density(2.5).unwrap(), 0.0);
        }
    }
}
