//! Pointwise kernels: compositions of scale-function evaluations at the
//! draw-down gap `xi_bar(w)`.

use std::sync::Arc;

use crate::drawdown::DrawdownSpec;
use crate::error::{Error, Result};
use crate::levy_model::ModelParams;
use crate::quadrature::{Grid, QuadratureConfig};
use crate::scale_functions::{ScaleFamily, ScaleRep, Scaled};

/// Discount `q`, Parisian rate `lambda`, and the tilts `u` (on the surplus)
/// and `v` (on injected capital).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub q: f64,
    pub lambda: f64,
    pub u: f64,
    pub v: f64,
}

impl TransformSpec {
    pub fn new(q: f64, lambda: f64) -> Result<Self> {
        Self::with_tilts(q, lambda, 0.0, 0.0)
    }

    pub fn with_tilts(q: f64, lambda: f64, u: f64, v: f64) -> Result<Self> {
        let t = TransformSpec { q, lambda, u, v };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.q) || !ok(self.u) || !ok(self.v) {
            return Err(Error::InvalidParameter("q, u, v must be finite and >= 0".into()));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn boosted_rate(&self) -> f64 {
        self.q + self.lambda
    }
}

/// Everything a kernel needs: the draw-down rule, the transform, and the two
/// scale families at rates `q` and `q + lambda`.
#[derive(Debug, Clone)]
pub struct KernelContext {
    pub transform: TransformSpec,
    pub drawdown: DrawdownSpec,
    base: Arc<dyn ScaleFamily>,
    boosted: Arc<dyn ScaleFamily>,
}

impl KernelContext {
    pub fn new(model: &ModelParams, transform: TransformSpec, drawdown: DrawdownSpec) -> Result<Self> {
        transform.validate()?;
        let base = Arc::new(ScaleRep::new(model, transform.q)?);
        let boosted = Arc::new(ScaleRep::new(model, transform.boosted_rate())?);
        Self::from_families(base, boosted, transform, drawdown)
    }

    /// Plug in any pair of scale families (rates `q` and `q + lambda`).
    pub fn from_families(
        base: Arc<dyn ScaleFamily>,
        boosted: Arc<dyn ScaleFamily>,
        transform: TransformSpec,
        drawdown: DrawdownSpec,
    ) -> Result<Self> {
        transform.validate()?;
        if transform.u > 0.0 && transform.u >= boosted.phi() {
            return Err(Error::TransformPole { u: transform.u, phi: boosted.phi() });
        }
        Ok(KernelContext { transform, drawdown, base, boosted })
    }

    pub fn base(&self) -> &dyn ScaleFamily {
        self.base.as_ref()
    }

    pub fn boosted(&self) -> &dyn ScaleFamily {
        self.boosted.as_ref()
    }

    fn gap(&self, w: f64) -> Result<f64> {
        let g = self.drawdown.xi_bar(w)?;
        if self.base.w_zero() == 0.0 && g <= 0.0 {
            return Err(Error::BoundaryEval { x: w });
        }
        Ok(g)
    }

    /// Killing rate of the upcrossing transform at level `w`.
    pub fn ell1(&self, w: f64) -> Result<f64> {
        self.ell2_at(self.gap(w)?, 0.0)
    }

    /// Rate at which Parisian ruin is collected at level `y`.
    pub fn ell1_bar(&self, y: f64) -> Result<f64> {
        let s = self.gap(y)?;
        let ep = self.boosted.eval(s);
        let k = self.base.exit_kernel(s, 0.0);
        Ok(self.transform.lambda * ep.w_bar.ratio(ep.z) * k)
    }

    pub fn ell2(&self, w: f64) -> Result<f64> {
        self.ell2_at(self.gap(w)?, self.transform.v)
    }

    /// Written as `W'/W (Z_p - Z_q)/Z_p + (v Z_q + (q - psi(v)) W_q)/Z_p`, all
    /// at `(s, v)`, with `Z_p - Z_q` expanded so small gaps do not cancel.
    fn ell2_at(&self, s: f64, v: f64) -> Result<f64> {
        let (q, p) = (self.transform.q, self.transform.boosted_rate());
        let eb = self.base.eval(s);
        if eb.w.m <= 0.0 {
            return Err(Error::BoundaryEval { x: s });
        }
        let (zq, tq) = self.base.tilted(s, v);
        let (zp, tp) = self.boosted.tilted(s, v);
        let psi_v = self.base.psi(v);
        let shift = |t: Scaled| Scaled { m: t.m, ln_s: t.ln_s + v * s };
        let diff = (p - psi_v) * shift(tp).ratio(zp) - (q - psi_v) * shift(tq).ratio(zp);
        let tail = v * zq.ratio(zp) + (q - psi_v) * eb.w.ratio(zp);
        Ok(eb.log_derivative() * diff + tail)
    }

    /// `lambda e^{u z} int_0^z e^{-u y} W_{q+lambda}(y) dy / Z_{q+lambda}(z, v)`.
    pub fn hbar(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::Domain(format!("hbar needs z >= 0, got {z}")));
        }
        let TransformSpec { lambda, u, v, .. } = self.transform;
        if u > 0.0 && u >= self.boosted.phi() {
            return Err(Error::TransformPole { u, phi: self.boosted.phi() });
        }
        let (_, t) = self.boosted.tilted(z, u);
        let (zv, _) = self.boosted.tilted(z, v);
        Ok(lambda * Scaled { m: t.m, ln_s: t.ln_s + u * z }.ratio(zv))
    }

    /// Negative source term of the joint transform.
    pub fn ell2_bar(&self, w: f64) -> Result<f64> {
        let s = self.gap(w)?;
        let xi = self.drawdown.xi_unchecked(w);
        let k = self.base.exit_kernel(s, self.transform.v);
        Ok(-(self.transform.u * xi).exp() * self.hbar(s)? * k)
    }

    /// `e^{u xi(w)} hbar(xi_bar(w)) K_v(xi_bar(w))`, i.e. `-ell2_bar`.
    pub(crate) fn joint_source(&self, w: f64) -> Result<f64> {
        self.ell2_bar(w).map(|v| -v)
    }

    /// Occupation kernel of the killed draw-down reflected process: excursion
    /// started from record `y` contributes this density at position `u_pos`.
    pub fn ell3(&self, y: f64, u_pos: f64) -> Result<f64> {
        let s = self.gap(y)?;
        let xi = y - s;
        if !(u_pos >= xi && u_pos <= y) {
            return Err(Error::Domain(format!("ell3 needs {xi} <= u <= {y}, got {u_pos}")));
        }
        let t = y - u_pos;
        let eb = self.base.eval(s);
        let et = self.base.eval(t);
        let ep_s = self.boosted.eval(s);
        let ep_t = self.boosted.eval(t);
        let k = self.base.exit_kernel(s, 0.0);
        let escape = k * ep_t.w.ratio(ep_s.z);
        Ok(escape + et.w_prime.value() - eb.log_derivative() * et.w.value())
    }

    /// Expected discounted injection rate at level `y`.
    pub fn ell4(&self, y: f64) -> Result<f64> {
        let s = self.gap(y)?;
        let d = self.base.mean_drift();
        let ep = self.boosted.eval(s);
        let ratio = (ep.z_bar.m - d * ep.w_bar.m) / ep.z.m;
        Ok(self.base.overshoot_kernel(s) + ratio * self.base.exit_kernel(s, 0.0))
    }

    /// `W_q'/W_q(xi_bar(w))`: the killing rate of the classical draw-down problem.
    pub fn drawdown_rate(&self, w: f64) -> Result<f64> {
        let s = self.gap(w)?;
        let e = self.base.eval(s);
        if e.w.m <= 0.0 {
            return Err(Error::BoundaryEval { x: w });
        }
        Ok(e.log_derivative())
    }

    /// `E_x(e^{-q tau_b^+}; tau_b^+ < tau_xi)`.
    pub fn classical_upcross(&self, x: f64, b: f64, quad: &QuadratureConfig) -> Result<f64> {
        check_interval(x, b)?;
        let g = self.grid(x, b, quad);
        let rate = self.sample(&g, |w| self.drawdown_rate(w))?;
        Ok((-g.integral(&rate)).exp())
    }

    fn grid(&self, x: f64, b: f64, quad: &QuadratureConfig) -> Grid {
        Grid::new(x, b, &self.drawdown.kinks_in(x, b), quad.panel)
    }

    fn sample(&self, g: &Grid, f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
        g.nodes.iter().map(|&w| f(w)).collect()
    }

    /// `E_x(e^{-q tau_xi} phi(Xbar(tau_xi)); tau_xi < tau_b^+)`.
    pub fn drawdown_laplace(
        &self,
        x: f64,
        b: f64,
        phi: impl Fn(f64) -> f64,
        quad: &QuadratureConfig,
    ) -> Result<f64> {
        check_interval(x, b)?;
        let g = self.grid(x, b, quad);
        let rate = self.sample(&g, |w| self.drawdown_rate(w))?;
        let cum = g.cumulative(&rate);
        let integrand: Vec<f64> = g
            .nodes
            .iter()
            .zip(&cum)
            .map(|(&s, &i)| Ok(phi(s) * self.base.exit_kernel(self.gap(s)?, 0.0) * (-i).exp()))
            .collect::<Result<_>>()?;
        Ok(g.integral(&integrand))
    }

    /// `E_x(e^{-q tau_xi}(xi(Xbar(tau_xi)) - X(tau_xi)); tau_xi < tau_b^+)`.
    pub fn drawdown_overshoot(&self, x: f64, b: f64, quad: &QuadratureConfig) -> Result<f64> {
        check_interval(x, b)?;
        let g = self.grid(x, b, quad);
        let rate = self.sample(&g, |w| self.drawdown_rate(w))?;
        let cum = g.cumulative(&rate);
        let integrand: Vec<f64> = g
            .nodes
            .iter()
            .zip(&cum)
            .map(|(&s, &i)| Ok(self.base.overshoot_kernel(self.gap(s)?) * (-i).exp()))
            .collect::<Result<_>>()?;
        Ok(g.integral(&integrand))
    }
}

fn check_interval(x: f64, b: f64) -> Result<()> {
    if !(x <= b) || !b.is_finite() {
        return Err(Error::Domain(format!("need finite b >= x, got x={x}, b={b}")));
    }
    Ok(())
}
