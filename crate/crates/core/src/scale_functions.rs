//! q-scale functions of the jump-diffusion as exponential mixtures, together
//! with their integrated/tilted companions and the classical exit identities.
//!
//! Every quantity that grows like `e^{Phi x}` is carried as a [`Scaled`] value
//! so that ratios stay finite long after the raw numbers would overflow.

use crate::error::{Error, Result};
use crate::levy_model::ModelParams;

/// `m * exp(ln_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub m: f64,
    pub ln_s: f64,
}

impl Scaled {
    pub fn plain(v: f64) -> Self {
        Scaled { m: v, ln_s: 0.0 }
    }

    pub fn value(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m * self.ln_s.exp()
        }
    }

    pub fn ln(self) -> f64 {
        self.m.ln() + self.ln_s
    }

    /// `self / other` without forming either number.
    pub fn ratio(self, other: Scaled) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        (self.m / other.m) * (self.ln_s - other.ln_s).exp()
    }
}

/// `W, W', Wbar, Z, Zbar` at one point, sharing a common scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEval {
    pub x: f64,
    pub w: Scaled,
    pub w_prime: Scaled,
    pub w_bar: Scaled,
    pub z: Scaled,
    pub z_bar: Scaled,
}

impl ScaleEval {
    /// `W'(x)/W(x)`.
    pub fn log_derivative(&self) -> f64 {
        self.w_prime.ratio(self.w)
    }
}

/// Evaluable scale family. Kernels only ever talk to this interface, so a
/// different process can be plugged in by implementing it.
pub trait ScaleFamily: Send + Sync + std::fmt::Debug {
    fn q(&self) -> f64;
    /// `Phi(q)`.
    fn phi(&self) -> f64;
    fn psi(&self, theta: f64) -> f64;
    fn psi_prime(&self, theta: f64) -> f64;
    /// `psi'(0+)`.
    fn mean_drift(&self) -> f64 {
        self.psi_prime(0.0)
    }
    /// `W(0+)`: zero for unbounded variation.
    fn w_zero(&self) -> f64;

    fn eval(&self, x: f64) -> ScaleEval;

    /// `Z(x, theta)` and `int_0^x e^{-theta y} W(y) dy`.
    fn tilted(&self, x: f64, theta: f64) -> (Scaled, Scaled);

    fn w(&self, x: f64) -> f64 {
        self.eval(x).w.value()
    }
    /// Right derivative; `W'(0+)` at zero, `0` for negative `x`.
    fn w_prime(&self, x: f64) -> f64 {
        self.eval(x).w_prime.value()
    }
    fn w_bar(&self, x: f64) -> f64 {
        self.eval(x).w_bar.value()
    }
    fn z(&self, x: f64) -> f64 {
        self.eval(x).z.value()
    }
    fn z_bar(&self, x: f64) -> f64 {
        self.eval(x).z_bar.value()
    }
    fn z_theta(&self, x: f64, theta: f64) -> f64 {
        self.tilted(x, theta).0.value()
    }

    /// `W'/W Z(x,theta) - theta Z(x,theta) - (q - psi(theta)) W(x)`.
    ///
    /// The generic version forms the expression directly and can lose all
    /// precision through cancellation; implementors should override it.
    fn exit_kernel(&self, x: f64, theta: f64) -> f64 {
        let e = self.eval(x);
        let (zt, _) = self.tilted(x, theta);
        let a = e.log_derivative() * zt.value();
        a - theta * zt.value() - (self.q() - self.psi(theta)) * e.w.value()
    }

    /// `Z - psi'(0+) W - (Zbar - psi'(0+) Wbar) W'/W`, the overshoot density
    /// behind the expected-injection formula.
    fn overshoot_kernel(&self, x: f64) -> f64 {
        let e = self.eval(x);
        let d = self.mean_drift();
        let lead = e.z.value() - d * e.w.value();
        let tail = (e.z_bar.value() - d * e.w_bar.value()) * e.log_derivative();
        lead - tail
    }
}

/// `W_q(x) = sum_i w_i e^{r_i x}` with `w_i = 1/psi'(r_i)` over the roots of `psi = q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRep {
    model: ModelParams,
    q: f64,
    phi: f64,
    /// (exponent, weight), ascending exponent; last is Phi(q).
    terms: Vec<(f64, f64)>,
}

const REMOVABLE: f64 = 1e-9;

impl ScaleRep {
    pub fn new(model: &ModelParams, q: f64) -> Result<Self> {
        let roots = model.solve_roots(q)?;
        let terms: Vec<(f64, f64)> =
            roots.all().map(|r| (r, 1.0 / model.psi_prime_unchecked(r))).collect();
        if terms.iter().any(|(_, w)| !w.is_finite()) {
            return Err(Error::DegenerateModel("repeated root of psi = q".into()));
        }
        Ok(ScaleRep { model: *model, q, phi: roots.phi_q, terms })
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// Checked derivative: only defined on `(0, inf)`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("W' needs x > 0, got {x}")));
        }
        Ok(self.w_prime(x))
    }

    #[inline]
    fn scale(&self, x: f64) -> f64 {
        self.phi * x
    }

    /// `c_i(theta) = (q - psi(theta)) / (r_i - theta)`, with its limit `psi'(r_i)` at a root.
    #[inline]
    fn tilt_coeff(&self, r: f64, theta: f64, gap: f64) -> f64 {
        if (r - theta).abs() < REMOVABLE {
            self.model.psi_prime_unchecked(r)
        } else {
            gap / (r - theta)
        }
    }

    fn sum_scaled(&self, x: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let s = self.scale(x);
        self.terms.iter().map(|&(r, w)| f(r, w) * ((r * x) - s).exp()).sum()
    }

    /// `W_q(x) e^{-Phi x}`, the tilted scale function; nondecreasing, bounded by `1/psi'(Phi)`.
    pub fn w_tilted(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.sum_scaled(x, |_, w| w)
    }

    pub fn mean_drift(&self) -> f64 {
        self.model.mean_drift()
    }
}

/// `(e^{r x} - 1)/r * e^{-s}`.
#[inline]
fn e1(r: f64, x: f64, s: f64) -> f64 {
    let rx = r * x;
    if r.abs() < REMOVABLE {
        x * (-s).exp() * (1.0 + 0.5 * rx)
    } else if rx.abs() < 1.0 {
        rx.exp_m1() / r * (-s).exp()
    } else {
        ((rx - s).exp() - (-s).exp()) / r
    }
}

/// `(e^{r x} - 1 - r x)/r^2 * e^{-s}`.
#[inline]
fn e2(r: f64, x: f64, s: f64) -> f64 {
    let rx = r * x;
    if rx.abs() < 0.1 {
        // x^2 sum_k (rx)^k / (k+2)!
        let mut term = 0.5;
        let mut acc = 0.5;
        for k in 1..12 {
            term *= rx / (k as f64 + 2.0);
            acc += term;
        }
        acc * x * x * (-s).exp()
    } else if rx.abs() < 30.0 {
        (rx.exp_m1() - rx) / (r * r) * (-s).exp()
    } else {
        ((rx - s).exp() - (-s).exp() * (1.0 + rx)) / (r * r)
    }
}

impl ScaleFamily for ScaleRep {
    fn q(&self) -> f64 {
        self.q
    }
    fn phi(&self) -> f64 {
        self.phi
    }
    fn psi(&self, theta: f64) -> f64 {
        self.model.psi_unchecked(theta)
    }
    fn psi_prime(&self, theta: f64) -> f64 {
        self.model.psi_prime_unchecked(theta)
    }
    fn mean_drift(&self) -> f64 {
        self.model.mean_drift()
    }
    fn w_zero(&self) -> f64 {
        if self.model.has_unbounded_variation() {
            0.0
        } else {
            self.terms.iter().map(|t| t.1).sum()
        }
    }

    fn eval(&self, x: f64) -> ScaleEval {
        if x < 0.0 {
            let z0 = Scaled::plain(0.0);
            return ScaleEval {
                x,
                w: z0,
                w_prime: z0,
                w_bar: z0,
                z: Scaled::plain(1.0),
                z_bar: Scaled::plain(x),
            };
        }
        let s = self.scale(x);
        let mut w = 0.0;
        let mut wp = 0.0;
        let mut wb = 0.0;
        let mut zb2 = 0.0;
        for &(r, wt) in &self.terms {
            let e = (r * x - s).exp();
            w += wt * e;
            wp += wt * r * e;
            wb += wt * e1(r, x, s);
            zb2 += wt * e2(r, x, s);
        }
        if x == 0.0 {
            w = self.w_zero();
        }
        let es = (-s).exp();
        let sc = |m| Scaled { m, ln_s: s };
        ScaleEval {
            x,
            w: sc(w.max(0.0)),
            w_prime: sc(wp),
            w_bar: sc(wb.max(0.0)),
            z: sc(es + self.q * wb.max(0.0)),
            z_bar: sc(x * es + self.q * zb2.max(0.0)),
        }
    }

    fn tilted(&self, x: f64, theta: f64) -> (Scaled, Scaled) {
        if x <= 0.0 {
            return (Scaled::plain(1.0), Scaled::plain(0.0));
        }
        let s = self.scale(x);
        let gap = self.q - self.psi(theta);
        let z = if theta == 0.0 {
            self.eval(x).z.m
        } else {
            self.sum_scaled(x, |r, w| w * self.tilt_coeff(r, theta, gap))
        };
        let st = ((self.phi - theta) * x).max(0.0);
        let t: f64 = self.terms.iter().map(|&(r, w)| w * e1(r - theta, x, st)).sum();
        (Scaled { m: z, ln_s: s }, Scaled { m: t.max(0.0), ln_s: st })
    }

    fn exit_kernel(&self, x: f64, theta: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let s = self.scale(x);
        let gap = self.q - self.psi(theta);
        let n = self.terms.len();
        let mut num = 0.0;
        for i in 0..n {
            let (ri, wi) = self.terms[i];
            let ci = self.tilt_coeff(ri, theta, gap);
            for j in i + 1..n {
                let (rj, wj) = self.terms[j];
                let cj = self.tilt_coeff(rj, theta, gap);
                num += wi * wj * (ri - rj) * (cj - ci) * ((ri + rj) * x - s).exp();
            }
        }
        let w = if x == 0.0 { self.w_zero() } else { self.sum_scaled(x, |_, w| w) };
        num / w
    }

    fn overshoot_kernel(&self, x: f64) -> f64 {
        if self.q <= 0.0 || self.terms.iter().any(|t| t.0.abs() < 1e-12) {
            // the pairwise form leans on sum w_i / r_i = 1/q
            let e = self.eval(x);
            let d = self.mean_drift();
            return e.z.value() - d * e.w.value()
                - (e.z_bar.value() - d * e.w_bar.value()) * e.log_derivative();
        }
        if x < 0.0 {
            return 1.0;
        }
        let d = self.mean_drift();
        let s = self.scale(x);
        let coef: Vec<f64> = self.terms.iter().map(|&(r, _)| self.q / (r * r) - d / r).collect();
        let n = self.terms.len();
        let mut num = 0.0;
        for i in 0..n {
            let (ri, wi) = self.terms[i];
            for j in i + 1..n {
                let (rj, wj) = self.terms[j];
                num += wi * wj * (ri - rj) * (coef[i] - coef[j]) * ((ri + rj) * x - s).exp();
            }
        }
        let w = if x == 0.0 { self.w_zero() } else { self.sum_scaled(x, |_, w| w) };
        if w == 0.0 {
            // unbounded variation at the origin: Z(0) - psi'(0) W(0) = 1
            return 1.0;
        }
        num / w
    }
}

/// `E_x(e^{-q tau_b^+}; tau_b^+ < tau_c^-) = W(x-c)/W(b-c)`.
pub fn classical_two_sided_exit(rep: &dyn ScaleFamily, x: f64, lower: f64, upper: f64) -> Result<f64> {
    if !(lower <= x && x <= upper && upper > lower) {
        return Err(Error::Domain(format!("need {lower} <= {x} <= {upper}")));
    }
    Ok(rep.eval(x - lower).w.ratio(rep.eval(upper - lower).w))
}

/// `Z(x)/Z(b)` for the process reflected at its infimum.
pub fn reflected_exit(rep: &dyn ScaleFamily, x: f64, b: f64) -> Result<f64> {
    if !(0.0 <= x && x <= b) {
        return Err(Error::Domain(format!("need 0 <= {x} <= {b}")));
    }
    Ok(rep.eval(x).z.ratio(rep.eval(b).z))
}

/// Killed resolvent density of X on `(c, b)` started at `x`.
pub fn resolvent_x_density(rep: &dyn ScaleFamily, x: f64, y: f64, lower: f64, upper: f64) -> Result<f64> {
    if !(lower < x && x < upper) {
        return Err(Error::Domain(format!("need {lower} < {x} < {upper}")));
    }
    if !(y > lower && y < upper) {
        return Ok(0.0);
    }
    let ratio = classical_two_sided_exit(rep, x, lower, upper)?;
    Ok((ratio * rep.w(upper - y) - rep.w(x - y)).max(0.0))
}

/// Killed resolvent density of the process reflected at zero, on `[0, b)`.
pub fn resolvent_y_density(rep: &dyn ScaleFamily, x: f64, y: f64, b: f64) -> Result<f64> {
    if !(0.0 <= x && x < b) {
        return Err(Error::Domain(format!("need 0 <= {x} < {b}")));
    }
    if !(0.0..b).contains(&y) {
        return Ok(0.0);
    }
    let ratio = reflected_exit(rep, x, b)?;
    Ok((ratio * rep.w(b - y) - rep.w(x - y)).max(0.0))
}
