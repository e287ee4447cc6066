//! Laplace exponent of the exponential-jump jump-diffusion and the real roots
//! of `psi(theta) = q`.

use crate::error::{Error, Result};

/// Lévy triplet of the surplus process: drift `mu`, volatility `sigma`,
/// downward jumps arriving at rate `a` with Exp(`c`) sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub sigma: f64,
    pub a: f64,
    pub c: f64,
}

impl ModelParams {
    pub fn new(mu: f64, sigma: f64, a: f64, c: f64) -> Result<Self> {
        let p = ModelParams { mu, sigma, a, c };
        p.validate()?;
        Ok(p)
    }

    /// Parameters of the insurance example used throughout the numerical study.
    pub fn insurance_example(sigma: f64) -> Self {
        ModelParams { mu: 0.075, sigma, a: 0.5, c: 9.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if ![self.mu, self.sigma, self.a, self.c].iter().all(|v| v.is_finite()) {
            return bad("model parameters must be finite");
        }
        if self.sigma < 0.0 {
            return bad("sigma must be >= 0");
        }
        if self.a < 0.0 {
            return bad("a must be >= 0");
        }
        if self.c <= 0.0 {
            return bad("c must be > 0");
        }
        if self.sigma == 0.0 && self.mu <= 0.0 {
            return bad("sigma = 0 requires mu > 0");
        }
        Ok(())
    }

    pub fn has_unbounded_variation(&self) -> bool {
        self.sigma > 0.0
    }

    /// `psi(theta) = mu theta + sigma^2 theta^2 / 2 - a theta / (theta + c)`.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        if self.a > 0.0 && theta == -self.c {
            return Err(Error::Pole { theta });
        }
        Ok(self.psi_unchecked(theta))
    }

    pub fn psi_prime(&self, theta: f64) -> Result<f64> {
        if self.a > 0.0 && theta == -self.c {
            return Err(Error::Pole { theta });
        }
        Ok(self.psi_prime_unchecked(theta))
    }

    #[inline]
    pub(crate) fn psi_unchecked(&self, theta: f64) -> f64 {
        let jump = if self.a > 0.0 { self.a * theta / (theta + self.c) } else { 0.0 };
        self.mu * theta + 0.5 * self.sigma * self.sigma * theta * theta - jump
    }

    #[inline]
    pub(crate) fn psi_prime_unchecked(&self, theta: f64) -> f64 {
        let s = theta + self.c;
        let jump = if self.a > 0.0 { self.a * self.c / (s * s) } else { 0.0 };
        self.mu + self.sigma * self.sigma * theta - jump
    }

    /// `psi'(0+) = mu - a/c`, the mean drift of the surplus.
    pub fn mean_drift(&self) -> f64 {
        self.mu - self.a / self.c
    }

    /// Bounded-variation drift `d`, so that `W_q(0) = 1/d` when `sigma = 0`.
    pub fn linear_drift(&self) -> f64 {
        self.mu
    }

    pub fn solve_roots(&self, q: f64) -> Result<RootSet> {
        solve_roots(self, q)
    }
}

/// All real roots of `psi(theta) = q`, sorted ascending; the last one is `Phi(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub q: f64,
    pub phi_q: f64,
    /// Remaining roots in ascending order (`-beta_2 < -beta_1`).
    pub negative_roots: Vec<f64>,
}

impl RootSet {
    pub fn all(&self) -> impl Iterator<Item = f64> + '_ {
        self.negative_roots.iter().copied().chain(std::iter::once(self.phi_q))
    }

    pub fn len(&self) -> usize {
        self.negative_roots.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

const MAX_ITER: usize = 200;

pub fn psi(params: &ModelParams, theta: f64) -> Result<f64> {
    params.psi(theta)
}

pub fn psi_prime(params: &ModelParams, theta: f64) -> Result<f64> {
    params.psi_prime(theta)
}

pub fn solve_roots(params: &ModelParams, q: f64) -> Result<RootSet> {
    params.validate()?;
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q must be finite and >= 0, got {q}")));
    }
    let ModelParams { mu, sigma, a, c } = *params;
    let s2 = 0.5 * sigma * sigma;
    let drift0 = params.mean_drift();
    if q == 0.0 && drift0 == 0.0 {
        return Err(Error::DegenerateModel(
            "psi'(0+) = 0: theta = 0 is a double root at q = 0".into(),
        ));
    }

    // Candidate roots of the cleared polynomial, used as Newton seeds.
    let seeds: Vec<f64> = if a > 0.0 {
        // (theta + c)(psi - q) = s2 th^3 + (mu + c s2) th^2 + (c mu - q - a) th - q c
        poly::real_roots(&[-q * c, c * mu - q - a, mu + c * s2, s2])
            .into_iter()
            .filter(|r| (r + c).abs() > 1e-12 * c)
            .collect()
    } else {
        poly::real_roots(&[-q, mu, s2])
    };

    let f = |t: f64| params.psi_unchecked(t) - q;
    let df = |t: f64| params.psi_prime_unchecked(t);
    let tol = 1e-12 * q.max(1.0);

    let mut roots = Vec::with_capacity(3);
    // Intervals known to hold exactly one root each; poles and zero are excluded endpoints.
    let mut add = |lo: f64, hi: f64, lo_sign: f64| -> Result<()> {
        let seed = seeds.iter().copied().find(|&r| r > lo && r < hi);
        let r = polish(&f, &df, lo, hi, lo_sign, seed, tol)?;
        roots.push(r);
        Ok(())
    };

    if a > 0.0 {
        let pole_gap = c * 1e-13;
        if sigma > 0.0 {
            // f -> +inf at -inf, -> -inf at -c from the left
            let mut lo = -2.0 * c;
            while f(lo) <= 0.0 {
                lo *= 2.0;
                if !lo.is_finite() {
                    return Err(Error::DegenerateModel("no root below -c".into()));
                }
            }
            add(lo, -c - pole_gap, 1.0)?;
        }
        if q > 0.0 {
            add(-c + pole_gap, 0.0, 1.0)?;
        } else if drift0 > 0.0 {
            // zero is Phi(0); the other root sits strictly inside (-c, 0)
            let hi = -1e-300;
            if f(hi) < 0.0 {
                add(-c + pole_gap, hi, 1.0)?;
            } else {
                return Err(Error::DegenerateModel("root in (-c, 0) not bracketed".into()));
            }
        } else {
            roots.push(0.0);
        }
    } else if sigma > 0.0 {
        if q > 0.0 {
            let mut lo = -1.0;
            while f(lo) <= 0.0 {
                lo *= 2.0;
            }
            add(lo, 0.0, 1.0)?;
        } else if drift0 > 0.0 {
            // psi = theta (mu + s2 theta): root -mu/s2 < 0
            roots.push(-mu / s2);
        } else {
            roots.push(0.0);
        }
    }

    // Phi(q)
    let phi = if q == 0.0 && drift0 > 0.0 {
        0.0
    } else {
        let lo = if q > 0.0 { 0.0 } else { smallest_negative_point(&f) };
        let mut hi = seeds.iter().copied().fold(1.0_f64, f64::max).max(1.0);
        while f(hi) <= 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::DegenerateModel("Phi(q) not bracketed".into()));
            }
        }
        let seed = seeds.iter().copied().filter(|&r| r > lo).reduce(f64::max);
        polish(&f, &df, lo, hi, -1.0, seed, tol)?
    };

    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let expected = usize::from(a > 0.0 && sigma > 0.0) + usize::from(a > 0.0 || sigma > 0.0);
    if roots.len() != expected {
        return Err(Error::DegenerateModel(format!(
            "expected {} non-Phi roots, found {}",
            expected,
            roots.len()
        )));
    }
    if roots.last().is_some_and(|&r| r >= phi) {
        return Err(Error::DegenerateModel("Phi(q) is not the largest root".into()));
    }
    Ok(RootSet { q, phi_q: phi, negative_roots: roots })
}

// For q = 0 with negative mean drift, f < 0 just right of 0.
fn smallest_negative_point(f: &impl Fn(f64) -> f64) -> f64 {
    let mut t = 1e-8;
    while f(t) >= 0.0 && t > 1e-300 {
        t *= 0.5;
    }
    t
}

/// Safeguarded Newton on a bracket `[lo, hi]` where `sign(f(lo)) = lo_sign`.
fn polish(
    f: &impl Fn(f64) -> f64,
    df: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    lo_sign: f64,
    seed: Option<f64>,
    tol: f64,
) -> Result<f64> {
    let mut x = seed.unwrap_or(0.5 * (lo + hi));
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    let mut best = (f64::INFINITY, x);
    for _ in 0..MAX_ITER {
        let fx = f(x);
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx.abs() <= tol {
            return Ok(refine(f, df, x));
        }
        if fx * lo_sign > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / df(x);
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if next == x || (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            // Bracket collapsed to adjacent floats. Next to the pole the residual
            // cannot beat |f'| * ulp, so that is the acceptance bound there.
            let floor = 8.0 * df(best.1).abs() * f64::EPSILON * best.1.abs();
            return if best.0 <= 1e-10_f64.max(floor) {
                Ok(best.1)
            } else {
                Err(Error::NoConvergence { what: "root polishing", iterations: MAX_ITER })
            };
        }
        x = next;
    }
    if best.0 <= 1e-10 {
        Ok(best.1)
    } else {
        Err(Error::NoConvergence { what: "root polishing", iterations: MAX_ITER })
    }
}

/// A few extra Newton steps: a small residual is not a small relative error
/// when the root itself is tiny (e.g. `Phi(q)` for `q -> 0`).
fn refine(f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64, mut x: f64) -> f64 {
    for _ in 0..4 {
        let fx = f(x);
        let next = x - fx / df(x);
        if !next.is_finite() || f(next).abs() > fx.abs() {
            break;
        }
        let done = (next - x).abs() <= 2.0 * f64::EPSILON * x.abs();
        x = next;
        if done {
            break;
        }
    }
    x
}

mod poly {
    use std::f64::consts::PI;

    /// Real roots of `c[0] + c[1] t + c[2] t^2 + c[3] t^3` (trailing zeros allowed).
    pub fn real_roots(c: &[f64]) -> Vec<f64> {
        let mut deg = c.len() - 1;
        while deg > 0 && c[deg] == 0.0 {
            deg -= 1;
        }
        match deg {
            0 => vec![],
            1 => vec![-c[0] / c[1]],
            2 => quadratic(c[2], c[1], c[0]),
            _ => cubic(c[3], c[2], c[1], c[0]),
        }
    }

    fn quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return vec![];
        }
        // stable form: avoid subtracting nearly equal numbers
        let qq = -0.5 * (b + b.signum() * disc.sqrt());
        if qq == 0.0 {
            return vec![0.0];
        }
        let mut r = vec![qq / a, c / qq];
        r.sort_by(|x, y| x.partial_cmp(y).unwrap());
        r
    }

    fn cubic(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
        let (b, c, d) = (b / a, c / a, d / a);
        let shift = b / 3.0;
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        let mut r = if disc > 0.0 {
            let s = disc.sqrt();
            vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() - shift]
        } else if p == 0.0 {
            vec![-shift]
        } else {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3).map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift).collect()
        };
        r.sort_by(|x, y| x.partial_cmp(y).unwrap());
        r
    }

}
