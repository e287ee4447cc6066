//! Draw-down functions `xi` and their gaps `xi_bar(x) = x - xi(x)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_DOMAIN_MIN: f64 = 1e-6;
const VALIDATION_POINTS: usize = 10_000;

type XiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DrawdownKind {
    /// `xi(x) = k x`.
    Linear { k: f64 },
    /// `xi(x) = min(cap, k x)`.
    CappedLinear { cap: f64, k: f64 },
    /// User-supplied `xi`, with the points where it fails to be smooth.
    Custom { f: XiFn, kinks: Vec<f64>, label: String, monotone: bool },
}

impl fmt::Debug for DrawdownKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrawdownKind::Linear { k } => write!(f, "Linear({k})"),
            DrawdownKind::CappedLinear { cap, k } => write!(f, "CappedLinear({cap}, {k})"),
            DrawdownKind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DrawdownSpec {
    pub kind: DrawdownKind,
    /// Lowest level at which `xi(x) < x` is guaranteed.
    pub domain_min: f64,
}

impl DrawdownSpec {
    pub fn linear(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::InvalidParameter(format!("linear draw-down needs 0 < K < 1, got {k}")));
        }
        Ok(DrawdownSpec { kind: DrawdownKind::Linear { k }, domain_min: DEFAULT_DOMAIN_MIN })
    }

    pub fn capped(cap: f64, k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) || !(cap > 0.0) || !cap.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "capped draw-down needs cap > 0 and 0 < K < 1, got cap={cap}, K={k}"
            )));
        }
        Ok(DrawdownSpec { kind: DrawdownKind::CappedLinear { cap, k }, domain_min: DEFAULT_DOMAIN_MIN })
    }

    /// Arbitrary `xi`, sample-validated on `[domain_min, domain_max]`.
    pub fn custom<F>(f: F, domain_min: f64, domain_max: f64, kinks: Vec<f64>, label: &str) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(domain_min.is_finite() && domain_max > domain_min) {
            return Err(Error::InvalidParameter("custom draw-down needs domain_min < domain_max".into()));
        }
        let mut monotone = true;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=VALIDATION_POINTS {
            let x = domain_min + (domain_max - domain_min) * i as f64 / VALIDATION_POINTS as f64;
            let xi = f(x);
            if !(xi < x) {
                return Err(Error::DomainViolation { x, xi });
            }
            monotone &= xi >= prev;
            prev = xi;
        }
        let mut kinks = kinks;
        kinks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(DrawdownSpec {
            kind: DrawdownKind::Custom { f: Arc::new(f), kinks, label: label.to_string(), monotone },
            domain_min,
        })
    }

    /// Piecewise-linear `xi` through `(xs[i], ys[i])`, flat beyond the table.
    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>, domain_min: f64) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("table needs >= 2 strictly increasing nodes".into()));
        }
        let hi = *xs.last().unwrap();
        let kinks = xs.clone();
        let label = format!("table[{}]", xs.len());
        let f = move |x: f64| {
            let i = xs.partition_point(|&t| t <= x);
            if i == 0 {
                ys[0]
            } else if i == xs.len() {
                ys[ys.len() - 1]
            } else {
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                ys[i - 1] + t * (ys[i] - ys[i - 1])
            }
        };
        Self::custom(f, domain_min, hi, kinks, &label)
    }

    pub fn with_domain_min(mut self, domain_min: f64) -> Result<Self> {
        if !(domain_min > 0.0) && !matches!(self.kind, DrawdownKind::Custom { .. }) {
            return Err(Error::InvalidParameter("linear families need domain_min > 0".into()));
        }
        self.domain_min = domain_min;
        Ok(self)
    }

    #[inline]
    pub fn xi_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            DrawdownKind::Linear { k } => k * x,
            DrawdownKind::CappedLinear { cap, k } => (k * x).min(*cap),
            DrawdownKind::Custom { f, .. } => f(x),
        }
    }

    #[inline]
    pub fn xi_bar_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            DrawdownKind::Linear { k } => (1.0 - k) * x,
            _ => x - self.xi_unchecked(x),
        }
    }

    pub fn xi(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.xi_unchecked(x))
    }

    pub fn xi_bar(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.xi_bar_unchecked(x))
    }

    fn check(&self, x: f64) -> Result<()> {
        let xi = self.xi_unchecked(x);
        if x < self.domain_min || !(xi < x) {
            return Err(Error::DomainViolation { x, xi });
        }
        Ok(())
    }

    /// Points in `(lo, hi)` where `xi` is not smooth.
    pub fn kinks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let all: Vec<f64> = match &self.kind {
            DrawdownKind::Linear { .. } => vec![],
            DrawdownKind::CappedLinear { cap, k } => vec![cap / k],
            DrawdownKind::Custom { kinks, .. } => kinks.clone(),
        };
        all.into_iter().filter(|&t| t > lo && t < hi).collect()
    }

    pub fn is_monotone(&self) -> bool {
        match &self.kind {
            DrawdownKind::Custom { monotone, .. } => *monotone,
            _ => true,
        }
    }

    /// `sup { y <= hi : xi(y) < u }` for nondecreasing `xi`, searching from `lo`.
    pub fn preimage_sup(&self, u: f64, lo: f64, hi: f64) -> f64 {
        match &self.kind {
            DrawdownKind::Linear { k } => (u / k).min(hi),
            DrawdownKind::CappedLinear { cap, k } => {
                if u > *cap {
                    hi
                } else {
                    (u / k).min(hi)
                }
            }
            DrawdownKind::Custom { f, .. } => {
                if f(hi) < u {
                    return hi;
                }
                if f(lo) >= u {
                    return lo;
                }
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if f(m) < u {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        }
    }
}

impl fmt::Display for DrawdownSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DrawdownKind::Linear { k } => write!(f, "linear:{k}"),
            DrawdownKind::CappedLinear { cap, k } => write!(f, "capped:{cap}:{k}"),
            DrawdownKind::Custom { label, .. } => write!(f, "custom:{label}"),
        }
    }
}

impl FromStr for DrawdownSpec {
    type Err = Error;

    /// `linear:K` or `capped:CAP:K`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| {
            t.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number '{t}' in xi spec")))
        };
        match parts.as_slice() {
            ["linear", k] => Self::linear(num(k)?),
            ["capped", cap, k] => Self::capped(num(cap)?, num(k)?),
            _ => Err(Error::InvalidParameter(format!(
                "xi spec must be linear:K or capped:CAP:K, got '{s}'"
            ))),
        }
    }
}
