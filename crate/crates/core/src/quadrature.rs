//! Integration machinery: a segmented uniform grid carrying cumulative
//! Simpson integrals, and an adaptive Gauss–Kronrod rule for the leftovers.

use crate::error::{Error, Result};

/// Knobs of every numerical integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Grid nodes per unit length for cumulative integrals.
    pub panel: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Tail threshold when an upper limit is infinite.
    pub truncation_eps: f64,
    /// Hard cap on the truncation point.
    pub max_upper: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { panel: 256, rel_tol: 1e-7, abs_tol: 1e-10, truncation_eps: 1e-10, max_upper: 500.0 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panel < 16 {
            return Err(Error::InvalidParameter(format!("panel must be >= 16, got {}", self.panel)));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.truncation_eps > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerances must be > 0".into()));
        }
        if !(self.max_upper > 0.0) {
            return Err(Error::InvalidParameter("max_upper must be > 0".into()));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        QuadratureConfig { panel: self.panel * 2, ..*self }
    }
}

/// Uniform pieces glued at breakpoints; every piece has an even number of intervals.
#[derive(Debug, Clone, Default)]
pub struct Grid {
    pub nodes: Vec<f64>,
    /// Inclusive node ranges of the uniform pieces.
    pub pieces: Vec<(usize, usize)>,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, breaks: &[f64], panel: usize) -> Grid {
        let mut g = Grid { nodes: vec![lo], pieces: vec![] };
        g.extend(hi, breaks, panel);
        g
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() < 2
    }

    /// Append pieces up to `hi`, splitting at `breaks`. Returns the index of the
    /// first new node.
    pub fn extend(&mut self, hi: f64, breaks: &[f64], panel: usize) -> usize {
        let first_new = self.nodes.len();
        let mut a = self.end();
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < hi).collect();
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        cuts.push(hi);
        for b in cuts {
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let mut n = ((len * panel as f64).ceil() as usize).max(2);
            n += n % 2;
            let h = len / n as f64;
            let start = self.nodes.len() - 1;
            for i in 1..n {
                self.nodes.push(a + i as f64 * h);
            }
            self.nodes.push(b);
            self.pieces.push((start, start + n));
            a = b;
        }
        first_new
    }

    /// `I(node_k) = int_{lo}^{node_k} f`, by Simpson at even offsets and a
    /// three-point rule at odd ones.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        self.cumulative_from(f, &mut out, 0);
        out
    }

    /// Fill `out` for every piece starting at or after piece `first_piece`.
    pub fn cumulative_from(&self, f: &[f64], out: &mut [f64], first_piece: usize) {
        for &(s, e) in &self.pieces[first_piece..] {
            let h = (self.nodes[e] - self.nodes[s]) / (e - s) as f64;
            let mut k = s;
            while k < e {
                let (f0, f1, f2) = (f[k], f[k + 1], f[k + 2]);
                out[k + 1] = out[k] + h * (5.0 * f0 + 8.0 * f1 - f2) / 12.0;
                out[k + 2] = out[k] + h * (f0 + 4.0 * f1 + f2) / 3.0;
                k += 2;
            }
        }
    }

    /// Composite Simpson of `g` over pieces `[first_piece, ..)`.
    pub fn integral_from(&self, g: &[f64], first_piece: usize) -> f64 {
        let mut total = 0.0;
        for &(s, e) in &self.pieces[first_piece..] {
            let h = (self.nodes[e] - self.nodes[s]) / (e - s) as f64;
            let mut acc = g[s] + g[e];
            for (j, v) in g[s + 1..e].iter().enumerate() {
                acc += v * if j % 2 == 0 { 4.0 } else { 2.0 };
            }
            total += acc * h / 3.0;
        }
        total
    }

    pub fn integral(&self, g: &[f64]) -> f64 {
        self.integral_from(g, 0)
    }

    /// Cubic Hermite interpolation of a cumulative integral `cum` whose
    /// derivative at the nodes is `rate`.
    pub fn hermite(&self, cum: &[f64], rate: &[f64], y: f64) -> f64 {
        let n = self.nodes.len();
        if y <= self.nodes[0] {
            return cum[0];
        }
        if y >= self.nodes[n - 1] {
            return cum[n - 1];
        }
        let i = self.nodes.partition_point(|&t| t <= y) - 1;
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        if h <= 0.0 {
            return cum[i];
        }
        let t = (y - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * cum[i] + h10 * h * rate[i] + h01 * cum[i + 1] + h11 * h * rate[i + 1]
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel: (estimate, error estimate).
fn gk15(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Globally adaptive Gauss–Kronrod (7/15) on `[a, b]`.
pub fn adaptive(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_PANELS: usize = 2000;
    let (v, e) = gk15(&mut f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    loop {
        let (total, err): (f64, f64) = panels.iter().fold((0.0, 0.0), |s, p| (s.0 + p.2, s.1 + p.3));
        if !total.is_finite() {
            return Err(Error::QuadratureFailure("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailure(format!("error estimate {err:e} after {MAX_PANELS} panels")));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|p| p.0)
            .unwrap();
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (pa + pb);
        if m <= pa || m >= pb {
            return Ok(total);
        }
        let (v1, e1) = gk15(&mut f, pa, m)?;
        let (v2, e2) = gk15(&mut f, m, pb)?;
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
    }
}

/// [`adaptive`] over consecutive pieces split at `breaks`.
pub fn adaptive_pieces(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    cuts.push(b);
    let mut lo = a;
    let mut total = 0.0;
    for hi in cuts {
        total += adaptive(&mut f, lo, hi, abs_tol, rel_tol)?;
        lo = hi;
    }
    Ok(total)
}
