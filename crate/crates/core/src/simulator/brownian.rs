//! A standard Brownian path that can be queried at any time, generated by
//! midpoint refinement from hashed normals. The value at a given time does not
//! depend on which other times were queried, so runs with different step
//! sizes see the same path.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

const MAX_DEPTH: u32 = 16;

#[derive(Clone, Copy)]
struct Node {
    lo: f64,
    hi: f64,
    b_lo: f64,
    b_hi: f64,
    level: u32,
    idx: u64,
}

pub(crate) struct BrownianPath {
    key: u64,
    /// `B(n)` at the integers.
    spine: Vec<f64>,
    /// Dyadic intervals containing the last query, outermost first.
    stack: Vec<Node>,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl BrownianPath {
    pub fn new(seed: u64, path: u64) -> Self {
        let key = mix(mix(seed ^ 0x5851_f42d_4c95_7f2d).wrapping_add(path));
        BrownianPath { key, spine: vec![0.0], stack: Vec::with_capacity(MAX_DEPTH as usize + 2) }
    }

    fn normal(&self, unit: u64, level: u32, idx: u64) -> f64 {
        let h = mix(self.key ^ mix(unit.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ mix(((level as u64) << 58) ^ idx)));
        SmallRng::seed_from_u64(h).sample(StandardNormal)
    }

    fn spine_at(&mut self, n: usize) -> f64 {
        while self.spine.len() <= n {
            let k = self.spine.len() - 1;
            let z = self.normal(k as u64, 0, u64::MAX);
            self.spine.push(self.spine[k] + z);
        }
        self.spine[n]
    }

    /// `B(t)` for `t >= 0`.
    pub fn at(&mut self, t: f64) -> f64 {
        let n = t.floor();
        let unit = n as usize;
        if t == n {
            return self.spine_at(unit);
        }
        if self.stack.first().is_none_or(|r| r.lo != n) {
            self.stack.clear();
            let (b_lo, b_hi) = (self.spine_at(unit), self.spine_at(unit + 1));
            self.stack.push(Node { lo: n, hi: n + 1.0, b_lo, b_hi, level: 0, idx: 0 });
        }
        while self.stack.len() > 1 {
            let top = self.stack.last().unwrap();
            if top.lo <= t && t <= top.hi {
                break;
            }
            self.stack.pop();
        }
        loop {
            let nd = *self.stack.last().unwrap();
            if t == nd.lo {
                return nd.b_lo;
            }
            if t == nd.hi {
                return nd.b_hi;
            }
            let len = nd.hi - nd.lo;
            if nd.level == MAX_DEPTH {
                // below the finest level: a bridge draw keyed by the time itself
                let f = (t - nd.lo) / len;
                let sd = (len * f * (1.0 - f)).sqrt();
                return nd.b_lo + f * (nd.b_hi - nd.b_lo) + sd * self.normal(unit as u64, MAX_DEPTH + 1, t.to_bits());
            }
            let mid = nd.lo + 0.5 * len;
            let b_mid = 0.5 * (nd.b_lo + nd.b_hi) + (0.25 * len).sqrt() * self.normal(unit as u64, nd.level + 1, nd.idx);
            let child = if t < mid {
                Node { lo: nd.lo, hi: mid, b_lo: nd.b_lo, b_hi: b_mid, level: nd.level + 1, idx: 2 * nd.idx }
            } else {
                Node { lo: mid, hi: nd.hi, b_lo: b_mid, b_hi: nd.b_hi, level: nd.level + 1, idx: 2 * nd.idx + 1 }
            };
            self.stack.push(child);
        }
    }
}
