//! Monte Carlo estimate of extinction probabilities by direct simulation of
//! the branching process, independent of every solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QveError, Result};
use crate::instances::Prng;
use crate::problem::QveProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    /// A trial whose live population exceeds this counts as surviving.
    pub max_population: usize,
    pub seed: u64,
    pub start_state: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: 100_000,
            max_population: 10_000,
            seed: 0,
            start_state: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Fraction of extinct trials.
    pub estimate: f64,
    /// `√(p̂(1 − p̂)/trials)`.
    pub stderr: f64,
    pub extinct: u64,
    pub trials: u64,
}

/// Per-state cumulative distribution over the outcomes "die" followed by the
/// `N²` splits `(j, k)` in lexicographic order, with a guide table so that
/// inverting it takes expected constant time.
struct OffspringLaw {
    n: usize,
    /// Cumulative masses, `stride = N² + 2` per state, each row closed by `+∞`.
    cdf: Vec<f64>,
    stride: usize,
    /// `guide[i·2^bits + g]` is the first outcome whose cumulative mass
    /// exceeds `g / 2^bits` of the row total, a safe starting point for the
    /// search. It is indexed by the top bits of the raw generator output.
    guide: Vec<u32>,
    bits: u32,
    /// Slots credited by each outcome; death credits the scratch slot `n` twice.
    children: Vec<(usize, usize)>,
}

const GUIDE_MIN_BITS: u32 = 10;

impl OffspringLaw {
    fn new(p: &QveProblem) -> Self {
        let n = p.n();
        let stride = n * n + 2;
        let mut cdf = Vec::with_capacity(n * stride);
        for i in 0..n {
            let mut acc = p.a()[i];
            cdf.push(acc);
            for &bijk in &p.b().coeffs()[i * n * n..(i + 1) * n * n] {
                acc += bijk;
                cdf.push(acc);
            }
            cdf.push(f64::INFINITY);
        }
        let bits = Self::resolution_bits(n);
        let slots = 1usize << bits;
        let mut guide = Vec::with_capacity(n * slots);
        for row in cdf.chunks(stride) {
            let total = row[stride - 2];
            guide.extend((0..slots).map(|g| {
                let level = (g as f64 / slots as f64) * total;
                row.partition_point(|&c| c <= level) as u32
            }));
        }
        let children = std::iter::once((n, n))
            .chain((0..n * n).map(|m| (m / n, m % n)))
            .collect();
        OffspringLaw {
            n,
            cdf,
            stride,
            guide,
            bits,
            children,
        }
    }

    /// About four guide slots per outcome, never fewer than `2^10`.
    fn resolution_bits(n: usize) -> u32 {
        (4 * (1 + n * n)).next_power_of_two().trailing_zeros().max(GUIDE_MIN_BITS)
    }

    /// Index of the outcome selected by the raw draw `z`, read as the uniform
    /// `u = ⌊z / 2¹¹⌋ / 2⁵³`; 0 is death.
    #[inline]
    fn outcome(&self, state: usize, z: u64) -> usize {
        let row = &self.cdf[state * self.stride..(state + 1) * self.stride];
        let outcomes = self.stride - 1;
        let u = unit_from_bits(z);
        // The total mass is 1 up to rounding; scale the draw so that the
        // last positive outcome absorbs the difference.
        let target = u * row[outcomes - 1];
        // The top bits of z are ⌊u · 2^bits⌋ exactly.
        let g = (state << self.bits) | (z >> (64 - self.bits)) as usize;
        let mut idx = self.guide[g] as usize;
        while row[idx] <= target {
            idx += 1;
        }
        if idx == outcomes {
            idx -= 1;
            while idx > 0 && row[idx] == row[idx - 1] {
                idx -= 1;
            }
        }
        idx
    }

    #[cfg(test)]
    fn sample(&self, state: usize, z: u64) -> Option<(usize, usize)> {
        match self.outcome(state, z) {
            0 => None,
            o => Some(self.children[o]),
        }
    }
}

/// Same mapping as [`Prng::next_unit`].
#[inline]
fn unit_from_bits(z: u64) -> f64 {
    ((z >> 11) as i64) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seed of trial `t`: `base + t` passed through one SplitMix64 step.
pub fn trial_seed(base: u64, t: u64) -> u64 {
    Prng::new(base.wrapping_add(t)).next_u64()
}

/// One population, kept as per-state counts and advanced a generation at a
/// time, individuals drawing in increasing state order. The live population
/// (undrawn parents plus children born so far) is tracked after every draw,
/// so a trial stops as soon as it exceeds `max_population`.
fn trial_is_extinct(law: &OffspringLaw, start: usize, max_population: usize, seed: u64) -> bool {
    let mut rng = Prng::new(seed);
    let n = law.n;
    // Slot n absorbs the two phantom children of a death.
    let mut current = vec![0usize; n + 1];
    let mut next = vec![0usize; n + 1];
    current[start] = 1;
    let mut live = 1usize;
    while live > 0 {
        if live > max_population {
            return false;
        }
        next.iter_mut().for_each(|c| *c = 0);
        for (state, &count) in current[..n].iter().enumerate() {
            for _ in 0..count {
                let o = law.outcome(state, rng.next_u64());
                let (j, k) = law.children[o];
                next[j] += 1;
                next[k] += 1;
                // One parent replaced by zero or two children.
                live = live - 1 + 2 * usize::from(o != 0);
                if live > max_population {
                    return false;
                }
            }
        }
        std::mem::swap(&mut current, &mut next);
    }
    true
}

/// Fraction of simulated populations started from one individual in
/// `cfg.start_state` that die out. Truncation at `max_population` can only
/// turn extinct trials into surviving ones, so the estimate is biased low.
pub fn estimate_extinction(p: &QveProblem, cfg: &McConfig) -> Result<McEstimate> {
    if cfg.trials == 0 || cfg.max_population == 0 {
        return Err(QveError::InvalidInput(
            "trials and max_population must be at least 1".into(),
        ));
    }
    if cfg.start_state >= p.n() {
        return Err(QveError::InvalidInput(format!(
            "start state {} out of range for n = {}",
            cfg.start_state,
            p.n()
        )));
    }
    let law = OffspringLaw::new(p);
    let extinct = (0..cfg.trials)
        .into_par_iter()
        .filter(|&t| {
            trial_is_extinct(&law, cfg.start_state, cfg.max_population, trial_seed(cfg.seed, t))
        })
        .count() as u64;
    let est = extinct as f64 / cfg.trials as f64;
    Ok(McEstimate {
        estimate: est,
        stderr: (est * (1.0 - est) / cfg.trials as f64).sqrt(),
        extinct,
        trials: cfg.trials,
    })
}
