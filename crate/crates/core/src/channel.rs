//! Erasure patterns: sliding-window admissibility, exhaustive enumeration of the
//! adversarial set, and seeded i.i.d. channels.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    SourceRelay,
    RelayDestination,
}

/// Binary loss sequence; `true` marks an erased slot. Slots past the end are not erased.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ErasurePattern {
    pub link: Link,
    bits: Vec<bool>,
}

impl ErasurePattern {
    pub fn new(link: Link, bits: Vec<bool>) -> Self {
        Self { link, bits }
    }

    pub fn clean(link: Link, horizon: usize) -> Self {
        Self { link, bits: vec![false; horizon] }
    }

    pub fn from_slots(link: Link, horizon: usize, erased: &[usize]) -> Self {
        let mut bits = vec![false; horizon];
        for &s in erased {
            bits[s] = true;
        }
        Self { link, bits }
    }

    /// Bit `s` of `mask` is slot `s`.
    pub fn from_mask(link: Link, horizon: usize, mask: u64) -> Self {
        Self { link, bits: (0..horizon).map(|s| mask >> s & 1 == 1).collect() }
    }

    pub fn horizon(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn is_erased(&self, slot: usize) -> bool {
        self.bits.get(slot).copied().unwrap_or(false)
    }

    /// Erasures in the inclusive slot range `[from, to]`.
    pub fn count(&self, from: usize, to: usize) -> usize {
        if from > to || from >= self.bits.len() {
            return 0;
        }
        self.bits[from..=to.min(self.bits.len() - 1)].iter().filter(|&&b| b).count()
    }

    pub fn total(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn erased_slots(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&s| self.bits[s]).collect()
    }

    pub fn is_admissible(&self, t: usize, n: usize) -> bool {
        is_admissible(&self.bits, t, n)
    }
}

impl fmt::Display for ErasurePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ErasurePattern {
    type Err = Error;

    /// Parses a 0/1 string; the link defaults to source-relay.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParams(format!("pattern character {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(Link::SourceRelay, bits))
    }
}

/// True iff every window of `T+1` consecutive slots holds at most `n` erasures.
pub fn is_admissible(bits: &[bool], t: usize, n: usize) -> bool {
    let w = t + 1;
    let mut run = 0;
    for (s, &b) in bits.iter().enumerate() {
        run += b as usize;
        if s >= w {
            run -= bits[s - w] as usize;
        }
        if run > n {
            return false;
        }
    }
    true
}

pub fn max_enumeration_horizon(t: usize) -> usize {
    (3 * (t + 1)).min(48)
}

/// Every admissible pattern on `horizon` slots as a bit mask (bit `s` = slot `s`),
/// in increasing numeric order.
pub fn enumerate_admissible_masks(t: usize, n: usize, horizon: usize) -> Result<Vec<u64>> {
    let limit = max_enumeration_horizon(t);
    if horizon > limit {
        return Err(Error::HorizonTooLarge { horizon, limit });
    }
    let w = t + 1;
    let window_mask = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
    // Extend one slot at a time from the top so the output comes out sorted.
    let mut out = Vec::new();
    fn rec(s: usize, horizon: usize, mask: u64, n: usize, w: usize, wm: u64, out: &mut Vec<u64>) {
        if s == horizon {
            out.push(mask);
            return;
        }
        rec(s + 1, horizon, mask, n, w, wm, out);
        let m = mask | 1 << s;
        let lo = (s + 1).saturating_sub(w);
        if ((m >> lo) & wm).count_ones() as usize <= n {
            rec(s + 1, horizon, m, n, w, wm, out);
        }
    }
    rec(0, horizon, 0, n, w, window_mask, &mut out);
    out.sort_unstable();
    Ok(out)
}

pub fn enumerate_admissible(t: usize, n: usize, horizon: usize, link: Link) -> Result<Vec<ErasurePattern>> {
    Ok(enumerate_admissible_masks(t, n, horizon)?.into_iter().map(|m| ErasurePattern::from_mask(link, horizon, m)).collect())
}

/// Parameters of the i.i.d. statistical channel: `alpha` on the first link, `beta`
/// on the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub horizon: usize,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Seeds a generator for sub-stream `index` of `seed`.
pub fn sub_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Both links from one seeded stream. Each slot draws one uniform per link and is
/// erased when it falls below the probability, so raising `alpha` or `beta` under a
/// fixed seed only ever adds erasures.
pub fn sample_iid(config: &ChannelConfig) -> (ErasurePattern, ErasurePattern) {
    sample_iid_with(&mut sub_rng(config.seed, 0), config.alpha, config.beta, config.horizon)
}

pub fn sample_iid_with<R: Rng>(rng: &mut R, alpha: f64, beta: f64, horizon: usize) -> (ErasurePattern, ErasurePattern) {
    let mut e1 = Vec::with_capacity(horizon);
    let mut e2 = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        e1.push(u1 < alpha);
        e2.push(u2 < beta);
    }
    (ErasurePattern::new(Link::SourceRelay, e1), ErasurePattern::new(Link::RelayDestination, e2))
}

/// Random admissible pattern: each slot is erased with probability `density` when the
/// window budget allows it.
pub fn sample_admissible<R: Rng>(rng: &mut R, t: usize, n: usize, horizon: usize, density: f64, link: Link) -> ErasurePattern {
    let w = t + 1;
    let mut bits = vec![false; horizon];
    let mut run = 0;
    for s in 0..horizon {
        if s >= w {
            run -= bits[s - w] as usize;
        }
        if run < n && rng.random::<f64>() < density {
            bits[s] = true;
            run += 1;
        }
    }
    ErasurePattern::new(link, bits)
}
