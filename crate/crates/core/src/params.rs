//! Scheme parameters and the closed-form calculators: rates, worst-case packet
//! lengths, field sizes, header overhead, packet sizes and the optimal threshold.
//!
//! Rates are exact rationals throughout.

use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::gf::{ceil_log2, next_prime_power};

pub type Rate = Ratio<u64>;

/// `(T, N1, N2, j)`: delay budget, per-window erasure budgets of the two links,
/// and the relay's adaptation threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    pub t: usize,
    pub n1: usize,
    pub n2: usize,
    pub j: usize,
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T={} N1={} N2={} j={}", self.t, self.n1, self.n2, self.j)
    }
}

/// Code dimensions derived from [`SchemeParams`]. Names follow the role of each
/// quantity: `k_src` message symbols, `n1` source packet symbols, the per-layer
/// source code `(n_prime, k_prime)` repeated `l_prime` times, the relay's adaptive
/// code `(n_dprime, k_dprime)` repeated `l_dprime` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedDims {
    pub k_src: usize,
    pub n1: usize,
    pub k_prime: usize,
    pub n_prime: usize,
    pub l_prime: usize,
    pub k_dprime: usize,
    pub n_dprime: usize,
    pub l_dprime: usize,
    /// Length of the fallback relay code used for grouped parities.
    pub n_fallback: usize,
    pub n2_star: usize,
    pub delta: usize,
}

fn check_link_budget(t: usize, n1: usize, n2: usize) -> Result<()> {
    if n1 + n2 > t {
        return Err(Error::InvalidParams(format!(
            "T+1-N1-N2 must be at least 1 (T={t}, N1={n1}, N2={n2})"
        )));
    }
    Ok(())
}

impl SchemeParams {
    pub fn new(t: usize, n1: usize, n2: usize, j: usize) -> Result<Self> {
        let p = Self { t, n1, n2, j };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_link_budget(self.t, self.n1, self.n2)?;
        if self.n1 == 0 {
            return Err(Error::InvalidParams("N1 must be at least 1".into()));
        }
        if self.j >= self.n1 {
            return Err(Error::InvalidParams(format!("j must satisfy 0 <= j <= N1-1 (j={}, N1={})", self.j, self.n1)));
        }
        Ok(())
    }

    pub fn dims(&self) -> DerivedDims {
        let Self { t, n1, n2, j } = *self;
        let k_prime = t + 1 - n1 - n2;
        let n_prime = t + 1 - n2;
        let l_prime = t + 1 - n2 - j;
        DerivedDims {
            k_src: k_prime * l_prime,
            n1: l_prime * n_prime,
            k_prime,
            n_prime,
            l_prime,
            k_dprime: l_prime,
            n_dprime: t + 1 - j,
            l_dprime: k_prime,
            n_fallback: t + 1 - n1,
            n2_star: worst_case_len(self),
            delta: header_len(t + 1, (t + 1 - j) as u64),
        }
    }

    pub fn rate_r1(&self) -> Rate {
        Rate::new((self.t + 1 - self.n1 - self.n2) as u64, (self.t + 1 - self.n2) as u64)
    }

    /// `k_src / (n2_star [+ delta])`.
    pub fn rate_r2(&self, include_header: bool) -> Rate {
        let d = self.dims();
        let denom = d.n2_star + if include_header { d.delta } else { 0 };
        Rate::new(d.k_src as u64, denom as u64)
    }

    /// `min(R1, R2)`.
    pub fn rate(&self, include_header: bool) -> Rate {
        self.rate_r1().min(self.rate_r2(include_header))
    }

    pub fn worst_case_n2(&self) -> usize {
        worst_case_len(self)
    }

    /// Header symbols needed to carry `T+1` pattern bits in a field of order `T+1-j`.
    pub fn header_overhead(&self) -> usize {
        header_len(self.t + 1, (self.t + 1 - self.j) as u64)
    }

    /// The field order the construction calls for: the longest of the three codes,
    /// `max(T+1-j, T+1-N2)`, which is `T+1-j` whenever `j <= N2`. May not be a prime power.
    pub fn nominal_field_size(&self) -> u32 {
        (self.t + 1 - self.j).max(self.t + 1 - self.n2) as u32
    }

    /// Smallest prime power not below the nominal size; what the codecs actually use.
    pub fn implemented_field_size(&self) -> u32 {
        next_prime_power(self.nominal_field_size())
    }

    pub fn packet_size_bits(&self, role: PacketRole) -> u64 {
        let bits = ceil_log2(self.nominal_field_size()) as u64;
        let d = self.dims();
        match role {
            PacketRole::Source => d.n1 as u64 * bits,
            PacketRole::Relay => d.n2_star as u64 * bits,
            PacketRole::NonadaptiveBaseline => nonadaptive_packet_bits(self.t, self.n1),
        }
    }
}

fn worst_case_len(p: &SchemeParams) -> usize {
    let SchemeParams { t, n1, n2, j } = *p;
    (t + 1 - n2 - n1) * (t + 1 - n1) + (t + 1 - n2 - j) * (n1 - j)
}

/// Smallest `d` with `q^d >= 2^bits`, i.e. `ceil(bits * log_q 2)`, computed exactly.
pub fn header_len(bits: usize, q: u64) -> usize {
    assert!(q >= 2);
    let target = 1u128 << bits;
    let mut d = 0;
    let mut cap = 1u128;
    while cap < target {
        cap = cap.saturating_mul(q as u128);
        d += 1;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketRole {
    Source,
    Relay,
    NonadaptiveBaseline,
}

/// First-link rate `(T+1-N1-N2)/(T+1-N2)`; unlike [`SchemeParams`] this accepts `N1 = 0`.
pub fn rate_r1(t: usize, n1: usize, n2: usize) -> Result<Rate> {
    check_link_budget(t, n1, n2)?;
    Ok(Rate::new((t + 1 - n1 - n2) as u64, (t + 1 - n2) as u64))
}

/// Rate of the time-invariant (nonadaptive) scheme:
/// `min((T+1-N1-N2)/(T+1-N2), (T+1-N1-N2)/(T+1-N1))`.
pub fn nonadaptive_rate(t: usize, n1: usize, n2: usize) -> Result<Rate> {
    check_link_budget(t, n1, n2)?;
    let k = (t + 1 - n1 - n2) as u64;
    Ok(Rate::new(k, (t + 1 - n2) as u64).min(Rate::new(k, (t + 1 - n1) as u64)))
}

/// Baseline packet: one short code of length `T+1-N1` over a field of at least that size.
pub fn nonadaptive_packet_bits(t: usize, n1: usize) -> u64 {
    let n = (t + 1 - n1) as u64;
    n * ceil_log2(n as u32).max(1) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalJ {
    pub j: usize,
    pub rate: Rate,
}

/// Grid search over `j in [0, N1-1]` maximizing `min(R1, R2(j))` (header excluded).
/// Ties go to the larger `j`, i.e. the smaller field.
pub fn optimal_j(t: usize, n1: usize, n2: usize) -> Result<OptimalJ> {
    SchemeParams::new(t, n1, n2, 0)?;
    let mut best: Option<OptimalJ> = None;
    for j in 0..n1 {
        let rate = SchemeParams { t, n1, n2, j }.rate(false);
        if best.is_none_or(|b| rate >= b.rate) {
            best = Some(OptimalJ { j, rate });
        }
    }
    Ok(best.expect("N1 >= 1 gives at least one candidate"))
}

/// Published figures for the fully adaptive scheme of prior work. Stored for
/// comparison tables only; never computed here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullyAdaptiveReference {
    pub t: usize,
    pub n1: usize,
    pub n2: usize,
    pub rate: Option<f64>,
    pub field_size: Option<u64>,
    /// Packet length in symbols.
    pub packet_symbols: Option<u64>,
}

impl FullyAdaptiveReference {
    /// `ceil(log2 q)` with `q >= packet_symbols` when only the length is known.
    pub fn packet_bits(&self) -> Option<u64> {
        let n = self.packet_symbols?;
        let q = self.field_size.unwrap_or(n);
        Some(n * ceil_log2(q as u32) as u64)
    }
}

pub const FULLY_ADAPTIVE_REFERENCES: &[FullyAdaptiveReference] = &[
    FullyAdaptiveReference { t: 5, n1: 2, n2: 3, rate: Some(0.33), field_size: Some(18), packet_symbols: None },
    FullyAdaptiveReference { t: 6, n1: 2, n2: 3, rate: Some(0.48), field_size: Some(96), packet_symbols: None },
    FullyAdaptiveReference { t: 15, n1: 4, n2: 6, rate: None, field_size: None, packet_symbols: Some(52788) },
];

pub fn fully_adaptive_reference(t: usize, n1: usize, n2: usize) -> Option<&'static FullyAdaptiveReference> {
    FULLY_ADAPTIVE_REFERENCES.iter().find(|r| r.t == t && r.n1 == n1 && r.n2 == n2)
}

/// Rounds a rate to two decimals for comparison with published values.
pub fn two_decimals(r: Rate) -> f64 {
    let v = *r.numer() as f64 / *r.denom() as f64;
    (v * 100.0).round() / 100.0
}

pub fn rate_f64(r: Rate) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
