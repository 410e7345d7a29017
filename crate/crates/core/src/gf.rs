//! Arithmetic over small finite fields GF(p^m), 2 <= q <= 2^16.
//!
//! Elements are represented as integers in `0..q`. For prime-power orders
//! the integer is the base-p digit encoding of the polynomial coefficients
//! (least significant digit = constant term). Multiplication goes through
//! log/antilog tables built from a primitive polynomial found by a
//! deterministic search, so two fields built with the same `q` are identical.

use std::fmt;

use crate::error::Error;

/// A field element. Always `< q` for the field it belongs to.
pub type Symbol = u16;

pub const MAX_FIELD_ORDER: u32 = 1 << 16;

/// Factors `q` as `p^m`. Returns `None` when `q` has two distinct prime factors.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        // q itself is prime
        return Some((q, 1));
    }
    let mut rest = q;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

pub fn is_prime_power(q: u32) -> bool {
    prime_power(q).is_some()
}

/// Smallest prime power that is `>= n` (and at least 2).
pub fn next_prime_power(n: u32) -> u32 {
    let mut q = n.max(2);
    while !is_prime_power(q) {
        q += 1;
    }
    q
}

#[derive(Clone)]
pub struct GaloisField {
    q: u32,
    p: u32,
    m: u32,
    /// exp[i] = g^i for i in 0..2(q-1), doubled so products of logs need no reduction.
    exp: Vec<Symbol>,
    /// log[x] for x != 0; log[0] is unused.
    log: Vec<u32>,
    /// Coefficients of the modulus below the leading term (length m), empty for prime fields.
    modulus: Vec<u32>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField")
            .field("q", &self.q)
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus
    }
}

impl Eq for GaloisField {}

impl GaloisField {
    /// Builds GF(q). Fails when `q` is not a prime power in `[2, 2^16]`.
    pub fn new(q: u32) -> Result<Self, Error> {
        if !(2..=MAX_FIELD_ORDER).contains(&q) {
            return Err(Error::FieldOrderOutOfRange(q));
        }
        let (p, m) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        if m == 1 {
            let g = (1..p).find(|&g| multiplicative_order_mod(g, p) == p - 1).unwrap_or(1);
            let (exp, log) = build_tables(q, |x| ((x as u64 * g as u64) % p as u64) as u32);
            return Ok(Self { q, p, m, exp, log, modulus: Vec::new() });
        }
        // Search monic degree-m polynomials in increasing digit order until x generates
        // the full multiplicative group; such a polynomial is primitive.
        for tail in 0..q {
            let modulus = digits(tail, p, m);
            if modulus[0] == 0 {
                continue;
            }
            if let Some((exp, log)) = try_primitive(q, p, m, &modulus) {
                return Ok(Self { q, p, m, exp, log, modulus });
            }
        }
        unreachable!("every finite field has a primitive polynomial")
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Bits needed to store one symbol.
    pub fn symbol_bits(&self) -> u32 {
        ceil_log2(self.q)
    }

    pub fn contains(&self, x: Symbol) -> bool {
        (x as u32) < self.q
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        if self.p == 2 {
            a ^ b
        } else if self.m == 1 {
            ((a as u32 + b as u32) % self.p) as Symbol
        } else {
            self.digitwise(a, b, |x, y| (x + y) % self.p)
        }
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        if self.p == 2 {
            a ^ b
        } else if self.m == 1 {
            ((a as u32 + self.p - b as u32) % self.p) as Symbol
        } else {
            self.digitwise(a, b, |x, y| (x + self.p - y) % self.p)
        }
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv(&self, a: Symbol) -> Symbol {
        assert!(a != 0, "zero has no multiplicative inverse");
        let l = self.log[a as usize];
        self.exp[((self.q - 1 - l) % (self.q - 1)) as usize]
    }

    #[inline]
    pub fn div(&self, a: Symbol, b: Symbol) -> Symbol {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Symbol, e: u64) -> Symbol {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * e) % (self.q as u64 - 1);
        self.exp[l as usize]
    }

    /// `acc + a * b`.
    #[inline]
    pub fn mul_add(&self, acc: Symbol, a: Symbol, b: Symbol) -> Symbol {
        self.add(acc, self.mul(a, b))
    }

    pub fn dot(&self, a: &[Symbol], b: &[Symbol]) -> Symbol {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.mul_add(acc, x, y))
    }

    /// Exhaustively checks the field axioms over every pair/triple of elements.
    /// Cubic in `q`; meant for small fields in verification runs.
    pub fn verify_axioms(&self) -> Result<(), String> {
        let q = self.q as Symbol;
        for a in 0..q {
            if self.add(a, 0) != a || self.mul(a, 1) != a || self.add(a, self.neg(a)) != 0 {
                return Err(format!("identity/negation fails at {a}"));
            }
            if a != 0 && self.mul(a, self.inv(a)) != 1 {
                return Err(format!("inverse fails at {a}"));
            }
            for b in 0..q {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return Err(format!("commutativity fails at ({a}, {b})"));
                }
                if self.sub(self.add(a, b), b) != a {
                    return Err(format!("subtraction fails at ({a}, {b})"));
                }
                for c in 0..q {
                    let ab = self.add(a, b);
                    if self.add(ab, c) != self.add(a, self.add(b, c))
                        || self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c))
                        || self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c))
                    {
                        return Err(format!("associativity/distributivity fails at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        Ok(())
    }

    fn digitwise(&self, a: Symbol, b: Symbol, op: impl Fn(u32, u32) -> u32) -> Symbol {
        let (mut a, mut b) = (a as u32, b as u32);
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.m {
            out += op(a % self.p, b % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out as Symbol
    }
}

pub(crate) fn ceil_log2(n: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros()
    }
}

fn multiplicative_order_mod(g: u32, p: u32) -> u32 {
    let mut x = g % p;
    let mut k = 1;
    while x != 1 {
        x = (x as u64 * g as u64 % p as u64) as u32;
        k += 1;
        if k > p {
            return 0;
        }
    }
    k
}

fn digits(mut x: u32, p: u32, m: u32) -> Vec<u32> {
    (0..m)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

/// Walks powers of the generator via `next`; returns tables if the cycle has length q-1.
fn build_tables(q: u32, next: impl Fn(u32) -> u32) -> (Vec<Symbol>, Vec<u32>) {
    let n = (q - 1) as usize;
    let mut exp = vec![0 as Symbol; 2 * n];
    let mut log = vec![0u32; q as usize];
    let mut x = 1u32;
    for i in 0..n {
        exp[i] = x as Symbol;
        log[x as usize] = i as u32;
        x = next(x);
    }
    for i in n..2 * n {
        exp[i] = exp[i - n];
    }
    (exp, log)
}

fn try_primitive(q: u32, p: u32, m: u32, modulus: &[u32]) -> Option<(Vec<Symbol>, Vec<u32>)> {
    // multiply-by-x on the digit encoding, reducing x^m = -sum(modulus_i x^i)
    let times_x = |x: u32| -> u32 {
        let mut d = digits(x, p, m);
        let top = d[m as usize - 1];
        for i in (1..m as usize).rev() {
            d[i] = d[i - 1];
        }
        d[0] = 0;
        for i in 0..m as usize {
            d[i] = (d[i] + p - (top * modulus[i]) % p) % p;
        }
        d.iter().rev().fold(0, |acc, &v| acc * p + v)
    };
    let n = q - 1;
    let mut x = 1u32;
    for k in 1..=n {
        x = times_x(x);
        if x == 1 {
            return (k == n).then(|| build_tables(q, times_x));
        }
        if x == 0 {
            return None;
        }
    }
    None
}
