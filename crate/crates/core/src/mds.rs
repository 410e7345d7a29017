//! Systematic MDS codes built from a Vandermonde matrix.
//!
//! The generator is `V[:, 0..k]^-1 * V` where `V[r][i] = a_i^r` over the evaluation
//! points `a_i = i` (as field elements `0..n`). Any `k` columns of `V` are independent,
//! so the systematized generator is MDS. Construction depends only on `(q, n, k)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::gf::{GaloisField, Symbol};
use crate::linalg;

/// Decode matrices are cached per survivor set for codes up to this length.
const CACHE_MAX_LEN: usize = 24;

#[derive(Debug)]
pub struct MdsCode {
    field: Arc<GaloisField>,
    n: usize,
    k: usize,
    /// `k x n`, row-major, identity in the first `k` columns.
    generator: Vec<Symbol>,
    decode_cache: Mutex<HashMap<u64, Arc<Vec<Symbol>>>>,
}

impl Clone for MdsCode {
    fn clone(&self) -> Self {
        Self {
            field: Arc::clone(&self.field),
            n: self.n,
            k: self.k,
            generator: self.generator.clone(),
            decode_cache: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for MdsCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.k == other.k && self.field == other.field && self.generator == other.generator
    }
}

impl MdsCode {
    pub fn new(field: Arc<GaloisField>, n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidCodeDimensions { n, k });
        }
        if n > field.order() as usize {
            return Err(Error::LengthExceedsField { n, q: field.order() });
        }
        let f = &*field;
        let mut v = vec![0 as Symbol; k * n];
        for i in 0..n {
            let point = i as Symbol;
            for r in 0..k {
                v[r * n + i] = f.pow(point, r as u64);
            }
        }
        let head: Vec<Symbol> = (0..k).flat_map(|r| v[r * n..r * n + k].to_vec()).collect();
        let head_inv = linalg::invert(f, &head, k).expect("Vandermonde on distinct points is invertible");
        let generator = linalg::mat_mul(f, &head_inv, &v, k, k, n);
        Ok(Self { field, n, k, generator, decode_cache: Mutex::new(HashMap::new()) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn generator(&self) -> &[Symbol] {
        &self.generator
    }

    /// Generator entry for message position `row` and codeword position `col`.
    #[inline]
    pub fn coeff(&self, row: usize, col: usize) -> Symbol {
        self.generator[row * self.n + col]
    }

    /// Coefficient of message symbol `row` in parity number `m` (codeword position `k + m`).
    #[inline]
    pub fn parity_coeff(&self, row: usize, m: usize) -> Symbol {
        self.coeff(row, self.k + m)
    }

    pub fn encode(&self, message: &[Symbol]) -> Result<Vec<Symbol>> {
        if message.len() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: message.len() });
        }
        let f = &*self.field;
        Ok((0..self.n)
            .map(|col| (0..self.k).fold(0, |acc, r| f.mul_add(acc, message[r], self.coeff(r, col))))
            .collect())
    }

    /// Parity part only (positions `k..n`).
    pub fn parities(&self, message: &[Symbol]) -> Result<Vec<Symbol>> {
        Ok(self.encode(message)?.split_off(self.k))
    }

    /// Recovers the message from `(position, symbol)` survivors.
    ///
    /// Uses the first `k` distinct positions; any extra survivors are checked
    /// against the re-encoded codeword.
    pub fn decode(&self, received: &[(usize, Symbol)]) -> Result<Vec<Symbol>> {
        let mut seen = 0u128;
        let mut chosen: Vec<(usize, Symbol)> = Vec::with_capacity(self.k);
        let mut extra: Vec<(usize, Symbol)> = Vec::new();
        for &(pos, sym) in received {
            if pos >= self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: pos + 1 });
            }
            if pos < 128 {
                if seen & (1 << pos) != 0 {
                    extra.push((pos, sym));
                    continue;
                }
                seen |= 1 << pos;
            } else if chosen.iter().any(|&(p, _)| p == pos) {
                extra.push((pos, sym));
                continue;
            }
            if chosen.len() < self.k {
                chosen.push((pos, sym));
            } else {
                extra.push((pos, sym));
            }
        }
        if chosen.len() < self.k {
            return Err(Error::InsufficientSymbols { needed: self.k, got: chosen.len() });
        }
        chosen.sort_unstable_by_key(|&(p, _)| p);
        let positions: Vec<usize> = chosen.iter().map(|&(p, _)| p).collect();
        let values: Vec<Symbol> = chosen.iter().map(|&(_, s)| s).collect();
        let inv = self.decode_matrix(&positions);
        // message^T = values^T * inv, i.e. message[r] = sum_c values[c] * inv[c][r]
        let f = &*self.field;
        let message: Vec<Symbol> = (0..self.k)
            .map(|r| (0..self.k).fold(0, |acc, c| f.mul_add(acc, values[c], inv[c * self.k + r])))
            .collect();
        if !extra.is_empty() {
            let codeword = self.encode(&message)?;
            if extra.iter().any(|&(p, s)| codeword[p] != s) {
                return Err(Error::InconsistentSymbols);
            }
        }
        Ok(message)
    }

    /// Inverse of the generator restricted to `positions` (sorted, length k).
    fn decode_matrix(&self, positions: &[usize]) -> Arc<Vec<Symbol>> {
        let cacheable = self.n <= CACHE_MAX_LEN;
        let key = if cacheable { positions.iter().fold(0u64, |acc, &p| acc | (1 << p)) } else { 0 };
        if cacheable {
            if let Some(m) = self.decode_cache.lock().unwrap().get(&key) {
                return Arc::clone(m);
            }
        }
        let k = self.k;
        let sub: Vec<Symbol> =
            (0..k).flat_map(|r| positions.iter().map(move |&c| (r, c))).map(|(r, c)| self.coeff(r, c)).collect();
        let inv = Arc::new(linalg::invert(&self.field, &sub, k).expect("MDS generator: any k columns are independent"));
        if cacheable {
            self.decode_cache.lock().unwrap().insert(key, Arc::clone(&inv));
        }
        inv
    }

    /// Checks that every `k`-subset of generator columns is independent.
    /// Exponential in `n`; intended for `n <= 16`.
    pub fn verify_mds_property(&self) -> bool {
        let (n, k) = (self.n, self.k);
        let mut cols: Vec<usize> = (0..k).collect();
        loop {
            let sub: Vec<Symbol> =
                (0..k).flat_map(|r| cols.iter().map(move |&c| (r, c))).map(|(r, c)| self.coeff(r, c)).collect();
            if linalg::rank(&self.field, &sub, k, k) != k {
                return false;
            }
            let mut i = k;
            while i > 0 && cols[i - 1] == i - 1 + n - k {
                i -= 1;
            }
            if i == 0 {
                return true;
            }
            cols[i - 1] += 1;
            for j in i..k {
                cols[j] = cols[j - 1] + 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(q: u32, n: usize, k: usize) -> MdsCode {
        MdsCode::new(Arc::new(GaloisField::new(q).unwrap()), n, k).unwrap()
    }

    #[test]
    fn repetition_like_when_k_is_one() {
        let c = code(7, 3, 1);
        let cw = c.encode(&[5]).unwrap();
        assert_eq!(cw[0], 5);
        assert!(cw[1..].iter().all(|&p| p != 0));
        for pos in 0..3 {
            assert_eq!(c.decode(&[(pos, cw[pos])]).unwrap(), vec![5]);
        }
    }

    #[test]
    fn zero_message_zero_codeword() {
        let c = code(7, 4, 2);
        assert_eq!(c.encode(&[0, 0]).unwrap(), vec![0; 4]);
    }

    #[test]
    fn basis_vector_is_generator_row() {
        let c = code(7, 4, 2);
        assert_eq!(c.encode(&[1, 0]).unwrap(), c.generator()[0..4].to_vec());
    }

    #[test]
    fn length_exceeds_field() {
        let f = Arc::new(GaloisField::new(7).unwrap());
        assert!(matches!(MdsCode::new(f, 8, 2), Err(Error::LengthExceedsField { n: 8, q: 7 })));
    }

    #[test]
    fn gf7_4_2_corrects_any_two_erasures() {
        let c = code(7, 4, 2);
        assert!(c.verify_mds_property());
        for a in 0..7 {
            for b in 0..7 {
                let cw = c.encode(&[a, b]).unwrap();
                for i in 0..4 {
                    for j in i + 1..4 {
                        assert_eq!(c.decode(&[(i, cw[i]), (j, cw[j])]).unwrap(), vec![a, b]);
                    }
                }
            }
        }
    }

    #[test]
    fn gf5_round_trip_exhaustive() {
        // 25 messages x 6 position pairs
        let c = code(5, 4, 2);
        let mut checked = 0;
        for a in 0..5 {
            for b in 0..5 {
                let cw = c.encode(&[a, b]).unwrap();
                for i in 0..4 {
                    for j in i + 1..4 {
                        assert_eq!(c.decode(&[(j, cw[j]), (i, cw[i])]).unwrap(), vec![a, b]);
                        checked += 1;
                    }
                }
            }
        }
        assert_eq!(checked, 150);
    }

    #[test]
    fn insufficient_and_inconsistent() {
        let c = code(7, 4, 2);
        assert!(matches!(c.decode(&[(0, 1)]), Err(Error::InsufficientSymbols { needed: 2, got: 1 })));
        assert!(matches!(c.decode(&[(0, 1), (0, 1)]), Err(Error::InsufficientSymbols { .. })));
        let mut cw = c.encode(&[3, 4]).unwrap();
        assert_eq!(c.decode(&cw.iter().copied().enumerate().collect::<Vec<_>>()).unwrap(), vec![3, 4]);
        cw[3] = c.field().add(cw[3], 1);
        assert_eq!(c.decode(&cw.iter().copied().enumerate().collect::<Vec<_>>()), Err(Error::InconsistentSymbols));
    }

    #[test]
    fn deterministic_generators() {
        assert_eq!(code(16, 12, 5), code(16, 12, 5));
        assert_eq!(code(7, 6, 3).generator(), code(7, 6, 3).generator());
    }

    #[test]
    fn square_parity_submatrices_nonsingular() {
        // the relay's estimate extraction relies on this
        let c = code(8, 8, 4);
        let f = c.field();
        for rows in 1u32..16 {
            for cols in 1u32..16 {
                if rows.count_ones() != cols.count_ones() {
                    continue;
                }
                let r: Vec<usize> = (0..4).filter(|i| rows & (1 << i) != 0).collect();
                let cc: Vec<usize> = (0..4).filter(|i| cols & (1 << i) != 0).collect();
                let m: Vec<Symbol> =
                    r.iter().flat_map(|&a| cc.iter().map(move |&b| (a, b))).map(|(a, b)| c.parity_coeff(a, b)).collect();
                assert_eq!(linalg::rank(f, &m, r.len(), r.len()), r.len());
            }
        }
    }
}
