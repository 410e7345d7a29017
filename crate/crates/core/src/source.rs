//! Source encoder (diagonally interleaved systematic MDS code) and the relay-side
//! receiver that turns arriving source packets into symbol estimates.
//!
//! Layer `c`, position `u` of a message is flat index `c*k' + u`. The codeword of
//! diagonal `d` in layer `c` places position `u` at time `d+u` and parity `m` at time
//! `d+k'+m`, so a packet at time `τ` carries parity `m` of diagonal `τ-k'-m`.

use std::sync::Arc;

use crate::channel::ErasurePattern;
use crate::error::{Error, Result};
use crate::gf::{GaloisField, Symbol};
use crate::linalg;
use crate::mds::MdsCode;
use crate::params::{DerivedDims, SchemeParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourcePacket {
    pub time: usize,
    /// `l'` blocks of `n'` symbols: `k'` systematic then `N1` parities.
    pub symbols: Vec<Symbol>,
}

impl SourcePacket {
    pub fn systematic(&self, dims: &DerivedDims, layer: usize, pos: usize) -> Symbol {
        self.symbols[layer * dims.n_prime + pos]
    }

    pub fn parity(&self, dims: &DerivedDims, layer: usize, m: usize) -> Symbol {
        self.symbols[layer * dims.n_prime + dims.k_prime + m]
    }
}

/// Builds the per-layer `(n', k')` code shared by the source and relay.
pub fn source_code(params: &SchemeParams, field: &Arc<GaloisField>) -> Result<MdsCode> {
    let d = params.dims();
    MdsCode::new(Arc::clone(field), d.n_prime, d.k_prime)
}

pub fn implemented_field(params: &SchemeParams) -> Result<Arc<GaloisField>> {
    Ok(Arc::new(GaloisField::new(params.implemented_field_size())?))
}

#[derive(Debug, Clone)]
pub struct SourceEncoder {
    dims: DerivedDims,
    code: Arc<MdsCode>,
    history: Vec<Vec<Symbol>>,
}

impl SourceEncoder {
    pub fn new(params: &SchemeParams) -> Result<Self> {
        params.validate()?;
        let field = implemented_field(params)?;
        Ok(Self::with_code(params, Arc::new(source_code(params, &field)?)))
    }

    pub fn with_code(params: &SchemeParams, code: Arc<MdsCode>) -> Self {
        Self { dims: params.dims(), code, history: Vec::new() }
    }

    pub fn next_time(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[Vec<Symbol>] {
        &self.history
    }

    /// Appends `message` as `s_t` for the next time `t` and returns `x_t`.
    pub fn encode(&mut self, message: Vec<Symbol>) -> Result<SourcePacket> {
        if message.len() != self.dims.k_src {
            return Err(Error::DimensionMismatch { expected: self.dims.k_src, got: message.len() });
        }
        self.history.push(message);
        let time = self.history.len() - 1;
        Ok(SourcePacket { time, symbols: encode_packet(&self.dims, &self.code, &self.history, time) })
    }
}

/// Packet at `time` from messages `history[0..=time]`; negative times are zero.
pub fn encode_packet(dims: &DerivedDims, code: &MdsCode, history: &[Vec<Symbol>], time: usize) -> Vec<Symbol> {
    let f = code.field();
    let (kp, np) = (dims.k_prime, dims.n_prime);
    let mut out = Vec::with_capacity(dims.n1);
    for c in 0..dims.l_prime {
        out.extend_from_slice(&history[time][c * kp..(c + 1) * kp]);
        for m in 0..np - kp {
            let d = time as isize - kp as isize - m as isize;
            let mut acc = 0;
            for u in 0..kp {
                let at = d + u as isize;
                if at >= 0 {
                    acc = f.mul_add(acc, history[at as usize][c * kp + u], code.parity_coeff(u, m));
                }
            }
            out.push(acc);
        }
    }
    out
}

/// `coeff * s_time[index]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub time: usize,
    pub index: usize,
    pub coeff: Symbol,
}

/// An estimate of `s_time[index]`: its value equals that symbol plus the listed
/// interference from messages the relay could not cancel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimate {
    pub time: usize,
    pub index: usize,
    /// Slot at which the relay formed it.
    pub created: usize,
    pub interference: Vec<Term>,
    /// Absent when the receiver runs without values.
    pub value: Option<Symbol>,
}

impl Estimate {
    /// Value predicted from ground-truth messages; used to check soundness.
    pub fn evaluate(&self, field: &GaloisField, messages: &[Vec<Symbol>]) -> Symbol {
        self.interference
            .iter()
            .fold(messages[self.time][self.index], |acc, tm| field.mul_add(acc, tm.coeff, messages[tm.time][tm.index]))
    }
}

/// Per erased message, the estimates formed so far in formation order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EstimateLedger {
    entries: Vec<Vec<Estimate>>,
}

impl EstimateLedger {
    pub fn get(&self, t: usize) -> &[Estimate] {
        self.entries.get(t).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, t: usize) -> usize {
        self.get(t).len()
    }

    fn ensure(&mut self, t: usize) {
        if self.entries.len() <= t {
            self.entries.resize_with(t + 1, Vec::new);
        }
    }
}

/// `min(k, l' * #nonerased in [t+1, now])` for an erased `x_t`, `k` otherwise.
pub fn estimates_available(params: &SchemeParams, e1: &ErasurePattern, t: usize, now: usize) -> usize {
    let d = params.dims();
    if now < t {
        return 0;
    }
    if !e1.is_erased(t) {
        return d.k_src;
    }
    let nonerased = (now - t) - e1.count(t + 1, now);
    d.k_src.min(d.l_prime * nonerased)
}

#[derive(Debug, Clone)]
struct Received {
    erased: bool,
    symbols: Option<Vec<Symbol>>,
}

/// Relay-side view of the first link. Runs with or without symbol values; the
/// structure it builds (which estimates exist and their interference terms) depends
/// only on the erasure pattern, so the destination can rebuild it from side
/// information.
#[derive(Debug, Clone)]
pub struct RelayReceiver {
    params: SchemeParams,
    dims: DerivedDims,
    code: Arc<MdsCode>,
    with_values: bool,
    received: Vec<Received>,
    /// Fully determined at the relay, by reception or recovery.
    known: Vec<bool>,
    values: Vec<Option<Vec<Symbol>>>,
    estimated: Vec<Vec<bool>>,
    ledger: EstimateLedger,
    pending: Vec<usize>,
}

impl RelayReceiver {
    pub fn new(params: &SchemeParams, code: Arc<MdsCode>, with_values: bool) -> Self {
        Self {
            params: *params,
            dims: params.dims(),
            code,
            with_values,
            received: Vec::new(),
            known: Vec::new(),
            values: Vec::new(),
            estimated: Vec::new(),
            ledger: EstimateLedger::default(),
            pending: Vec::new(),
        }
    }

    pub fn now(&self) -> usize {
        self.received.len()
    }

    pub fn ledger(&self) -> &EstimateLedger {
        &self.ledger
    }

    pub fn is_erased(&self, t: usize) -> bool {
        self.received[t].erased
    }

    pub fn is_known(&self, t: usize) -> bool {
        self.known.get(t).copied().unwrap_or(false)
    }

    pub fn message(&self, t: usize) -> Option<&[Symbol]> {
        self.values.get(t).and_then(|v| v.as_deref())
    }

    /// Ingests slot `time`. `packet` is ignored when `erased` and may be `None` for an
    /// arrival when the receiver runs without values.
    pub fn ingest(&mut self, time: usize, erased: bool, packet: Option<&SourcePacket>) -> Result<()> {
        if time != self.now() {
            return Err(Error::OutOfOrder { expected: self.now(), got: time });
        }
        let symbols = match packet {
            Some(p) if self.with_values && !erased => {
                if p.symbols.len() != self.dims.n1 {
                    return Err(Error::DimensionMismatch { expected: self.dims.n1, got: p.symbols.len() });
                }
                Some(p.symbols.clone())
            }
            _ if self.with_values && !erased => return Err(Error::DimensionMismatch { expected: self.dims.n1, got: 0 }),
            _ => None,
        };
        self.received.push(Received { erased, symbols });
        self.known.push(!erased);
        self.estimated.push(if erased { vec![false; self.dims.k_prime] } else { Vec::new() });
        self.ledger.ensure(time);
        if erased {
            self.values.push(None);
            self.pending.push(time);
            return Ok(());
        }
        let msg = self.received[time].symbols.as_ref().map(|s| {
            (0..self.dims.l_prime)
                .flat_map(|c| s[c * self.dims.n_prime..c * self.dims.n_prime + self.dims.k_prime].iter().copied())
                .collect::<Vec<_>>()
        });
        self.values.push(msg);

        let window = self.params.t - self.params.n2;
        let first = time.saturating_sub(window);
        for t in first..time {
            if self.received[t].erased && !self.known[t] {
                self.form_estimates(t, time);
            }
        }
        self.resolve();
        Ok(())
    }

    fn form_estimates(&mut self, t: usize, now: usize) {
        let kp = self.dims.k_prime;
        for u0 in (0..kp).rev() {
            if self.estimated[t][u0] {
                continue;
            }
            if let Some(batch) = self.extract(t, u0, now) {
                self.estimated[t][u0] = true;
                self.ledger.entries[t].extend(batch);
            }
        }
    }

    /// Forms one estimate per layer of `s_t` at position `u0` from the parities of
    /// diagonal `t-u0` received by `now`, if enough of them arrived.
    fn extract(&self, t: usize, u0: usize, now: usize) -> Option<Vec<Estimate>> {
        let dims = &self.dims;
        let (kp, n1) = (dims.k_prime, self.params.n1);
        let d = t as isize - u0 as isize;
        let at = |u: usize| d + u as isize;
        let known_at = |time: isize| time < 0 || self.is_known(time as usize);
        let later: Vec<usize> = (u0 + 1..kp).filter(|&u| !known_at(at(u))).collect();
        let parities: Vec<usize> = (0..n1)
            .filter(|&m| {
                let time = d + (kp + m) as isize;
                time >= 0 && time as usize <= now && !self.received[time as usize].erased
            })
            .take(later.len() + 1)
            .collect();
        if parities.len() < later.len() + 1 {
            return None;
        }
        let f = self.code.field();
        let rows: Vec<usize> = std::iter::once(u0).chain(later.iter().copied()).collect();
        let e = rows.len();
        let a: Vec<Symbol> =
            rows.iter().flat_map(|&u| parities.iter().map(move |&m| (u, m))).map(|(u, m)| self.code.parity_coeff(u, m)).collect();
        let mut rhs = vec![0; e];
        rhs[0] = 1;
        let lambda = linalg::solve(f, &a, e, &rhs).expect("square parity submatrix of an MDS code is nonsingular");
        let coeff = |u: usize| parities.iter().zip(&lambda).fold(0, |acc, (&m, &l)| f.mul_add(acc, l, self.code.parity_coeff(u, m)));

        let mut batch = Vec::with_capacity(dims.l_prime);
        for c in 0..dims.l_prime {
            let mut interference = Vec::new();
            let mut value = if self.with_values {
                Some(parities.iter().zip(&lambda).fold(0, |acc, (&m, &l)| {
                    let time = (d + (kp + m) as isize) as usize;
                    let sym = self.received[time].symbols.as_ref().expect("value mode keeps symbols")[c * dims.n_prime + kp + m];
                    f.mul_add(acc, l, sym)
                }))
            } else {
                None
            };
            for u in (0..kp).filter(|&u| u != u0 && !later.contains(&u)) {
                let time = at(u);
                if time < 0 {
                    continue;
                }
                let time = time as usize;
                let cu = coeff(u);
                if cu == 0 {
                    continue;
                }
                let index = c * kp + u;
                if self.known[time] {
                    if let Some(v) = value.as_mut() {
                        let s = self.values[time].as_ref().expect("known message has values")[index];
                        *v = f.sub(*v, f.mul(cu, s));
                    }
                } else {
                    interference.push(Term { time, index, coeff: cu });
                }
            }
            batch.push(Estimate { time: t, index: c * kp + u0, created: now, interference, value });
        }
        Some(batch)
    }

    /// Marks erased messages whose estimates are complete and interference-free
    /// after cancelling everything now known, oldest first.
    fn resolve(&mut self) {
        let kp = self.dims.k_prime;
        let horizon = 2 * (self.params.t + 1);
        let now = self.now();
        self.pending.retain(|&t| t + horizon >= now);
        let mut i = 0;
        while i < self.pending.len() {
            let t = self.pending[i];
            let ready = self.estimated[t].iter().all(|&b| b)
                && self.ledger.entries[t].iter().all(|e| e.interference.iter().all(|tm| self.known[tm.time]));
            if !ready {
                i += 1;
                continue;
            }
            if self.with_values {
                let f = self.code.field();
                let mut msg = vec![0; self.dims.k_src];
                for e in &self.ledger.entries[t] {
                    let v = e.interference.iter().fold(e.value.expect("value mode"), |acc, tm| {
                        f.sub(acc, f.mul(tm.coeff, self.values[tm.time].as_ref().expect("known")[tm.index]))
                    });
                    msg[e.index] = v;
                }
                self.values[t] = Some(msg);
            }
            debug_assert_eq!(self.ledger.entries[t].len(), self.dims.l_prime * kp);
            self.known[t] = true;
            self.pending.remove(i);
            // a newly known message can unblock older pending ones
            i = 0;
        }
    }
}
