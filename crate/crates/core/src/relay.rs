//! The adaptive relay: per-message transmission schedules, relay packet assembly,
//! and the two parity constructions.
//!
//! Each message `t` is sent over slots `t+j ..= t+T`. Message-carrying offsets
//! `i <= T-N2` transmit ranks `0..k` in order; the remaining `N2` offsets carry
//! parities of short MDS codes whose message symbols are those ranks. Which ranks
//! share a code instance depends on the [`ParityKind`].

use std::sync::Arc;

use crate::channel::ErasurePattern;
use crate::error::{Error, Result};
use crate::gf::{GaloisField, Symbol};
use crate::mds::MdsCode;
use crate::params::{DerivedDims, SchemeParams};
use crate::source::{self, Estimate, RelayReceiver, SourcePacket};

/// All codes of one parameter set over the implemented field.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub params: SchemeParams,
    pub dims: DerivedDims,
    pub field: Arc<GaloisField>,
    /// `(n', k')`, per source layer.
    pub source: Arc<MdsCode>,
    /// `(n'', k'')`, per relay layer.
    pub layered: Arc<MdsCode>,
    /// `(T+1-N1, l'')`, one per position inside a group.
    pub grouped: Arc<MdsCode>,
}

impl Codebook {
    pub fn new(params: &SchemeParams) -> Result<Self> {
        params.validate()?;
        let dims = params.dims();
        let field = source::implemented_field(params)?;
        let source = Arc::new(source::source_code(params, &field)?);
        let layered = Arc::new(MdsCode::new(Arc::clone(&field), dims.n_dprime, dims.k_dprime)?);
        let grouped = Arc::new(MdsCode::new(Arc::clone(&field), dims.n_fallback, dims.l_dprime)?);
        Ok(Self { params: *params, dims, field, source, layered, grouped })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParityKind {
    /// `l''` instances of the `(n'', k'')` code; rank `ρ` is position `ρ / l''` of
    /// instance `ρ % l''`.
    Layered,
    /// `k''` instances of the `(T+1-N1, l'')` code; rank `ρ` is position `ρ / k''` of
    /// instance `ρ % k''`, i.e. groups of `k''` consecutive ranks.
    Grouped,
    /// Deliberately wrong grouping: rank `ρ` is position `ρ % l''` of instance `ρ / l''`.
    Interleaved,
    /// Not every rank was sent by `t+T-N2`; no parities follow.
    Incomplete,
}

/// Fault injection shared by relay and destination, for testing the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Mutation {
    #[default]
    None,
    /// Replaces the grouped parity construction with [`ParityKind::Interleaved`].
    InterleavedGroups,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelayConfig {
    /// Prefix each packet with the first-link pattern of the last `T+1` slots.
    pub header: bool,
    pub mutation: Mutation,
}

/// Transmission plan of one message, indexed by offset `i` in `0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub time: usize,
    pub erased: bool,
    /// `|C(t; i)|`, parity offsets included.
    pub alpha: Vec<usize>,
    /// Rate cap at each message-carrying offset.
    pub ell: Vec<usize>,
    /// First-link erasures in `[t+1, t+i-1]`.
    pub gamma: Vec<usize>,
    pub kind: Option<ParityKind>,
}

impl Schedule {
    fn new(time: usize, erased: bool, t: usize) -> Self {
        Self { time, erased, alpha: vec![0; t + 1], ell: vec![0; t + 1], gamma: vec![0; t + 1], kind: None }
    }

    pub fn message_symbols(&self, params: &SchemeParams) -> usize {
        self.alpha[..=params.t - params.n2].iter().sum()
    }
}

/// Rate cap `ℓ` at offset `i` of an erased message after `gamma` first-link erasures.
pub fn rate_cap(params: &SchemeParams, gamma: usize, i: usize) -> usize {
    let d = params.dims();
    if gamma < params.j {
        d.l_dprime
    } else if i >= params.n1 {
        d.l_prime
    } else {
        0
    }
}

/// Parity construction chosen at the end of the message-carrying phase.
pub fn parity_kind(params: &SchemeParams, erased: bool, gamma_last: usize, complete: bool, mutation: Mutation) -> ParityKind {
    if !complete {
        ParityKind::Incomplete
    } else if !erased || gamma_last < params.j {
        ParityKind::Layered
    } else if mutation == Mutation::InterleavedGroups {
        ParityKind::Interleaved
    } else {
        ParityKind::Grouped
    }
}

/// The schedule computed from the pattern alone, with availability
/// `min(k, l' * #nonerased in [t+1, t+i])`.
pub fn compute_schedule(params: &SchemeParams, e1: &ErasurePattern, t: usize) -> Result<Schedule> {
    params.validate()?;
    if !e1.is_admissible(params.t, params.n1) {
        return Err(Error::InadmissiblePattern);
    }
    let d = params.dims();
    let erased = e1.is_erased(t);
    let mut s = Schedule::new(t, erased, params.t);
    let last = params.t - params.n2;
    let mut sent = 0;
    for i in params.j..=last {
        let (gamma, ell, avail) = if erased {
            let gamma = if i >= 2 { e1.count(t + 1, t + i - 1) } else { 0 };
            (gamma, rate_cap(params, gamma, i), source::estimates_available(params, e1, t, t + i))
        } else {
            (0, d.l_dprime, d.k_src)
        };
        s.gamma[i] = gamma;
        s.ell[i] = ell;
        s.alpha[i] = ell.min(avail - sent);
        sent += s.alpha[i];
    }
    let gamma_last = if last >= 2 { e1.count(t + 1, t + last - 1) } else { 0 };
    let kind = parity_kind(params, erased, gamma_last, sent == d.k_src, Mutation::None);
    s.kind = Some(kind);
    for i in last + 1..=params.t {
        s.alpha[i] = parity_width(&d, kind);
    }
    Ok(s)
}

/// Parity symbols per parity slot.
pub fn parity_width(dims: &DerivedDims, kind: ParityKind) -> usize {
    match kind {
        ParityKind::Layered => dims.l_dprime,
        ParityKind::Grouped | ParityKind::Interleaved => dims.k_dprime,
        ParityKind::Incomplete => 0,
    }
}

/// One short MDS codeword of a message: message positions are ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeInstance {
    pub dim: usize,
    /// Rank at each message position.
    pub ranks: Vec<usize>,
    /// Slot offset carrying each codeword position.
    pub offsets: Vec<usize>,
}

/// How one message was sent: which rank went out at which offset, what each rank
/// is, and how the parities were formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeLayout {
    pub schedule: Schedule,
    pub rank_offset: Vec<usize>,
    pub ranks: Vec<Estimate>,
    /// Filled once the parity kind is fixed.
    instances: Vec<CodeInstance>,
}

impl CodeLayout {
    pub fn time(&self) -> usize {
        self.schedule.time
    }

    pub fn kind(&self) -> Option<ParityKind> {
        self.schedule.kind
    }

    /// Ranks sent at `offset`, in order.
    pub fn ranks_at(&self, offset: usize) -> impl Iterator<Item = usize> + '_ {
        self.rank_offset.iter().enumerate().filter(move |&(_, &o)| o == offset).map(|(r, _)| r)
    }

    /// Code instances with the slot offset of every codeword position; empty until
    /// the parity kind is fixed, and for incomplete messages.
    pub fn instances(&self) -> &[CodeInstance] {
        &self.instances
    }

    fn build_instances(&self, params: &SchemeParams) -> Vec<CodeInstance> {
        let d = params.dims();
        let first_parity = params.t - params.n2 + 1;
        let kind = match self.schedule.kind {
            Some(k) if k != ParityKind::Incomplete => k,
            _ => return Vec::new(),
        };
        let (count, dim) = match kind {
            ParityKind::Layered => (d.l_dprime, d.k_dprime),
            _ => (d.k_dprime, d.l_dprime),
        };
        let mut out: Vec<CodeInstance> =
            (0..count).map(|_| CodeInstance { dim, ranks: vec![0; dim], offsets: vec![0; dim + params.n2] }).collect();
        for rho in 0..d.k_src {
            let (inst, pos) = match kind {
                ParityKind::Layered => (rho % d.l_dprime, rho / d.l_dprime),
                ParityKind::Grouped => (rho % d.k_dprime, rho / d.k_dprime),
                _ => (rho / d.l_dprime, rho % d.l_dprime),
            };
            out[inst].ranks[pos] = rho;
            out[inst].offsets[pos] = self.rank_offset[rho];
        }
        for inst in &mut out {
            for m in 0..params.n2 {
                inst.offsets[dim + m] = first_parity + m;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subpacket {
    pub time: usize,
    pub symbols: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayPacket {
    pub slot: usize,
    pub header: Option<Vec<Symbol>>,
    /// Oldest message first.
    pub subpackets: Vec<Subpacket>,
}

impl RelayPacket {
    pub fn payload_len(&self) -> usize {
        self.subpackets.iter().map(|s| s.symbols.len()).sum()
    }

    /// Header symbols, then subpackets; lengths are implied by the schedule.
    pub fn to_wire(&self) -> Vec<Symbol> {
        let mut out = self.header.clone().unwrap_or_default();
        for s in &self.subpackets {
            out.extend_from_slice(&s.symbols);
        }
        out
    }
}

/// Base-`q` little-endian packing of `bits` (bit `b` weighs `2^b`) into `len` symbols.
pub fn encode_header(bits: &[bool], q: u32, len: usize) -> Vec<Symbol> {
    assert!(bits.len() <= 127);
    let mut v: u128 = bits.iter().enumerate().fold(0, |acc, (b, &x)| acc | (x as u128) << b);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((v % q as u128) as Symbol);
        v /= q as u128;
    }
    assert_eq!(v, 0, "header too short for the window");
    out
}

/// Inverse of [`encode_header`]; `None` if the symbols encode a value of more than `nbits` bits.
pub fn decode_header(symbols: &[Symbol], q: u32, nbits: usize) -> Option<Vec<bool>> {
    let mut v: u128 = 0;
    for &s in symbols.iter().rev() {
        if s as u32 >= q {
            return None;
        }
        v = v.checked_mul(q as u128)?.checked_add(s as u128)?;
    }
    if nbits < 128 && v >> nbits != 0 {
        return None;
    }
    Some((0..nbits).map(|b| v >> b & 1 == 1).collect())
}

/// First-link bits for slots `[slot-T, slot]`, oldest first; slots before 0 read as 0.
pub fn header_window(t: usize, slot: usize, erased: impl Fn(usize) -> bool) -> Vec<bool> {
    (0..=t).map(|b| (slot + b).checked_sub(t).is_some_and(&erased)).collect()
}

/// Relay state machine. With values it forwards real symbols; without, it only
/// tracks the structure, which is what the destination replays from side information.
#[derive(Debug, Clone)]
pub struct Relay {
    codes: Codebook,
    config: RelayConfig,
    with_values: bool,
    rx: RelayReceiver,
    layouts: Vec<CodeLayout>,
    parities: Vec<Vec<Vec<Symbol>>>,
    payloads: Vec<usize>,
}

impl Relay {
    pub fn new(codes: Codebook, config: RelayConfig, with_values: bool) -> Self {
        let rx = RelayReceiver::new(&codes.params, Arc::clone(&codes.source), with_values);
        let cap = 4 * (codes.params.t + 1);
        Self {
            codes,
            config,
            with_values,
            rx,
            layouts: Vec::with_capacity(cap),
            parities: Vec::with_capacity(cap),
            payloads: Vec::with_capacity(cap),
        }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.codes.params
    }

    pub fn codes(&self) -> &Codebook {
        &self.codes
    }

    pub fn config(&self) -> RelayConfig {
        self.config
    }

    pub fn now(&self) -> usize {
        self.rx.now()
    }

    pub fn receiver(&self) -> &RelayReceiver {
        &self.rx
    }

    pub fn layout(&self, t: usize) -> Option<&CodeLayout> {
        self.layouts.get(t)
    }

    pub fn layouts(&self) -> &[CodeLayout] {
        &self.layouts
    }

    pub fn payloads(&self) -> &[usize] {
        &self.payloads
    }

    /// Advances one slot with the source packet, or `None` if it was erased.
    pub fn step(&mut self, packet: Option<&SourcePacket>) -> Result<RelayPacket> {
        self.advance(packet.is_none(), packet)
    }

    /// Advances one slot knowing only whether the source packet was erased.
    pub fn step_pattern(&mut self, erased: bool) -> Result<RelayPacket> {
        self.advance(erased, None)
    }

    fn advance(&mut self, erased: bool, packet: Option<&SourcePacket>) -> Result<RelayPacket> {
        let slot = self.rx.now();
        self.rx.ingest(slot, erased, packet)?;
        let p = self.codes.params;
        let d = self.codes.dims;
        self.layouts.push(CodeLayout {
            schedule: Schedule::new(slot, erased, p.t),
            rank_offset: Vec::with_capacity(d.k_src),
            ranks: Vec::with_capacity(d.k_src),
            instances: Vec::new(),
        });
        self.parities.push(Vec::new());

        let last = p.t - p.n2;
        let mut subpackets = Vec::with_capacity(p.t + 1);
        if slot >= p.j {
            for t in slot.saturating_sub(p.t)..=slot - p.j {
                let i = slot - t;
                let symbols = if i <= last {
                    let sent = self.send_ranks(t, i)?;
                    if i == last {
                        self.close_message_phase(t);
                    }
                    sent
                } else {
                    let m = i - last - 1;
                    self.parities[t].iter().map(|par| par[m]).collect::<Vec<_>>()
                };
                let width = symbols.len();
                self.layouts[t].schedule.alpha[i] = width;
                if width > 0 {
                    subpackets.push(Subpacket { time: t, symbols });
                }
            }
        }
        if slot < p.j {
            debug_assert!(subpackets.is_empty());
        }
        let header = self.config.header.then(|| {
            encode_header(&header_window(p.t, slot, |s| self.rx.is_erased(s)), self.codes.field.order(), d.delta)
        });
        let packet = RelayPacket { slot, header, subpackets };
        self.payloads.push(packet.payload_len());
        Ok(packet)
    }

    /// Sends the next ranks of message `t` at offset `i` and returns their values
    /// (zeros without values).
    fn send_ranks(&mut self, t: usize, i: usize) -> Result<Vec<Symbol>> {
        let p = self.codes.params;
        let d = self.codes.dims;
        let erased = self.layouts[t].schedule.erased;
        let sent = self.layouts[t].ranks.len();
        let (gamma, ell, avail) = if erased {
            let gamma = if i >= 2 { (t + 1..t + i).filter(|&s| self.rx.is_erased(s)).count() } else { 0 };
            (gamma, rate_cap(&p, gamma, i), self.rx.ledger().count(t))
        } else {
            (0, d.l_dprime, d.k_src)
        };
        let alpha = ell.min(avail - sent);
        let layout = &mut self.layouts[t];
        layout.schedule.gamma[i] = gamma;
        layout.schedule.ell[i] = ell;
        let mut out = Vec::with_capacity(alpha);
        for rho in sent..sent + alpha {
            let est = if erased {
                self.rx.ledger().get(t)[rho].clone()
            } else {
                let index = (rho % d.l_dprime) * d.k_dprime + rho / d.l_dprime;
                let value = self.rx.message(t).map(|m| m[index]);
                Estimate { time: t, index, created: t, interference: Vec::new(), value }
            };
            out.push(est.value.unwrap_or(0));
            layout.ranks.push(est);
            layout.rank_offset.push(i);
        }
        if out.len() > ell {
            return Err(Error::ScheduleOverrun { time: t });
        }
        Ok(out)
    }

    fn close_message_phase(&mut self, t: usize) {
        let p = self.codes.params;
        let d = self.codes.dims;
        let last = p.t - p.n2;
        let layout = &mut self.layouts[t];
        let gamma_last = if last >= 2 { (t + 1..t + last).filter(|&s| self.rx.is_erased(s)).count() } else { 0 };
        let kind = parity_kind(&p, layout.schedule.erased, gamma_last, layout.ranks.len() == d.k_src, self.config.mutation);
        layout.schedule.kind = Some(kind);
        layout.instances = layout.build_instances(&p);
        let instances = &layout.instances;
        let code = if kind == ParityKind::Layered { &self.codes.layered } else { &self.codes.grouped };
        self.parities[t] = instances
            .iter()
            .map(|inst| {
                if self.with_values {
                    let msg: Vec<Symbol> = inst.ranks.iter().map(|&r| layout.ranks[r].value.unwrap_or(0)).collect();
                    code.parities(&msg).expect("instance dimension matches its code")
                } else {
                    vec![0; p.n2]
                }
            })
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Link;
    use crate::source::SourceEncoder;

    fn params(t: usize, n1: usize, n2: usize, j: usize) -> SchemeParams {
        SchemeParams::new(t, n1, n2, j).unwrap()
    }

    fn run(p: &SchemeParams, e1: &ErasurePattern, slots: usize, config: RelayConfig) -> (Relay, Vec<RelayPacket>, Vec<Vec<Symbol>>) {
        let codes = Codebook::new(p).unwrap();
        let mut enc = SourceEncoder::with_code(p, Arc::clone(&codes.source));
        let mut relay = Relay::new(codes, config, true);
        let q = p.implemented_field_size() as u64;
        let mut packets = Vec::new();
        for s in 0..slots {
            let msg: Vec<Symbol> = (0..p.dims().k_src).map(|x| ((s * 31 + x * 7 + 3) as u64 % q) as Symbol).collect();
            let pkt = enc.encode(msg).unwrap();
            packets.push(relay.step(if e1.is_erased(s) { None } else { Some(&pkt) }).unwrap());
        }
        (relay, packets, enc.history().to_vec())
    }

    #[test]
    fn burst_schedule_matches_pattern_formula() {
        let p = params(5, 2, 3, 0);
        let e1 = ErasurePattern::from_slots(Link::SourceRelay, 12, &[1, 2]);
        let s = compute_schedule(&p, &e1, 1).unwrap();
        assert_eq!(&s.alpha[1..=2], &[0, 3]);
        assert_eq!(s.kind, Some(ParityKind::Grouped));
        assert_eq!(&s.alpha[3..], &[3, 3, 3]);
    }

    #[test]
    fn isolated_erasure_schedule() {
        let p = params(6, 2, 3, 1);
        let e1 = ErasurePattern::from_slots(Link::SourceRelay, 14, &[4, 6]);
        let s = compute_schedule(&p, &e1, 4).unwrap();
        assert_eq!(&s.alpha[1..=3], &[2, 1, 3]);
        assert_eq!(s.kind, Some(ParityKind::Grouped));
        let s3 = compute_schedule(&p, &e1, 3).unwrap();
        assert_eq!(&s3.alpha[..4], &[0, 2, 2, 2]);
        assert_eq!(s3.kind, Some(ParityKind::Layered));
    }

    #[test]
    fn relay_matches_pattern_schedule() {
        let p = params(6, 2, 3, 1);
        let e1 = ErasurePattern::from_slots(Link::SourceRelay, 14, &[4, 6]);
        let (relay, _, _) = run(&p, &e1, 14, RelayConfig::default());
        for t in 0..7 {
            assert_eq!(relay.layout(t).unwrap().schedule, compute_schedule(&p, &e1, t).unwrap(), "t={t}");
        }
        let l4 = relay.layout(4).unwrap();
        assert_eq!(l4.ranks.iter().map(|e| e.index).collect::<Vec<_>>(), vec![1, 3, 5, 0, 2, 4]);
        // groups of three consecutive ranks; instance p pairs rank p with rank 3+p
        let inst = l4.instances();
        assert_eq!(inst.len(), 3);
        assert_eq!(inst[0].ranks, vec![0, 3]);
        assert_eq!(inst[0].offsets, vec![1, 3, 4, 5, 6]);
    }

    #[test]
    fn nonerased_layout_is_diagonal() {
        let p = params(6, 2, 3, 1);
        let (relay, _, _) = run(&p, &ErasurePattern::clean(Link::SourceRelay, 12), 12, RelayConfig::default());
        let l = relay.layout(3).unwrap();
        assert_eq!(l.ranks_at(1).map(|r| l.ranks[r].index).collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(l.ranks_at(2).map(|r| l.ranks[r].index).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(l.ranks_at(3).map(|r| l.ranks[r].index).collect::<Vec<_>>(), vec![2, 5]);
        assert_eq!(l.kind(), Some(ParityKind::Layered));
    }

    #[test]
    fn burst_payload_reaches_bound() {
        let p = params(5, 2, 3, 0);
        let e1 = ErasurePattern::from_slots(Link::SourceRelay, 12, &[1, 2]);
        let (relay, packets, _) = run(&p, &e1, 12, RelayConfig::default());
        assert_eq!(relay.payloads()[5], 10);
        assert_eq!(packets[5].subpackets.iter().map(|s| (s.time, s.symbols.len())).collect::<Vec<_>>(), vec![
            (0, 1),
            (1, 3),
            (2, 3),
            (3, 1),
            (4, 1),
            (5, 1)
        ]);
        assert!(relay.payloads().iter().all(|&x| x <= p.worst_case_n2()));
    }

    #[test]
    fn parities_are_codewords_of_group_codes() {
        let p = params(6, 2, 3, 1);
        let e1 = ErasurePattern::from_slots(Link::SourceRelay, 14, &[4, 6]);
        let (relay, packets, msgs) = run(&p, &e1, 14, RelayConfig::default());
        let codes = relay.codes();
        let l = relay.layout(4).unwrap();
        for inst in l.instances().to_vec() {
            let word: Vec<Symbol> = inst.ranks.iter().map(|&r| msgs[4][l.ranks[r].index]).collect();
            let expect = codes.grouped.encode(&word).unwrap();
            for m in 0..p.n2 {
                let slot = 4 + inst.offsets[inst.dim + m];
                let sub = packets[slot].subpackets.iter().find(|s| s.time == 4).unwrap();
                let which = l.instances().iter().position(|x| x == &inst).unwrap();
                assert_eq!(sub.symbols[which], expect[inst.dim + m]);
            }
        }
    }

    #[test]
    fn no_subpackets_before_threshold() {
        let p = params(7, 3, 2, 2);
        let (_, packets, _) = run(&p, &ErasurePattern::clean(Link::SourceRelay, 4), 4, RelayConfig::default());
        assert!(packets[0].subpackets.is_empty() && packets[1].subpackets.is_empty());
        assert_eq!(packets[2].subpackets.len(), 1);
        assert_eq!(packets[2].subpackets[0].time, 0);
    }

    #[test]
    fn header_round_trip() {
        for w in 0u32..64 {
            let bits: Vec<bool> = (0..6).map(|b| w >> b & 1 == 1).collect();
            let h = encode_header(&bits, 7, 3);
            assert_eq!(h.len(), 3);
            assert_eq!(decode_header(&h, 7, 6).unwrap(), bits);
        }
        assert_eq!(encode_header(&[false; 6], 7, 3), vec![0, 0, 0]);
        let p = params(15, 4, 6, 0);
        assert_eq!(p.dims().delta, 4);
        for w in 0u32..1 << 16 {
            let bits: Vec<bool> = (0..16).map(|b| w >> b & 1 == 1).collect();
            assert_eq!(decode_header(&encode_header(&bits, 16, 4), 16, 16).unwrap(), bits);
        }
    }

    #[test]
    fn header_carries_recent_pattern() {
        let p = params(5, 2, 3, 0);
        let e1 = ErasurePattern::from_slots(Link::SourceRelay, 12, &[1, 2]);
        let (_, packets, _) = run(&p, &e1, 12, RelayConfig { header: true, mutation: Mutation::None });
        let h = packets[6].header.as_ref().unwrap();
        assert_eq!(h.len(), 3);
        let bits = decode_header(h, 7, 6).unwrap();
        // window [1, 6], oldest first
        assert_eq!(bits, vec![true, true, false, false, false, false]);
        assert_eq!(packets[6].to_wire().len(), 3 + packets[6].payload_len());
    }

    #[test]
    fn mutation_changes_grouping() {
        let p = params(6, 2, 3, 1);
        let e1 = ErasurePattern::from_slots(Link::SourceRelay, 14, &[4, 6]);
        let (relay, _, _) = run(&p, &e1, 14, RelayConfig { header: false, mutation: Mutation::InterleavedGroups });
        let l = relay.layout(4).unwrap();
        assert_eq!(l.kind(), Some(ParityKind::Interleaved));
        assert_eq!(l.instances()[0].ranks, vec![0, 1]);
    }
}
