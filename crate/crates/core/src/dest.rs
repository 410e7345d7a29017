//! Destination decoder. It replays the relay without values from the first-link
//! pattern to learn every message's layout, files the received symbols, decodes each
//! short MDS code, and cancels interference from earlier decoded messages.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf::Symbol;
use crate::relay::{decode_header, CodeLayout, Codebook, ParityKind, Relay, RelayConfig};

/// Role of a received symbol within its message's code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordRole {
    /// Message-carrying symbol of rank `ρ`; what it represents is `layout.ranks[ρ]`.
    Rank(usize),
    /// Parity `m` of code instance `instance`.
    Parity { instance: usize, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolRecord {
    pub time: usize,
    pub slot: usize,
    pub role: RecordRole,
    pub value: Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOutcome {
    Pending,
    Decoded { slot: usize },
    Failed,
}

/// Symbols of one message collected so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Collected {
    pub ranks: Vec<Option<Symbol>>,
    /// Per instance, per parity index.
    pub parities: Vec<Vec<Option<Symbol>>>,
}

impl Collected {
    fn new(k: usize) -> Self {
        Self { ranks: vec![None; k], parities: Vec::new() }
    }

    pub fn file(&mut self, rec: &SymbolRecord, n2: usize) {
        match rec.role {
            RecordRole::Rank(r) => self.ranks[r] = Some(rec.value),
            RecordRole::Parity { instance, m } => {
                if self.parities.len() <= instance {
                    self.parities.resize(instance + 1, vec![None; n2]);
                }
                self.parities[instance][m] = Some(rec.value);
            }
        }
    }
}

/// Rank values of one message: directly received, or decoded per code instance.
/// `None` while some instance has fewer survivors than its dimension.
pub fn recover_ranks(codes: &Codebook, layout: &CodeLayout, got: &Collected) -> Result<Option<Vec<Symbol>>> {
    let k = codes.dims.k_src;
    if layout.ranks.len() == k && got.ranks.iter().all(Option::is_some) {
        return Ok(Some(got.ranks.iter().map(|v| v.unwrap()).collect()));
    }
    let kind = match layout.kind() {
        Some(kind) if kind != ParityKind::Incomplete => kind,
        _ => return Ok(None),
    };
    let code = if kind == ParityKind::Layered { &codes.layered } else { &codes.grouped };
    let mut out: Vec<Option<Symbol>> = got.ranks.clone();
    for (idx, inst) in layout.instances().iter().enumerate() {
        if inst.ranks.iter().all(|&r| out[r].is_some()) {
            continue;
        }
        let mut survivors: Vec<(usize, Symbol)> =
            inst.ranks.iter().enumerate().filter_map(|(pos, &r)| out[r].map(|v| (pos, v))).collect();
        if let Some(par) = got.parities.get(idx) {
            survivors.extend(par.iter().enumerate().filter_map(|(m, v)| v.map(|v| (inst.dim + m, v))));
        }
        if survivors.len() < inst.dim {
            return Ok(None);
        }
        let word = code.decode(&survivors[..inst.dim])?;
        for (pos, &r) in inst.ranks.iter().enumerate() {
            out[r] = Some(word[pos]);
        }
    }
    Ok(Some(out.into_iter().map(|v| v.expect("every rank lies in one instance")).collect()))
}

/// Subtracts the interference of each rank using decoded earlier messages and
/// returns `s_t`.
pub fn cancel_interference<'a>(
    codes: &Codebook,
    layout: &CodeLayout,
    rank_values: &[Symbol],
    decoded: impl Fn(usize) -> Option<&'a [Symbol]>,
) -> Result<Vec<Symbol>> {
    let f = &*codes.field;
    let mut msg = vec![0; codes.dims.k_src];
    for (est, &v) in layout.ranks.iter().zip(rank_values) {
        let mut clean = v;
        for tm in &est.interference {
            let other = decoded(tm.time).ok_or(Error::MissingDependency { time: tm.time })?;
            clean = f.sub(clean, f.mul(tm.coeff, other[tm.index]));
        }
        msg[est.index] = clean;
    }
    Ok(msg)
}

/// Full decode of one message from what has been collected; `Ok(None)` if not yet
/// decodable.
pub fn decode_message<'a>(
    codes: &Codebook,
    layout: &CodeLayout,
    got: &Collected,
    decoded: impl Fn(usize) -> Option<&'a [Symbol]>,
) -> Result<Option<Vec<Symbol>>> {
    match recover_ranks(codes, layout, got)? {
        Some(values) => cancel_interference(codes, layout, &values, decoded).map(Some),
        None => Ok(None),
    }
}

/// How the destination learns the first-link pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PatternSource {
    /// Passed to [`Destination::ingest`] each slot.
    #[default]
    SideInformation,
    /// Read from the header of each received relay packet.
    Header,
}

#[derive(Debug, Clone)]
pub struct Destination {
    codes: Codebook,
    source: PatternSource,
    shadow: Relay,
    e1: Vec<Option<bool>>,
    raw: BTreeMap<usize, Vec<Symbol>>,
    collected: Vec<Collected>,
    decoded: Vec<Option<Vec<Symbol>>>,
    outcome: Vec<DecodeOutcome>,
    records: usize,
    now: usize,
}

impl Destination {
    /// `config` must match the relay's; the header flag selects the pattern source.
    pub fn new(codes: Codebook, config: RelayConfig) -> Self {
        let source = if config.header { PatternSource::Header } else { PatternSource::SideInformation };
        let shadow = Relay::new(codes.clone(), config, false);
        Self {
            codes,
            source,
            shadow,
            e1: Vec::new(),
            raw: BTreeMap::new(),
            collected: Vec::new(),
            decoded: Vec::new(),
            outcome: Vec::new(),
            records: 0,
            now: 0,
        }
    }

    pub fn now(&self) -> usize {
        self.now
    }

    pub fn outcome(&self, t: usize) -> DecodeOutcome {
        self.outcome.get(t).copied().unwrap_or(DecodeOutcome::Pending)
    }

    pub fn decoded(&self, t: usize) -> Option<&[Symbol]> {
        self.decoded.get(t).and_then(|v| v.as_deref())
    }

    pub fn layout(&self, t: usize) -> Option<&CodeLayout> {
        self.shadow.layout(t)
    }

    pub fn collected(&self, t: usize) -> Option<&Collected> {
        self.collected.get(t)
    }

    /// Number of symbols filed so far.
    pub fn records_filed(&self) -> usize {
        self.records
    }

    /// Ingests slot `slot`: the wire packet or `None` if it was erased, plus the
    /// first-link bit for that slot when running on side information.
    pub fn ingest(&mut self, slot: usize, wire: Option<&[Symbol]>, e1_bit: Option<bool>) -> Result<()> {
        if slot != self.now {
            return Err(Error::OutOfOrder { expected: self.now, got: slot });
        }
        self.now += 1;
        let t_max = self.codes.params.t;
        self.grow(slot);
        match self.source {
            PatternSource::SideInformation => {
                self.e1[slot] = Some(e1_bit.ok_or_else(|| Error::InvalidParams("side information missing".into()))?);
            }
            PatternSource::Header => {
                if let Some(w) = wire {
                    let delta = self.codes.dims.delta;
                    if w.len() < delta {
                        return Err(Error::MalformedPacket { slot, expected: delta, got: w.len() });
                    }
                    let bits = decode_header(&w[..delta], self.codes.field.order(), t_max + 1)
                        .ok_or(Error::MalformedPacket { slot, expected: delta, got: w.len() })?;
                    for (b, &bit) in bits.iter().enumerate() {
                        if let Some(s) = (slot + b).checked_sub(t_max) {
                            self.e1[s] = Some(bit);
                        }
                    }
                }
            }
        }
        if let Some(w) = wire {
            self.raw.insert(slot, w.to_vec());
        }
        while self.shadow.now() <= slot {
            let s = self.shadow.now();
            let Some(bit) = self.e1[s] else { break };
            let expected = self.shadow.step_pattern(bit)?;
            if let Some(w) = self.raw.remove(&s) {
                self.file_packet(s, &expected, &w)?;
            }
        }
        self.raw.retain(|&s, _| s + t_max >= slot);
        self.try_decode_all(slot)?;
        Ok(())
    }

    fn grow(&mut self, slot: usize) {
        let k = self.codes.dims.k_src;
        while self.e1.len() <= slot {
            self.e1.push(None);
            self.collected.push(Collected::new(k));
            self.decoded.push(None);
            self.outcome.push(DecodeOutcome::Pending);
        }
    }

    fn file_packet(&mut self, slot: usize, expected: &crate::relay::RelayPacket, wire: &[Symbol]) -> Result<()> {
        let p = self.codes.params;
        let header = if self.source == PatternSource::Header { self.codes.dims.delta } else { 0 };
        let want = header + expected.payload_len();
        if wire.len() != want {
            return Err(Error::MalformedPacket { slot, expected: want, got: wire.len() });
        }
        let last = p.t - p.n2;
        let mut at = header;
        for sub in &expected.subpackets {
            let t = sub.time;
            let i = slot - t;
            let values = &wire[at..at + sub.symbols.len()];
            at += sub.symbols.len();
            let layout = self.shadow.layout(t).expect("shadow relay has every live message");
            let roles: Vec<RecordRole> = if i <= last {
                layout.ranks_at(i).map(RecordRole::Rank).collect()
            } else {
                (0..values.len()).map(|instance| RecordRole::Parity { instance, m: i - last - 1 }).collect()
            };
            debug_assert_eq!(roles.len(), values.len());
            for (role, &value) in roles.into_iter().zip(values) {
                self.collected[t].file(&SymbolRecord { time: t, slot, role, value }, p.n2);
                self.records += 1;
            }
        }
        Ok(())
    }

    fn try_decode_all(&mut self, slot: usize) -> Result<()> {
        let t_max = self.codes.params.t;
        for t in slot.saturating_sub(t_max)..=slot {
            if self.outcome[t] != DecodeOutcome::Pending {
                continue;
            }
            if let Some(layout) = self.shadow.layout(t) {
                let decoded = &self.decoded;
                let dep = |u: usize| decoded.get(u).and_then(|v| v.as_deref());
                match decode_message(&self.codes, layout, &self.collected[t], dep) {
                    Ok(Some(msg)) => {
                        self.decoded[t] = Some(msg);
                        self.outcome[t] = DecodeOutcome::Decoded { slot };
                    }
                    Ok(None) | Err(Error::MissingDependency { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            if self.outcome[t] == DecodeOutcome::Pending && t + t_max == slot {
                self.outcome[t] = DecodeOutcome::Failed;
            }
        }
        Ok(())
    }
}
