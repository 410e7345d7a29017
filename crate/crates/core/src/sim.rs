//! End-to-end episodes, the exhaustive and randomized achievability verifiers, and
//! Monte-Carlo loss estimation.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{self, ChannelConfig, ErasurePattern, Link};
use crate::dest::{DecodeOutcome, Destination};
use crate::error::{Error, Result};
use crate::gf::Symbol;
use crate::params::SchemeParams;
use crate::relay::{CodeLayout, Codebook, Mutation, ParityKind, Relay, RelayConfig};
use crate::source::{self, SourceEncoder};

/// Largest delay budget accepted by [`exhaustive_verify`].
pub const EXHAUSTIVE_MAX_T: usize = 7;

/// Messages per independently seeded block of a loss simulation.
pub const LOSS_CHUNK: usize = 4096;

const MESSAGE_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EpisodeOptions {
    pub config: RelayConfig,
    /// Seeds the message contents.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeReport {
    /// Messages `0..horizon` are evaluated; the run continues `T` more slots.
    pub horizon: usize,
    /// Decode slot per message, `None` if it failed.
    pub decode_slots: Vec<Option<usize>>,
    pub payloads: Vec<usize>,
    pub max_payload: usize,
    /// Slots whose payload exceeded the worst-case length.
    pub overflow_slots: usize,
    /// Broken invariants; empty unless something is wrong.
    pub violations: Vec<String>,
}

impl EpisodeReport {
    pub fn failures(&self) -> usize {
        self.decode_slots.iter().filter(|d| d.is_none()).count()
    }

    pub fn failed_messages(&self) -> Vec<usize> {
        (0..self.decode_slots.len()).filter(|&t| self.decode_slots[t].is_none()).collect()
    }

    pub fn is_clean(&self) -> bool {
        self.failures() == 0 && self.violations.is_empty()
    }
}

/// Runs source, relay and destination over `horizon + T` slots with pattern side
/// information at the destination.
pub fn run_episode(params: &SchemeParams, e1: &ErasurePattern, e2: &ErasurePattern, horizon: usize) -> Result<EpisodeReport> {
    let codes = Codebook::new(params)?;
    run_episode_with(&codes, &EpisodeOptions::default(), e1, e2, horizon)
}

pub fn run_episode_with(
    codes: &Codebook,
    opts: &EpisodeOptions,
    e1: &ErasurePattern,
    e2: &ErasurePattern,
    horizon: usize,
) -> Result<EpisodeReport> {
    Ok(drive(codes, opts, e1, e2, horizon)?.0)
}

fn drive(
    codes: &Codebook,
    opts: &EpisodeOptions,
    e1: &ErasurePattern,
    e2: &ErasurePattern,
    horizon: usize,
) -> Result<(EpisodeReport, Relay)> {
    let p = codes.params;
    let d = codes.dims;
    let f = &*codes.field;
    let admissible = e1.is_admissible(p.t, p.n1);
    let window = p.t - p.n2;
    let slots = horizon + p.t;
    let q = f.order();
    let mut rng = channel::sub_rng(opts.seed, MESSAGE_STREAM);
    let mut enc = SourceEncoder::with_code(&p, codes.source.clone());
    let mut relay = Relay::new(codes.clone(), opts.config, true);
    let mut dest = Destination::new(codes.clone(), opts.config);
    let mut violations = Vec::new();
    let mut overflow_slots = 0;

    for s in 0..slots {
        let msg: Vec<Symbol> = (0..d.k_src).map(|_| rng.random_range(0..q) as Symbol).collect();
        let pkt = enc.encode(msg)?;
        let erased = e1.is_erased(s);
        let rp = relay.step((!erased).then_some(&pkt))?;
        let truth = enc.history();
        let ledger = relay.receiver().ledger();
        for t in s.saturating_sub(window)..=s {
            for est in ledger.get(t).iter().filter(|e| e.created == s) {
                if est.value != Some(est.evaluate(f, truth)) {
                    violations.push(format!("slot {s}: estimate of s_{t}[{}] does not match its functional", est.index));
                }
            }
            if admissible && e1.is_erased(t) {
                let kappa = source::estimates_available(&p, e1, t, s);
                if ledger.count(t) != kappa {
                    violations.push(format!("slot {s}: message {t} has {} estimates, expected {kappa}", ledger.count(t)));
                }
            }
        }
        let payload = rp.payload_len();
        if payload > d.n2_star {
            overflow_slots += 1;
            if admissible {
                violations.push(format!("slot {s}: payload {payload} exceeds {}", d.n2_star));
            }
        }
        let wire = rp.to_wire();
        dest.ingest(s, (!e2.is_erased(s)).then_some(&wire[..]), Some(erased))?;
    }

    let truth = enc.history();
    let mut decode_slots = Vec::with_capacity(horizon);
    for t in 0..horizon {
        match dest.outcome(t) {
            DecodeOutcome::Decoded { slot } => {
                if dest.decoded(t) != Some(&truth[t][..]) {
                    violations.push(format!("message {t} decoded to a wrong value"));
                }
                if slot > t + p.t {
                    violations.push(format!("message {t} decoded after its deadline"));
                }
                decode_slots.push(Some(slot));
            }
            DecodeOutcome::Failed => decode_slots.push(None),
            DecodeOutcome::Pending => {
                violations.push(format!("message {t} still pending after its deadline"));
                decode_slots.push(None);
            }
        }
        if admissible {
            let layout = relay.layout(t).expect("relay saw every slot");
            if layout.schedule.message_symbols(&p) != d.k_src || layout.kind() == Some(ParityKind::Incomplete) {
                violations.push(format!("message {t}: only {} of {} symbols scheduled", layout.ranks.len(), d.k_src));
            }
        }
    }
    let payloads = relay.payloads().to_vec();
    let max_payload = payloads.iter().copied().max().unwrap_or(0);
    Ok((EpisodeReport { horizon, decode_slots, payloads, max_payload, overflow_slots, violations }, relay))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub e1: ErasurePattern,
    pub e2: ErasurePattern,
    pub message: Option<usize>,
    pub reason: String,
    /// The pair was replayed end to end and the message failed there too.
    pub reproduced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    pub horizon: usize,
    pub mutation: Mutation,
    pub seed: u64,
}

impl VerifyOptions {
    pub fn for_params(params: &SchemeParams) -> Self {
        Self { horizon: 2 * (params.t + 1), mutation: Mutation::None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub params: SchemeParams,
    pub horizon: usize,
    pub first_link_patterns: u64,
    pub messages_checked: u64,
    /// Second-link patterns examined, counted per message.
    pub second_link_patterns: u64,
    pub grouped_messages: u64,
    pub group_checks: u64,
    pub episodes: u64,
    pub max_payload: usize,
    pub counterexample: Option<Counterexample>,
}

impl VerifyReport {
    fn empty(params: &SchemeParams, horizon: usize) -> Self {
        Self {
            params: *params,
            horizon,
            first_link_patterns: 0,
            messages_checked: 0,
            second_link_patterns: 0,
            grouped_messages: 0,
            group_checks: 0,
            episodes: 0,
            max_payload: 0,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    /// Keeps the earlier counterexample so merged results do not depend on scheduling.
    fn merge(mut self, other: Self) -> Self {
        self.first_link_patterns += other.first_link_patterns;
        self.messages_checked += other.messages_checked;
        self.second_link_patterns += other.second_link_patterns;
        self.grouped_messages += other.grouped_messages;
        self.group_checks += other.group_checks;
        self.episodes += other.episodes;
        self.max_payload = self.max_payload.max(other.max_payload);
        if self.counterexample.is_none() {
            self.counterexample = other.counterexample;
        }
        self
    }
}

/// Second-link pattern erasing the first `N2` slots of every `T+1` block, shifted by `phase`.
fn periodic_pattern(horizon: usize, t: usize, n2: usize, phase: usize) -> ErasurePattern {
    ErasurePattern::new(Link::RelayDestination, (0..horizon).map(|s| (s + phase) % (t + 1) < n2).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LayoutVerdict {
    patterns: u64,
    group_checks: u64,
    /// Erased offsets and the reason.
    failure: Option<(u32, String)>,
}

/// Checks one message's layout against every second-link erasure set within its
/// window `[j, cut]` that has at most `N2` erasures: each code instance must keep at
/// least its dimension in survivors. For grouped parities also checks that `w`
/// erasures among message-carrying slots hit at most `w` symbols of any instance,
/// and that each slot touches at most two groups.
fn check_layout(p: &SchemeParams, layout: &CodeLayout, cut: usize) -> LayoutVerdict {
    let d = p.dims();
    let mut v = LayoutVerdict { patterns: 0, group_checks: 0, failure: None };
    if layout.ranks.len() != d.k_src || matches!(layout.kind(), None | Some(ParityKind::Incomplete)) {
        v.failure = Some((0, "message incomplete at the relay".into()));
        return v;
    }
    let grouped = matches!(layout.kind(), Some(ParityKind::Grouped | ParityKind::Interleaved));
    if layout.kind() == Some(ParityKind::Grouped) {
        for i in 0..=p.t {
            let mut groups: Vec<usize> = layout.ranks_at(i).map(|r| r / d.k_dprime).collect();
            groups.dedup();
            if groups.len() > 2 {
                v.failure = Some((0, format!("slot offset {i} carries symbols of {} groups", groups.len())));
                return v;
            }
        }
    }
    let last = p.t - p.n2;
    let counts: Vec<(usize, usize, Vec<u8>, Vec<u8>)> = layout
        .instances()
        .iter()
        .map(|inst| {
            let mut all = vec![0u8; p.t + 1];
            let mut msg = vec![0u8; p.t + 1];
            for (pos, &o) in inst.offsets.iter().enumerate() {
                all[o] += 1;
                if pos < inst.dim {
                    msg[o] += 1;
                }
            }
            (inst.offsets.len(), inst.dim, all, msg)
        })
        .collect();
    let allowed: u32 = (p.j..=cut).fold(0, |m, o| m | 1 << o);
    let message_slots: u32 = (p.j..=last.min(cut)).fold(0, |m, o| m | 1 << o);
    let mut sub = allowed;
    loop {
        let w = sub.count_ones() as usize;
        if w <= p.n2 {
            v.patterns += 1;
            for (n, dim, all, msg) in &counts {
                let mut lost = 0;
                let mut lost_msg = 0;
                let mut bits = sub;
                while bits != 0 {
                    let o = bits.trailing_zeros() as usize;
                    lost += all[o] as usize;
                    lost_msg += msg[o] as usize;
                    bits &= bits - 1;
                }
                if n - lost < *dim {
                    v.failure = Some((sub, format!("a code instance keeps {} of {dim} needed symbols", n - lost)));
                    return v;
                }
                if grouped && sub & !message_slots == 0 {
                    v.group_checks += 1;
                    if lost_msg > w {
                        v.failure = Some((sub, format!("{w} erasures remove {lost_msg} symbols of one group position")));
                        return v;
                    }
                }
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & allowed;
    }
    v
}

type Memo = HashMap<(Option<ParityKind>, Vec<usize>, usize), LayoutVerdict>;

fn verify_first_link(codes: &Codebook, opts: &VerifyOptions, mask: u64, memo: &mut Memo) -> Result<VerifyReport> {
    let p = codes.params;
    let h = opts.horizon;
    let mut report = VerifyReport::empty(&p, h);
    let e1 = ErasurePattern::from_mask(Link::SourceRelay, h, mask);
    let phase = (mask % (p.t as u64 + 2)) as usize;
    let e2 = if phase == p.t + 1 {
        ErasurePattern::clean(Link::RelayDestination, h)
    } else {
        periodic_pattern(h, p.t, p.n2, phase)
    };
    let ep = EpisodeOptions { config: RelayConfig { header: false, mutation: opts.mutation }, seed: opts.seed ^ mask.rotate_left(17) };
    let (run, relay) = drive(codes, &ep, &e1, &e2, h)?;
    report.first_link_patterns = 1;
    report.episodes = 1;
    report.max_payload = run.max_payload;
    if let Some(reason) = run.violations.first() {
        report.counterexample = Some(Counterexample { e1, e2, message: None, reason: reason.clone(), reproduced: true });
        return Ok(report);
    }
    if let Some(&t) = run.failed_messages().first() {
        report.counterexample =
            Some(Counterexample { e1, e2, message: Some(t), reason: "message not decoded by its deadline".into(), reproduced: true });
        return Ok(report);
    }
    for t in 0..h {
        let layout = relay.layout(t).expect("relay saw every slot");
        let cut = p.t.min(h - 1 - t);
        let key = (layout.kind(), layout.rank_offset.clone(), cut);
        let verdict = memo.entry(key).or_insert_with(|| check_layout(&p, layout, cut));
        report.messages_checked += 1;
        report.second_link_patterns += verdict.patterns;
        report.group_checks += verdict.group_checks;
        if matches!(layout.kind(), Some(ParityKind::Grouped | ParityKind::Interleaved)) {
            report.grouped_messages += 1;
        }
        if let Some((offsets, reason)) = verdict.failure.clone() {
            let slots: Vec<usize> = (0..=p.t).filter(|o| offsets >> o & 1 == 1).map(|o| t + o).collect();
            let e2 = ErasurePattern::from_slots(Link::RelayDestination, h, &slots);
            let replay = drive(codes, &ep, &e1, &e2, h)?;
            let reproduced = replay.0.decode_slots[t].is_none();
            report.counterexample = Some(Counterexample { e1, e2, message: Some(t), reason, reproduced });
            return Ok(report);
        }
    }
    Ok(report)
}

/// Achievability over every admissible first-link pattern on the horizon. Each
/// pattern is run end to end once (with a clean or periodic second-link pattern) to
/// check values and relay invariants, then every message's layout is checked against
/// all second-link erasure sets of its window with at most `N2` erasures. A message's
/// decodability depends only on the second link inside its own window and on earlier
/// messages, so this covers the full cross product.
pub fn exhaustive_verify(params: &SchemeParams, opts: &VerifyOptions) -> Result<VerifyReport> {
    params.validate()?;
    if params.t > EXHAUSTIVE_MAX_T {
        let limit = 2 * (EXHAUSTIVE_MAX_T + 1);
        return Err(Error::HorizonTooLarge { horizon: opts.horizon.max(2 * (params.t + 1)), limit });
    }
    let masks = channel::enumerate_admissible_masks(params.t, params.n1, opts.horizon)?;
    let codes = Codebook::new(params)?;
    let parts: Vec<VerifyReport> = masks
        .par_chunks(64)
        .map(|chunk| {
            let mut memo = Memo::new();
            let mut acc = VerifyReport::empty(params, opts.horizon);
            for &m in chunk {
                acc = acc.merge(verify_first_link(&codes, opts, m, &mut memo)?);
                if !acc.passed() {
                    break;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(VerifyReport::empty(params, opts.horizon), VerifyReport::merge))
}

/// Literal cross product of both links' admissible patterns, every pair run end to end.
pub fn exhaustive_verify_literal(params: &SchemeParams, opts: &VerifyOptions) -> Result<VerifyReport> {
    params.validate()?;
    let m1 = channel::enumerate_admissible_masks(params.t, params.n1, opts.horizon)?;
    let m2 = channel::enumerate_admissible_masks(params.t, params.n2, opts.horizon)?;
    let codes = Codebook::new(params)?;
    let config = RelayConfig { header: false, mutation: opts.mutation };
    let parts: Vec<VerifyReport> = m1
        .par_iter()
        .map(|&a| {
            let e1 = ErasurePattern::from_mask(Link::SourceRelay, opts.horizon, a);
            let mut acc = VerifyReport::empty(params, opts.horizon);
            acc.first_link_patterns = 1;
            for &b in &m2 {
                let e2 = ErasurePattern::from_mask(Link::RelayDestination, opts.horizon, b);
                let r = run_episode_with(&codes, &EpisodeOptions { config, seed: opts.seed ^ a ^ b.rotate_left(29) }, &e1, &e2, opts.horizon)?;
                acc.episodes += 1;
                acc.second_link_patterns += 1;
                acc.messages_checked += opts.horizon as u64;
                acc.max_payload = acc.max_payload.max(r.max_payload);
                if !r.is_clean() {
                    let message = r.failed_messages().first().copied();
                    let reason = r.violations.first().cloned().unwrap_or_else(|| "message not decoded by its deadline".into());
                    acc.counterexample = Some(Counterexample { e1, e2, message, reason, reproduced: true });
                    break;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(VerifyReport::empty(params, opts.horizon), VerifyReport::merge))
}

/// Random admissible pattern pairs of varying density, each run end to end.
pub fn randomized_verify(params: &SchemeParams, episodes: u64, opts: &VerifyOptions) -> Result<VerifyReport> {
    params.validate()?;
    let codes = Codebook::new(params)?;
    let config = RelayConfig { header: false, mutation: opts.mutation };
    let parts: Vec<VerifyReport> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let mut rng = channel::sub_rng(opts.seed, i);
            let d1 = rng.random_range(0.2..1.0);
            let d2 = rng.random_range(0.2..1.0);
            let e1 = channel::sample_admissible(&mut rng, params.t, params.n1, opts.horizon, d1, Link::SourceRelay);
            let e2 = channel::sample_admissible(&mut rng, params.t, params.n2, opts.horizon, d2, Link::RelayDestination);
            let r = run_episode_with(&codes, &EpisodeOptions { config, seed: opts.seed ^ i.rotate_left(23) }, &e1, &e2, opts.horizon)?;
            let mut acc = VerifyReport::empty(params, opts.horizon);
            acc.first_link_patterns = 1;
            acc.second_link_patterns = 1;
            acc.episodes = 1;
            acc.messages_checked = opts.horizon as u64;
            acc.max_payload = r.max_payload;
            if !r.is_clean() {
                let message = r.failed_messages().first().copied();
                let reason = r.violations.first().cloned().unwrap_or_else(|| "message not decoded by its deadline".into());
                acc.counterexample = Some(Counterexample { e1, e2, message, reason, reproduced: true });
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(VerifyReport::empty(params, opts.horizon), VerifyReport::merge))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossMode {
    /// Closed-form loss conditions on the two patterns.
    Analytic,
    /// The full encoder, relay and decoder.
    Codec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Subset,
    /// Time-invariant baseline; evaluated analytically only.
    Nonadaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossEstimate {
    pub scheme: Scheme,
    pub mode: LossMode,
    pub params: SchemeParams,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub trials: u64,
    pub losses: u64,
    pub probability: f64,
    /// Binomial standard error of `probability`.
    pub std_error: f64,
    /// Broken invariants seen in codec mode; expected zero.
    pub anomalies: u64,
}

impl LossEstimate {
    fn new(scheme: Scheme, mode: LossMode, params: &SchemeParams, cfg: &ChannelConfig, trials: u64, losses: u64, anomalies: u64) -> Self {
        let probability = losses as f64 / trials as f64;
        let std_error = (probability * (1.0 - probability) / trials as f64).sqrt();
        Self {
            scheme,
            mode,
            params: *params,
            alpha: cfg.alpha,
            beta: cfg.beta,
            seed: cfg.seed,
            trials,
            losses,
            probability,
            std_error,
            anomalies,
        }
    }
}

/// Every source-relay diagonal through `s_t` keeps at most `N1` erasures.
fn diagonals_ok(p: &SchemeParams, e1: &ErasurePattern, t: usize) -> bool {
    let d = p.dims();
    let (kp, np) = (d.k_prime as isize, d.n_prime as isize);
    (t as isize - kp + 1..=t as isize).all(|diag| {
        let to = diag + np - 1;
        to < 0 || e1.count(diag.max(0) as usize, to as usize) <= p.n1
    })
}

/// Per-message loss under the closed-form conditions. For the subset scheme a message
/// received by the relay is lost when the second link has more than `N2` erasures in
/// `[t+j, t+T]`; an erased one uses the same window if the relay saw at most `j`
/// erasures in `[t, t+j]` and `[t+N1, t+T]` otherwise, and is also lost if a
/// diagonal through it exceeds `N1` first-link erasures. The baseline uses
/// `[t+N1, t+T]` throughout.
pub fn analytic_losses(p: &SchemeParams, scheme: Scheme, e1: &ErasurePattern, e2: &ErasurePattern, count: usize) -> Vec<bool> {
    let t_max = p.t;
    (0..count)
        .map(|t| match scheme {
            Scheme::Subset => {
                if !e1.is_erased(t) {
                    e2.count(t + p.j, t + t_max) > p.n2
                } else {
                    let start = if e1.count(t, t + p.j) <= p.j { p.j } else { p.n1 };
                    e2.count(t + start, t + t_max) > p.n2 || !diagonals_ok(p, e1, t)
                }
            }
            Scheme::Nonadaptive => {
                (e1.is_erased(t) && !diagonals_ok(p, e1, t)) || e2.count(t + p.n1, t + t_max) > p.n2
            }
        })
        .collect()
}

/// Per-message loss from a full codec run over `count` messages.
pub fn codec_losses(codes: &Codebook, e1: &ErasurePattern, e2: &ErasurePattern, count: usize, seed: u64) -> Result<(Vec<bool>, usize)> {
    let r = run_episode_with(codes, &EpisodeOptions { config: RelayConfig::default(), seed }, e1, e2, count)?;
    Ok((r.decode_slots.iter().map(Option::is_none).collect(), r.violations.len()))
}

/// Loss probability over `trials` messages of an i.i.d. channel. Trials are split
/// into blocks of [`LOSS_CHUNK`] messages, each with its own sub-seed, so the result
/// does not depend on the number of worker threads.
pub fn loss_probability(params: &SchemeParams, cfg: &ChannelConfig, mode: LossMode, scheme: Scheme, trials: u64) -> Result<LossEstimate> {
    params.validate()?;
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let mode = if scheme == Scheme::Nonadaptive { LossMode::Analytic } else { mode };
    let codes = if mode == LossMode::Codec { Some(Codebook::new(params)?) } else { None };
    let chunks = trials.div_ceil(LOSS_CHUNK as u64);
    let (losses, anomalies) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = (trials - c * LOSS_CHUNK as u64).min(LOSS_CHUNK as u64) as usize;
            let mut rng = channel::sub_rng(cfg.seed, c);
            let (e1, e2) = channel::sample_iid_with(&mut rng, cfg.alpha, cfg.beta, len + params.t);
            match &codes {
                None => Ok((analytic_losses(params, scheme, &e1, &e2, len).iter().filter(|&&x| x).count() as u64, 0)),
                Some(codes) => {
                    let (lost, bad) = codec_losses(codes, &e1, &e2, len, rng.random())?;
                    Ok((lost.iter().filter(|&&x| x).count() as u64, bad as u64))
                }
            }
        })
        .collect::<Result<Vec<(u64, u64)>>>()?
        .into_iter()
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(LossEstimate::new(scheme, mode, params, cfg, trials, losses, anomalies))
}
