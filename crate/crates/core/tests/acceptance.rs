//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use subset_relay::channel::ChannelConfig;
use subset_relay::figures::{emit_figure_data, nearest_rate_params, FigureSpec};
use subset_relay::gf::is_prime_power;
use subset_relay::mac::{build_region, emit_region_csv, pp_capacity, DEFAULT_MIX_BOUND};
use subset_relay::params::{nonadaptive_rate, optimal_j};
use subset_relay::relay::{compute_schedule, Codebook};
use subset_relay::sim::{exhaustive_verify, loss_probability, VerifyOptions, VerifyReport};
use subset_relay::{
    ErasurePattern, GaloisField, Link, LossMode, MacParams, MdsCode, PacketRole, Rate, Scheme, SchemeParams, Symbol,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn params(t: usize, n1: usize, n2: usize, j: usize) -> SchemeParams {
    SchemeParams::new(t, n1, n2, j).unwrap()
}

fn all_params(max_t: usize) -> Vec<SchemeParams> {
    let mut out = Vec::new();
    for t in 1..=max_t {
        for n1 in 1..=t {
            for n2 in 0..=t - n1 {
                for j in 0..n1 {
                    out.extend(SchemeParams::new(t, n1, n2, j));
                }
            }
        }
    }
    out
}

fn rates() -> Outcome {
    let a = params(5, 2, 3, 0).rate_r2(false);
    let b = params(6, 2, 3, 1).rate_r2(false);
    let na = nonadaptive_rate(5, 2, 3).unwrap();
    let nb = nonadaptive_rate(6, 2, 3).unwrap();
    let pass = a == Rate::new(3, 10) && b == Rate::new(6, 13) && na == Rate::new(1, 4) && nb == Rate::new(2, 5);
    outcome(pass, format!("R2 = {a}, {b}; nonadaptive = {na}, {nb}"))
}

fn packet_sizes() -> Outcome {
    let p = params(15, 4, 6, 0);
    let relay = p.packet_size_bits(PacketRole::Relay);
    let base = p.packet_size_bits(PacketRole::NonadaptiveBaseline);
    outcome(relay == 448 && base == 48, format!("relay {relay} bits ({} bytes), nonadaptive {base} bits ({} bytes)", relay / 8, base / 8))
}

fn worst_case_payload(sweep: &[(SchemeParams, VerifyReport)]) -> Outcome {
    let p = params(5, 2, 3, 0);
    let r = &sweep.iter().find(|(q, _)| *q == p).expect("swept").1;
    let n2 = p.dims().n2_star;
    outcome(n2 == 10 && r.max_payload == 10 && r.passed(), format!("n2* = {n2}, exhaustive max payload = {}", r.max_payload))
}

fn schedules() -> Outcome {
    let table2 = compute_schedule(&params(5, 2, 3, 0), &ErasurePattern::from_slots(Link::SourceRelay, 12, &[1, 2]), 1).unwrap();
    let table4 = compute_schedule(&params(6, 2, 3, 1), &ErasurePattern::from_slots(Link::SourceRelay, 14, &[4, 6]), 4).unwrap();
    let a = &table2.alpha[1..=2];
    let b = &table4.alpha[1..=3];
    outcome(a == [0, 3] && b == [2, 1, 3], format!("s_1 at slots 2,3: {a:?}; s_4 at slots 5,6,7: {b:?}"))
}

fn achievability(sweep: &[(SchemeParams, VerifyReport)], secs: f64) -> Outcome {
    let failed: Vec<_> = sweep.iter().filter(|(_, r)| !r.passed()).collect();
    let patterns: u64 = sweep.iter().map(|(_, r)| r.first_link_patterns).sum();
    let pairs: u64 = sweep.iter().map(|(_, r)| r.second_link_patterns).sum();
    let mut detail = format!(
        "{} parameter sets, {patterns} first-link patterns, {pairs} per-message second-link patterns, {secs:.0} s",
        sweep.len()
    );
    if let Some((p, r)) = failed.first() {
        detail = format!("{p:?} failed: {:?}", r.counterexample);
    }
    outcome(failed.is_empty(), detail)
}

fn proposition_two(sweep: &[(SchemeParams, VerifyReport)]) -> Outcome {
    let grouped: u64 = sweep.iter().map(|(_, r)| r.grouped_messages).sum();
    let checks: u64 = sweep.iter().map(|(_, r)| r.group_checks).sum();
    let violations = sweep.iter().filter(|(_, r)| r.counterexample.as_ref().is_some_and(|c| c.reason.contains("group"))).count();
    outcome(violations == 0 && checks > 0 && sweep.iter().all(|(_, r)| r.passed()), format!("{grouped} grouped messages, {checks} group checks, {violations} violations"))
}

fn mds_layer() -> Outcome {
    let mut codes = BTreeSet::new();
    for p in all_params(7) {
        let c = Codebook::new(&p).unwrap();
        for code in [&c.source, &c.layered, &c.grouped] {
            codes.insert((c.field.order(), code.n(), code.k()));
        }
    }
    let mut sets = 0u64;
    let mut bad = Vec::new();
    for &(q, n, k) in &codes {
        let f = Arc::new(GaloisField::new(q).unwrap());
        let code = MdsCode::new(f, n, k).unwrap();
        let msg: Vec<Symbol> = (0..k).map(|i| ((3 * i + 1) % q as usize) as Symbol).collect();
        let word = code.encode(&msg).unwrap();
        for keep in 0u32..1 << n {
            if keep.count_ones() as usize != k {
                continue;
            }
            sets += 1;
            let rx: Vec<(usize, Symbol)> = (0..n).filter(|i| keep >> i & 1 == 1).map(|i| (i, word[i])).collect();
            if code.decode(&rx).ok().as_deref() != Some(&msg[..]) {
                bad.push((q, n, k, keep));
            }
        }
    }
    let fields: Vec<u32> = (2..=64).filter(|&q| is_prime_power(q)).collect();
    let axioms = fields.iter().all(|&q| GaloisField::new(q).unwrap().verify_axioms().is_ok());
    outcome(
        bad.is_empty() && axioms,
        format!("{} codes, {sets} erasure sets, {} failures; axioms hold for {} fields up to 64: {axioms}", codes.len(), bad.len(), fields.len()),
    )
}

fn cross_validation() -> Outcome {
    let p = params(5, 2, 3, 0);
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [0.02, 0.05, 0.1] {
        let cfg = ChannelConfig { alpha: a, beta: a, seed: 2024, horizon: 0 };
        let x = loss_probability(&p, &cfg, LossMode::Analytic, Scheme::Subset, 100_000).unwrap();
        let y = loss_probability(&p, &cfg, LossMode::Codec, Scheme::Subset, 100_000).unwrap();
        let se = (x.std_error.powi(2) + y.std_error.powi(2)).sqrt();
        let diff = y.probability - x.probability;
        pass &= diff.abs() <= 3.0 * se && y.anomalies == 0;
        parts.push(format!("a={a}: analytic {:.5} codec {:.5} bias {diff:+.5}", x.probability, y.probability));
    }
    outcome(pass, parts.join("; "))
}

fn loss_properties() -> Outcome {
    const TRIALS: u64 = 1_000_000;
    let (subset, base) = nearest_rate_params(10, 0.36).unwrap();
    let mut monotone = true;
    for (p, scheme) in [(subset, Scheme::Subset), (base, Scheme::Nonadaptive)] {
        let mut last = 0.0;
        for i in 1..=10 {
            let a = i as f64 * 0.01;
            let cfg = ChannelConfig { alpha: a, beta: a, seed: 4, horizon: 0 };
            let e = loss_probability(&p, &cfg, LossMode::Analytic, scheme, TRIALS).unwrap();
            monotone &= e.probability >= last;
            last = e.probability;
        }
    }
    // low-rate end of the (N1, N2) sweep at alpha = 0.05, beta = 0.08
    let mut subset_pts = Vec::new();
    let mut base_pts = Vec::new();
    for n1 in 1..=5 {
        for n2 in n1..=10 - n1 {
            let opt = optimal_j(10, n1, n2).unwrap();
            let p = params(10, n1, n2, opt.j);
            let cfg = ChannelConfig { alpha: 0.05, beta: 0.08, seed: 4, horizon: 0 };
            let s = loss_probability(&p, &cfg, LossMode::Analytic, Scheme::Subset, TRIALS).unwrap();
            let b = loss_probability(&p, &cfg, LossMode::Analytic, Scheme::Nonadaptive, TRIALS).unwrap();
            subset_pts.push((opt.rate, s.probability));
            base_pts.push((nonadaptive_rate(10, n1, n2).unwrap(), b.probability));
        }
    }
    let (r0, l0) = *base_pts.iter().min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))).unwrap();
    let best = subset_pts.iter().filter(|(r, _)| *r >= r0).map(|&(_, l)| l).fold(f64::INFINITY, f64::min);
    outcome(
        monotone && best <= l0,
        format!(
            "monotone in alpha=beta for {subset:?} and {base:?}: {monotone}; lowest nonadaptive rate {r0} loses {l0:.2e}, best subset point at rate >= {r0} loses {best:.2e}"
        ),
    )
}

fn mac_region() -> Outcome {
    let mac = MacParams { t: 7, n1: 3, n2: 2, n3: 4, j1: 2, j2: 1 };
    let r = build_region(&mac, DEFAULT_MIX_BOUND).unwrap();
    let corners = r.contains(Rate::new(1, 4), Rate::from_integer(0)) && r.contains(Rate::from_integer(0), Rate::new(2, 5));
    let bounds = [pp_capacity(7 - 4, 3).unwrap(), pp_capacity(7 - 4, 2).unwrap()];
    let within = r.points.iter().all(|p| p.r1 <= bounds[0] && p.r2 <= bounds[1]);
    let sum = pp_capacity(7 - 2, 4).unwrap();
    let above = r.frontier().filter(|p| p.r1 + p.r2 > sum).count();
    outcome(
        corners && within && sum == Rate::new(1, 3) && above > 0,
        format!("corners present: {corners}; within ({}, {}): {within}; {above} frontier points above sum rate {sum}", bounds[0], bounds[1]),
    )
}

fn determinism() -> Outcome {
    let mut same = true;
    for fig in 2..=5u8 {
        let spec = FigureSpec { trials: 20_000, seed: 11, ..FigureSpec::default_for(fig) };
        same &= emit_figure_data(fig, &spec).unwrap() == emit_figure_data(fig, &spec).unwrap();
    }
    let spec = FigureSpec { trials: 4_000, seed: 11, mode: LossMode::Codec, budgets: vec![(2, 3), (3, 4)], ..FigureSpec::default_for(5) };
    same &= emit_figure_data(5, &spec).unwrap() == emit_figure_data(5, &spec).unwrap();
    let mac = MacParams { t: 7, n1: 3, n2: 2, n3: 4, j1: 2, j2: 1 };
    same &= emit_region_csv(&mac, 16).unwrap() == emit_region_csv(&mac, 16).unwrap();
    outcome(same, "figure 2-5 and region CSVs byte-identical across repeated runs")
}

fn main() {
    let start = Instant::now();
    let sweep: Vec<(SchemeParams, VerifyReport)> = all_params(7)
        .into_iter()
        .map(|p| {
            let r = exhaustive_verify(&p, &VerifyOptions::for_params(&p)).unwrap();
            (p, r)
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();

    let results = [
        ("rate conformance", rates()),
        ("packet-size conformance", packet_sizes()),
        ("worst-case payload", worst_case_payload(&sweep)),
        ("schedule conformance", schedules()),
        ("exhaustive achievability", achievability(&sweep, secs)),
        ("grouped parity erasure property", proposition_two(&sweep)),
        ("MDS and field layer", mds_layer()),
        ("loss cross-validation", cross_validation()),
        ("loss monotonicity and low-rate ordering", loss_properties()),
        ("multi-access rate region", mac_region()),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        failed += !o.pass as usize;
    }
    println!("{} of {} criteria passed in {:.0} s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
