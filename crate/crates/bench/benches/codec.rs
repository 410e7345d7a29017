use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use subset_relay::channel::ChannelConfig;
use subset_relay::relay::Codebook;
use subset_relay::sim::{exhaustive_verify, loss_probability, run_episode_with, EpisodeOptions, VerifyOptions};
use subset_relay::{ErasurePattern, Link, LossMode, Scheme, SchemeParams, SourceEncoder};

fn encode(c: &mut Criterion) {
    let p = SchemeParams::new(10, 3, 3, 1).unwrap();
    let k = p.dims().k_src;
    c.bench_function("source_encode_64_slots", |b| {
        b.iter(|| {
            let mut enc = SourceEncoder::new(&p).unwrap();
            for t in 0..64u16 {
                black_box(enc.encode((0..k as u16).map(|i| (i + t) % 11).collect()).unwrap());
            }
        })
    });
}

fn episode(c: &mut Criterion) {
    let p = SchemeParams::new(10, 3, 3, 1).unwrap();
    let codes = Codebook::new(&p).unwrap();
    let h = 4 * (p.t + 1);
    let e1 = ErasurePattern::from_slots(Link::SourceRelay, h, &[3, 5, 20, 21]);
    let e2 = ErasurePattern::from_slots(Link::RelayDestination, h, &[8, 9, 30]);
    let opts = EpisodeOptions::default();
    c.bench_function("episode_T10", |b| b.iter(|| black_box(run_episode_with(&codes, &opts, &e1, &e2, h).unwrap())));
}

fn exhaustive(c: &mut Criterion) {
    let p = SchemeParams::new(5, 2, 3, 0).unwrap();
    let opts = VerifyOptions::for_params(&p);
    let mut g = c.benchmark_group("exhaustive");
    g.sample_size(10);
    g.bench_function("T5_N1_2_N2_3", |b| b.iter(|| black_box(exhaustive_verify(&p, &opts).unwrap())));
    g.finish();
}

fn loss(c: &mut Criterion) {
    let p = SchemeParams::new(10, 3, 3, 1).unwrap();
    let cfg = ChannelConfig { alpha: 0.05, beta: 0.05, seed: 1, horizon: 0 };
    let mut g = c.benchmark_group("loss");
    g.sample_size(10);
    g.bench_function("analytic_100k", |b| {
        b.iter(|| black_box(loss_probability(&p, &cfg, LossMode::Analytic, Scheme::Subset, 100_000).unwrap()))
    });
    g.bench_function("codec_4k", |b| {
        b.iter(|| black_box(loss_probability(&p, &cfg, LossMode::Codec, Scheme::Subset, 4096).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, encode, episode, exhaustive, loss);
criterion_main!(benches);
