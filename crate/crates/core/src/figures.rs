//! CSV data behind the rate, packet-size and loss-probability figures.
//!
//! Schemas (one header row, comma separated):
//! - figure 2: `T,N1,N2,scheme,j,rate,rate_float`
//! - figure 3: `T,N1,N2,scheme,j,field_bits,symbols,packet_bits,packet_bytes`
//! - figures 4 and 5: `T,N1,N2,scheme,j,rate_float,alpha,beta,trials,losses,loss_probability,std_error`
//!
//! Schemes are `subset_j0`, `subset_jopt`, `nonadaptive` and `fully_adaptive`; the
//! last carries published reference values only and is left empty elsewhere.

use std::fmt::Write as _;

use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::gf::ceil_log2;
use crate::params::{fully_adaptive_reference, nonadaptive_packet_bits, nonadaptive_rate, optimal_j, rate_f64, PacketRole, Rate, SchemeParams};
use crate::sim::{loss_probability, LossMode, Scheme};

pub const FIG2_HEADER: &str = "T,N1,N2,scheme,j,rate,rate_float";
pub const FIG3_HEADER: &str = "T,N1,N2,scheme,j,field_bits,symbols,packet_bits,packet_bytes";
pub const LOSS_HEADER: &str = "T,N1,N2,scheme,j,rate_float,alpha,beta,trials,losses,loss_probability,std_error";

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub t: usize,
    pub n1: usize,
    /// Swept `N2` values for figures 2 and 3.
    pub n2: Vec<usize>,
    /// Swept `alpha = beta` values for figure 4.
    pub probabilities: Vec<f64>,
    /// Rate targeted by figure 4's parameter choice.
    pub target_rate: f64,
    /// Swept `(N1, N2)` for figure 5.
    pub budgets: Vec<(usize, usize)>,
    pub alpha: f64,
    pub beta: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: LossMode,
}

impl FigureSpec {
    /// Defaults reproducing the published sweeps.
    pub fn default_for(figure: u8) -> Self {
        let loss_t = 10;
        let (t, n1) = if figure == 2 || figure == 3 { (15, 4) } else { (loss_t, 0) };
        Self {
            t,
            n1,
            n2: (1..=11).collect(),
            probabilities: (1..=10).map(|i| i as f64 * 0.01).collect(),
            target_rate: 0.36,
            budgets: (1..=loss_t / 2).flat_map(|a| (a..=loss_t - a).map(move |b| (a, b))).collect(),
            alpha: 0.05,
            beta: 0.08,
            trials: 1_000_000,
            seed: 0,
            mode: LossMode::Analytic,
        }
    }
}

pub fn emit_figure_data(figure: u8, spec: &FigureSpec) -> Result<String> {
    match figure {
        2 => Ok(rates_csv(spec)),
        3 => Ok(sizes_csv(spec)),
        4 => loss_vs_probability_csv(spec),
        5 => loss_vs_budget_csv(spec),
        _ => Err(Error::InvalidParams(format!("no data for figure {figure}; expected 2, 3, 4 or 5"))),
    }
}

fn frac(r: Rate) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rates_csv(spec: &FigureSpec) -> String {
    let mut out = format!("{FIG2_HEADER}\n");
    let (t, n1) = (spec.t, spec.n1);
    for &n2 in &spec.n2 {
        let Ok(opt) = optimal_j(t, n1, n2) else { continue };
        let j0 = SchemeParams { t, n1, n2, j: 0 }.rate(false);
        let base = nonadaptive_rate(t, n1, n2).expect("valid whenever a subset scheme is");
        let row = |out: &mut String, scheme: &str, j: String, r: Option<Rate>, f: Option<f64>| {
            let (exact, float) = match (r, f) {
                (Some(r), _) => (frac(r), format!("{:.6}", rate_f64(r))),
                (None, Some(f)) => (String::new(), format!("{f:.6}")),
                (None, None) => (String::new(), String::new()),
            };
            writeln!(out, "{t},{n1},{n2},{scheme},{j},{exact},{float}").unwrap();
        };
        row(&mut out, "subset_j0", "0".into(), Some(j0), None);
        row(&mut out, "subset_jopt", opt.j.to_string(), Some(opt.rate), None);
        row(&mut out, "nonadaptive", String::new(), Some(base), None);
        row(&mut out, "fully_adaptive", String::new(), None, fully_adaptive_reference(t, n1, n2).and_then(|r| r.rate));
    }
    out
}

fn sizes_csv(spec: &FigureSpec) -> String {
    let mut out = format!("{FIG3_HEADER}\n");
    let (t, n1) = (spec.t, spec.n1);
    for &n2 in &spec.n2 {
        let Ok(opt) = optimal_j(t, n1, n2) else { continue };
        for (scheme, j) in [("subset_j0", 0), ("subset_jopt", opt.j)] {
            let p = SchemeParams { t, n1, n2, j };
            let bits = p.packet_size_bits(PacketRole::Relay);
            writeln!(
                out,
                "{t},{n1},{n2},{scheme},{j},{},{},{bits},{}",
                ceil_log2(p.nominal_field_size()),
                p.worst_case_n2(),
                bits.div_ceil(8)
            )
            .unwrap();
        }
        let n = t + 1 - n1;
        let bits = nonadaptive_packet_bits(t, n1);
        writeln!(out, "{t},{n1},{n2},nonadaptive,,{},{n},{bits},{}", ceil_log2(n as u32).max(1), bits.div_ceil(8)).unwrap();
        match fully_adaptive_reference(t, n1, n2).and_then(|r| Some((r, r.packet_bits()?))) {
            Some((r, bits)) => {
                let symbols = r.packet_symbols.expect("packet bits imply a length");
                let q = r.field_size.unwrap_or(symbols);
                writeln!(out, "{t},{n1},{n2},fully_adaptive,,{},{symbols},{bits},{}", ceil_log2(q as u32), bits.div_ceil(8)).unwrap();
            }
            None => writeln!(out, "{t},{n1},{n2},fully_adaptive,,,,,").unwrap(),
        }
    }
    out
}

/// Subset parameters at delay `t` (with `N2 >= N1 >= 1` and the best `j`) and
/// baseline parameters whose rates lie nearest `target`. Ties go to the smaller
/// `(N1, N2)`.
pub fn nearest_rate_params(t: usize, target: f64) -> Option<(SchemeParams, SchemeParams)> {
    let mut subset: Option<(f64, SchemeParams)> = None;
    let mut base: Option<(f64, SchemeParams)> = None;
    for n1 in 1..=t {
        for n2 in n1..=t {
            let Ok(opt) = optimal_j(t, n1, n2) else { continue };
            let d = (rate_f64(opt.rate) - target).abs();
            if subset.is_none_or(|(b, _)| d < b) {
                subset = Some((d, SchemeParams { t, n1, n2, j: opt.j }));
            }
            let d = (rate_f64(nonadaptive_rate(t, n1, n2).ok()?) - target).abs();
            if base.is_none_or(|(b, _)| d < b) {
                base = Some((d, SchemeParams { t, n1, n2, j: 0 }));
            }
        }
    }
    Some((subset?.1, base?.1))
}

fn loss_row(out: &mut String, spec: &FigureSpec, p: &SchemeParams, scheme: Scheme, alpha: f64, beta: f64) -> Result<()> {
    let cfg = ChannelConfig { alpha, beta, seed: spec.seed, horizon: 0 };
    let est = loss_probability(p, &cfg, spec.mode, scheme, spec.trials)?;
    let (name, j, rate) = match scheme {
        Scheme::Subset => ("subset_jopt", p.j.to_string(), p.rate(false)),
        Scheme::Nonadaptive => ("nonadaptive", String::new(), nonadaptive_rate(p.t, p.n1, p.n2)?),
    };
    writeln!(
        out,
        "{},{},{},{name},{j},{:.6},{alpha},{beta},{},{},{:.8},{:.8}",
        p.t,
        p.n1,
        p.n2,
        rate_f64(rate),
        est.trials,
        est.losses,
        est.probability,
        est.std_error
    )
    .unwrap();
    Ok(())
}

fn loss_vs_probability_csv(spec: &FigureSpec) -> Result<String> {
    let mut out = format!("{LOSS_HEADER}\n");
    if spec.probabilities.is_empty() {
        return Ok(out);
    }
    let (subset, base) = nearest_rate_params(spec.t, spec.target_rate)
        .ok_or_else(|| Error::InvalidParams(format!("no valid parameters at T={}", spec.t)))?;
    for (p, scheme) in [(subset, Scheme::Subset), (base, Scheme::Nonadaptive)] {
        for &a in &spec.probabilities {
            loss_row(&mut out, spec, &p, scheme, a, a)?;
        }
    }
    Ok(out)
}

fn loss_vs_budget_csv(spec: &FigureSpec) -> Result<String> {
    let mut out = format!("{LOSS_HEADER}\n");
    for &(n1, n2) in &spec.budgets {
        let Ok(opt) = optimal_j(spec.t, n1, n2) else { continue };
        let p = SchemeParams { t: spec.t, n1, n2, j: opt.j };
        loss_row(&mut out, spec, &p, Scheme::Subset, spec.alpha, spec.beta)?;
        loss_row(&mut out, spec, &p, Scheme::Nonadaptive, spec.alpha, spec.beta)?;
    }
    Ok(out)
}
