use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use subset_relay::channel::ChannelConfig;
use subset_relay::figures::{emit_figure_data, FigureSpec};
use subset_relay::mac::{build_region, emit_region_csv, region_field_size};
use subset_relay::params::{fully_adaptive_reference, nonadaptive_packet_bits, nonadaptive_rate, optimal_j, rate_f64};
use subset_relay::sim::{exhaustive_verify, loss_probability, randomized_verify, VerifyOptions, VerifyReport, EXHAUSTIVE_MAX_T};
use subset_relay::{Error, LossMode, MacParams, Mutation, PacketRole, Rate, Scheme, SchemeParams};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;

/// Subset-adaptive streaming codes for a source-relay-destination network.
#[derive(Parser, Debug)]
#[command(name = "subset-relay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rates of the subset scheme and the nonadaptive baseline.
    Rates(RatesArgs),
    /// Field sizes, packet lengths and packet sizes in bits.
    Sizes(RatesArgs),
    /// Check achievability over all admissible erasure patterns, or random ones.
    Verify(VerifyArgs),
    /// Monte-Carlo loss probability on i.i.d. erasure channels (CSV).
    Simulate(SimulateArgs),
    /// Two-user multi-access rate region (CSV).
    Mac(MacArgs),
    /// Data behind the rate, size and loss figures (CSV).
    FigureData(FigureArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct SchemeArgs {
    /// Delay budget T.
    #[arg(long = "T", visible_alias = "t")]
    t: usize,
    /// Erasure budget N1 of the source-relay link.
    #[arg(long = "N1", visible_alias = "n1")]
    n1: usize,
    /// Erasure budget N2 of the relay-destination link.
    #[arg(long = "N2", visible_alias = "n2")]
    n2: usize,
    /// Adaptation threshold j in [0, N1-1]; the rate-optimal j when omitted.
    #[arg(long)]
    j: Option<usize>,
}

impl SchemeArgs {
    fn params(&self) -> Result<SchemeParams, Error> {
        let j = match self.j {
            Some(j) => j,
            None => optimal_j(self.t, self.n1, self.n2)?.j,
        };
        SchemeParams::new(self.t, self.n1, self.n2, j)
    }
}

#[derive(Args, Debug)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                    _ => Ok(()),
                }
            }
        }
    }
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Emit one CSV row instead of a table.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Slots per pattern; defaults to 2(T+1).
    #[arg(long)]
    horizon: Option<usize>,
    /// Run this many random admissible pattern pairs instead of the exhaustive check.
    #[arg(long)]
    randomized: Option<u64>,
    /// Deliberately break the parity grouping; verification should then fail.
    #[arg(long)]
    mutate_grouping: bool,
    /// Seed for message contents and random patterns.
    #[arg(long, env = "SUBSET_RELAY_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Analytic,
    Codec,
}

impl From<ModeArg> for LossMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Analytic => LossMode::Analytic,
            ModeArg::Codec => LossMode::Codec,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Subset,
    Nonadaptive,
    Both,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// First-link erasure probabilities; a comma-separated list gives a sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// Second-link erasure probabilities, paired with --alpha; defaults to --alpha.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// Messages simulated per point.
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, env = "SUBSET_RELAY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    mode: ModeArg,
    #[arg(long = "schemes", value_enum, default_value_t = SchemeArg::Both)]
    which: SchemeArg,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct MacArgs {
    #[arg(long = "T", visible_alias = "t")]
    t: usize,
    /// Erasure budget of user 1's link to the relay.
    #[arg(long = "N1", visible_alias = "n1")]
    n1: usize,
    /// Erasure budget of user 2's link to the relay.
    #[arg(long = "N2", visible_alias = "n2")]
    n2: usize,
    /// Erasure budget of the relay-destination link.
    #[arg(long = "N3", visible_alias = "n3")]
    n3: usize,
    /// User 1's threshold; rate-optimal when omitted.
    #[arg(long)]
    j1: Option<usize>,
    /// User 2's threshold; rate-optimal when omitted.
    #[arg(long)]
    j2: Option<usize>,
    /// Largest number of copies of either user's code in one time-sharing mix.
    #[arg(long, default_value_t = subset_relay::mac::DEFAULT_MIX_BOUND)]
    mix_bound: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// Figure number: 2 (rates), 3 (packet sizes), 4 (loss vs erasure probability), 5 (loss vs budgets).
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=5))]
    figure: u8,
    /// Delay budget; 15 for figures 2-3 and 10 for 4-5 by default.
    #[arg(long = "T", visible_alias = "t")]
    t: Option<usize>,
    /// N1 for figures 2-3.
    #[arg(long = "N1", visible_alias = "n1")]
    n1: Option<usize>,
    /// N2 values for figures 2-3, e.g. `1,2,3`; an empty list gives a header-only CSV.
    #[arg(long = "N2", visible_alias = "n2", value_delimiter = ',', num_args = 0..)]
    n2: Option<Vec<usize>>,
    /// alpha = beta values for figure 4.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    probabilities: Option<Vec<f64>>,
    /// Target rate for figure 4's parameter choice.
    #[arg(long)]
    target_rate: Option<f64>,
    /// (N1, N2) pairs for figure 5 as `N1:N2`, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0.., value_parser = parse_budget)]
    budgets: Option<Vec<(usize, usize)>>,
    /// Figure 5 first-link erasure probability.
    #[arg(long)]
    alpha: Option<f64>,
    /// Figure 5 second-link erasure probability.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, env = "SUBSET_RELAY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    mode: ModeArg,
    #[command(flatten)]
    out: Output,
}

fn parse_budget(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected N1:N2, got `{s}`"))?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

/// Exact fraction plus a 4-decimal float.
fn show(r: Rate) -> String {
    format!("{r} ({:.4})", rate_f64(r))
}

fn rates(a: &RatesArgs) -> Result<String> {
    let p = a.scheme.params()?;
    let opt = optimal_j(p.t, p.n1, p.n2)?;
    let base = nonadaptive_rate(p.t, p.n1, p.n2)?;
    let mut s = String::new();
    if a.csv {
        s.push_str("T,N1,N2,j,R1,R2,R2_header,R,R_header,nonadaptive,optimal_j,optimal_rate,q_nominal,q_implemented,relay_bits,nonadaptive_bits\n");
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.t,
            p.n1,
            p.n2,
            p.j,
            p.rate_r1(),
            p.rate_r2(false),
            p.rate_r2(true),
            p.rate(false),
            p.rate(true),
            base,
            opt.j,
            opt.rate,
            p.nominal_field_size(),
            p.implemented_field_size(),
            p.packet_size_bits(PacketRole::Relay),
            p.packet_size_bits(PacketRole::NonadaptiveBaseline)
        )?;
        return Ok(s);
    }
    writeln!(s, "T={} N1={} N2={} j={}", p.t, p.n1, p.n2, p.j)?;
    writeln!(s, "R1                     {}", show(p.rate_r1()))?;
    writeln!(s, "R2                     {}", show(p.rate_r2(false)))?;
    writeln!(s, "R2 with header         {}", show(p.rate_r2(true)))?;
    writeln!(s, "R = min(R1, R2)        {}", show(p.rate(false)))?;
    writeln!(s, "R with header          {}", show(p.rate(true)))?;
    writeln!(s, "nonadaptive baseline   {}", show(base))?;
    writeln!(s, "optimal j              {} (R = {})", opt.j, show(opt.rate))?;
    writeln!(s, "field size             nominal {}, implemented {}", p.nominal_field_size(), p.implemented_field_size())?;
    writeln!(
        s,
        "packet bits            source {}, relay {}, nonadaptive {}",
        p.packet_size_bits(PacketRole::Source),
        p.packet_size_bits(PacketRole::Relay),
        p.packet_size_bits(PacketRole::NonadaptiveBaseline)
    )?;
    if let Some(r) = fully_adaptive_reference(p.t, p.n1, p.n2).and_then(|r| r.rate) {
        writeln!(s, "fully adaptive (ref.)  {r:.2}")?;
    }
    Ok(s)
}

fn sizes(a: &RatesArgs) -> Result<String> {
    let p = a.scheme.params()?;
    let d = p.dims();
    let field_bits = 32 - (p.nominal_field_size() - 1).leading_zeros();
    let relay = p.packet_size_bits(PacketRole::Relay);
    let base = nonadaptive_packet_bits(p.t, p.n1);
    let reference = fully_adaptive_reference(p.t, p.n1, p.n2).and_then(|r| r.packet_bits());
    let mut s = String::new();
    if a.csv {
        s.push_str("T,N1,N2,j,q_nominal,q_implemented,field_bits,source_symbols,relay_symbols,header_symbols,relay_bits,relay_bytes,nonadaptive_bits,nonadaptive_bytes,fully_adaptive_bits\n");
        writeln!(
            s,
            "{},{},{},{},{},{},{field_bits},{},{},{},{relay},{},{base},{},{}",
            p.t,
            p.n1,
            p.n2,
            p.j,
            p.nominal_field_size(),
            p.implemented_field_size(),
            d.n1,
            d.n2_star,
            d.delta,
            relay.div_ceil(8),
            base.div_ceil(8),
            reference.map(|b| b.to_string()).unwrap_or_default()
        )?;
        return Ok(s);
    }
    writeln!(s, "T={} N1={} N2={} j={}", p.t, p.n1, p.n2, p.j)?;
    writeln!(s, "field size             nominal {} ({field_bits} bits), implemented {}", p.nominal_field_size(), p.implemented_field_size())?;
    writeln!(s, "source packet          {} symbols", d.n1)?;
    writeln!(s, "relay packet (worst)   {} symbols, {relay} bits ({} bytes)", d.n2_star, relay.div_ceil(8))?;
    writeln!(s, "header                 {} symbols", d.delta)?;
    writeln!(s, "nonadaptive packet     {} symbols, {base} bits ({} bytes)", p.t + 1 - p.n1, base.div_ceil(8))?;
    if let Some(bits) = reference {
        writeln!(s, "fully adaptive (ref.)  {bits} bits ({} bytes)", bits.div_ceil(8))?;
    }
    Ok(s)
}

fn report(r: &VerifyReport) -> String {
    let mut s = String::new();
    let p = r.params;
    let _ = writeln!(s, "T={} N1={} N2={} j={} horizon={}", p.t, p.n1, p.n2, p.j, r.horizon);
    let _ = writeln!(
        s,
        "first-link patterns {}, episodes {}, messages {}, second-link patterns {}, grouped messages {}, group checks {}",
        r.first_link_patterns, r.episodes, r.messages_checked, r.second_link_patterns, r.grouped_messages, r.group_checks
    );
    let _ = writeln!(s, "max payload {} (bound {})", r.max_payload, p.dims().n2_star);
    match &r.counterexample {
        None => s.push_str("PASS\n"),
        Some(c) => {
            let _ = writeln!(s, "FAIL: {}", c.reason);
            let _ = writeln!(s, "  e1 {}", c.e1);
            let _ = writeln!(s, "  e2 {}", c.e2);
            if let Some(t) = c.message {
                let _ = writeln!(s, "  message {t}, reproduced end to end: {}", c.reproduced);
            }
        }
    }
    s
}

fn verify(a: &VerifyArgs) -> Result<(String, bool)> {
    let p = a.scheme.params()?;
    let mut opts = VerifyOptions::for_params(&p);
    opts.seed = a.seed;
    if let Some(h) = a.horizon {
        opts.horizon = h;
    }
    if a.mutate_grouping {
        opts.mutation = Mutation::InterleavedGroups;
    }
    let r = match a.randomized {
        Some(n) => randomized_verify(&p, n, &opts)?,
        None => exhaustive_verify(&p, &opts).map_err(|e| match e {
            Error::HorizonTooLarge { .. } => anyhow::anyhow!(
                "{e}; exhaustive verification supports T <= {EXHAUSTIVE_MAX_T}, use --randomized N for larger T"
            ),
            e => e.into(),
        })?,
    };
    Ok((report(&r), r.passed()))
}

fn simulate(a: &SimulateArgs) -> Result<String> {
    let p = a.scheme.params()?;
    let betas = if a.beta.is_empty() { a.alpha.clone() } else { a.beta.clone() };
    anyhow::ensure!(betas.len() == a.alpha.len(), "--beta needs as many values as --alpha");
    let schemes: &[Scheme] = match a.which {
        SchemeArg::Subset => &[Scheme::Subset],
        SchemeArg::Nonadaptive => &[Scheme::Nonadaptive],
        SchemeArg::Both => &[Scheme::Subset, Scheme::Nonadaptive],
    };
    let mut s = String::from("T,N1,N2,scheme,j,mode,alpha,beta,seed,trials,losses,loss_probability,std_error\n");
    for (&alpha, &beta) in a.alpha.iter().zip(&betas) {
        for &scheme in schemes {
            let cfg = ChannelConfig { alpha, beta, seed: a.seed, horizon: 0 };
            let e = loss_probability(&p, &cfg, a.mode.into(), scheme, a.trials)?;
            let (name, j) = match scheme {
                Scheme::Subset => ("subset", p.j.to_string()),
                Scheme::Nonadaptive => ("nonadaptive", String::new()),
            };
            let mode = match e.mode {
                LossMode::Analytic => "analytic",
                LossMode::Codec => "codec",
            };
            writeln!(
                s,
                "{},{},{},{name},{j},{mode},{alpha},{beta},{},{},{},{:.8},{:.8}",
                p.t, p.n1, p.n2, a.seed, e.trials, e.losses, e.probability, e.std_error
            )?;
            if e.anomalies > 0 {
                eprintln!("warning: {} invariant violations in codec mode at alpha={alpha} beta={beta}", e.anomalies);
            }
        }
    }
    Ok(s)
}

fn mac(a: &MacArgs) -> Result<String> {
    let j = |n: usize, j: Option<usize>| -> Result<usize, Error> {
        match j {
            Some(j) => Ok(j),
            None => Ok(optimal_j(a.t, n, a.n3)?.j),
        }
    };
    let m = MacParams { t: a.t, n1: a.n1, n2: a.n2, n3: a.n3, j1: j(a.n1, a.j1)?, j2: j(a.n2, a.j2)? };
    anyhow::ensure!(a.mix_bound >= 1, "--mix-bound must be at least 1");
    let region = build_region(&m, a.mix_bound)?;
    let (nominal, implemented) = region_field_size(&m)?;
    eprintln!(
        "{} points, {} on the frontier; user bounds {} and {}; sum-rate bound {}; field {nominal} (implemented {implemented})",
        region.points.len(),
        region.frontier().count(),
        show(region.user_bounds[0]),
        show(region.user_bounds[1]),
        show(region.sumrate_bound)
    );
    Ok(emit_region_csv(&m, a.mix_bound)?)
}

fn figure(a: &FigureArgs) -> Result<String> {
    let mut spec = FigureSpec::default_for(a.figure);
    if let Some(t) = a.t {
        spec.t = t;
    }
    if let Some(n1) = a.n1 {
        spec.n1 = n1;
    }
    if let Some(n2) = &a.n2 {
        spec.n2 = n2.clone();
    }
    if let Some(p) = &a.probabilities {
        spec.probabilities = p.clone();
    }
    if let Some(r) = a.target_rate {
        spec.target_rate = r;
    }
    if let Some(b) = &a.budgets {
        spec.budgets = b.clone();
    }
    if let Some(x) = a.alpha {
        spec.alpha = x;
    }
    if let Some(x) = a.beta {
        spec.beta = x;
    }
    spec.trials = a.trials;
    spec.seed = a.seed;
    spec.mode = a.mode.into();
    Ok(emit_figure_data(a.figure, &spec)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Rates(a) => a.out.emit(&rates(&a)?)?,
        Command::Sizes(a) => a.out.emit(&sizes(&a)?)?,
        Command::Verify(a) => {
            let (text, passed) = verify(&a)?;
            print!("{text}");
            if !passed {
                return Ok(ExitCode::from(EXIT_VERIFY));
            }
        }
        Command::Simulate(a) => a.out.emit(&simulate(&a)?)?,
        Command::Mac(a) => a.out.emit(&mac(&a)?)?,
        Command::FigureData(a) => a.out.emit(&figure(&a)?)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
