//! Command-line front end.
//!
//! Reports are `key=value` lines; region boundaries go to CSV files.
//! Exit codes: 0 on success, 1 when an oracle check fails, 2 on bad input.

pub mod spec;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channel::{injectivity, tuples, CostSpec, SenderCost, StateChannel, INJECTIVITY_TOL};
use crate::codec::{
    build_code, code_errors_exact, dia_build, dia_errors, dia_missed_exact, duplicate_converse_demo,
    mac_errors_exact, mac_errors_monte_carlo, monte_carlo_errors, state_word, DecisionParams, DiCode, MacCode,
};
use crate::error::{Error, Result};
use crate::oracle::{run_suite, Suite};
use crate::regions::{export_region, rl_region, ru_region, transmission_region, write_csv, RateRegion};
use crate::types::{type_class_size, TypeVector};

pub use spec::{parse_counts, parse_pmf, parse_spec, parse_type, parse_word, Builtin, ChannelSpec};

const BUILD_ATTEMPTS: usize = 32;

#[derive(Debug, Parser)]
#[command(name = "dimac", version, about = "Deterministic identification over multiple-access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Injectivity of the fixed-state and averaged partial channels.
    Analyze(AnalyzeArgs),
    /// Rate-region bounds and boundary export.
    Region(RegionArgs),
    /// Build DI codes and evaluate their errors.
    Simulate(SimulateArgs),
    /// Brute-force cross-checks of the optimizers and simulators.
    Oracle(OracleArgs),
    /// Print a channel as a spec file.
    Spec(SpecArgs),
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Channel spec file.
    #[arg(long, value_name = "PATH", conflicts_with = "builtin")]
    spec: Option<PathBuf>,
    /// Builtin channel: mod3_adder, mod2_adder or multiplier.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Noise parameter of a builtin channel.
    #[arg(long, requires = "builtin")]
    q: Option<f64>,
    /// Cost cap `SENDER=VALUE`; senders without a cost function get the
    /// weight `phi(x) = x`.
    #[arg(long, value_name = "SENDER=VALUE")]
    cap: Vec<String>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Sender to analyze, counted from 1. All senders by default.
    #[arg(long)]
    sender: Option<usize>,
    /// Fixed letters of the other senders, e.g. `0`.
    #[arg(long, value_name = "LETTERS")]
    fixed: Option<String>,
    /// Mixture over the other senders' input tuples, e.g. `0.5,0.5`.
    #[arg(long, value_name = "PMF")]
    mixture: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegionKind {
    DiLower,
    DiUpper,
    Transmission,
}

#[derive(Debug, Args)]
struct RegionArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum)]
    kind: RegionKind,
    /// Input-law grid resolution.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Boundary CSV output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Pieces per boundary edge in the CSV.
    #[arg(long, default_value_t = 1)]
    subdivide: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Sender whose code is simulated, counted from 1.
    #[arg(long, default_value_t = 1)]
    sender: usize,
    /// Both senders of a two-sender MAC code at once.
    #[arg(long, conflicts_with_all = ["dia", "duplicate_demo"])]
    joint: bool,
    /// Blocklengths, e.g. `6,8,10,12`.
    #[arg(long, value_name = "N", default_value = "8")]
    n: String,
    /// Code rate in bits per letter.
    #[arg(long, conflicts_with = "messages")]
    rate: Option<f64>,
    /// Number of messages.
    #[arg(long)]
    messages: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exact enumeration of output words (the default).
    #[arg(long, conflicts_with = "monte_carlo")]
    exact: bool,
    /// Monte Carlo estimation.
    #[arg(long)]
    monte_carlo: bool,
    /// Codeword type as letter counts; balanced by default.
    #[arg(long, value_name = "COUNTS")]
    input_type: Option<String>,
    /// State type over the other senders' tuples; by default they idle.
    #[arg(long, value_name = "COUNTS")]
    state_type: Option<String>,
    /// Draw the state word uniformly from its type class.
    #[arg(long)]
    random_state: bool,
    /// Repeat a codeword and print the converse identity.
    #[arg(long, conflicts_with = "dia")]
    duplicate_demo: bool,
    /// Time-division code for the average error criterion.
    #[arg(long)]
    dia: bool,
    /// Messages per sender of the time-division code; `n * 2^(n/K)` by
    /// default.
    #[arg(long, requires = "dia")]
    m_big: Option<u64>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[command(flatten)]
    channel: ChannelArgs,
}

enum Failure {
    Input(Error),
    Check,
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Region(a) => region(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Spec(a) => emit_spec(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Input(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn load_channel(args: &ChannelArgs) -> Result<ChannelSpec> {
    let mut spec = match (&args.spec, &args.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
            parse_spec(&text).map_err(|e| match e {
                Error::Spec(m) => Error::Spec(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        (None, Some(name)) => ChannelSpec::from_builtin(Builtin::parse(name)?, args.q)?,
        (None, None) => return Err(Error::Spec("one of --spec or --builtin is required".into())),
    };
    for entry in &args.cap {
        let (k, v) = entry
            .split_once('=')
            .ok_or_else(|| Error::Spec(format!("--cap `{entry}`: expected SENDER=VALUE")))?;
        let k = sender_index(
            k.trim().parse().map_err(|_| Error::Spec(format!("--cap `{entry}`: bad sender")))?,
            spec.mac.k(),
        )?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Spec(format!("--cap `{entry}`: bad value")))?;
        let current = spec.costs.sender(k);
        let size = spec.mac.in_sizes()[k];
        let updated = if current.phi.iter().all(|&c| c == 0.0) {
            SenderCost::new(SenderCost::hamming(size, None).phi, Some(v))?
        } else {
            SenderCost::new(current.phi.clone(), Some(v))?
        };
        let mut senders = spec.costs.senders.clone();
        senders[k] = updated;
        spec.costs = CostSpec::new(&spec.mac, senders)?;
    }
    Ok(spec)
}

fn sender_index(one_based: usize, k: usize) -> Result<usize> {
    if one_based == 0 || one_based > k {
        return Err(Error::OutOfRange(format!("sender {one_based} for a {k}-sender MAC (senders count from 1)")));
    }
    Ok(one_based - 1)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(",")
}

fn fmt_usizes(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Type with counts as equal as possible, remainder on the first letters.
fn balanced_type(n: usize, a: usize) -> Result<TypeVector> {
    TypeVector::new((0..a).map(|i| n / a + usize::from(i < n % a)).collect())
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_channel(&args.channel)?;
    let w = &spec.mac;
    let senders: Vec<usize> = match args.sender {
        Some(s) => vec![sender_index(s, w.k())?],
        None => (0..w.k()).collect(),
    };
    writeln!(out, "channel={} senders={}", spec.name, w.k())?;
    for k in senders {
        let sizes = w.other_sizes(k);
        let fixed: Vec<Vec<usize>> = match &args.fixed {
            Some(s) => vec![parse_counts(s)?],
            None if args.mixture.is_some() => Vec::new(),
            None => tuples(&sizes).collect(),
        };
        for others in fixed {
            let dmc = w.partial_channel(k, &others)?;
            let r = injectivity(&dmc, INJECTIVITY_TOL)?;
            write!(
                out,
                "sender={} view=fixed others={} injective={} min_row_distance={:.6}",
                k + 1,
                fmt_usizes(&others),
                r.injective,
                r.min_row_distance
            )?;
            if let Some((a, b, _)) = r.witness {
                write!(out, " witness={a},{b}")?;
            }
            writeln!(out)?;
        }
        let mixture = match &args.mixture {
            Some(s) => Some(parse_pmf(s)?),
            None if args.fixed.is_none() => {
                Some(crate::prob::Pmf::uniform(sizes.iter().product()).map_err(Failure::Input)?)
            }
            None => None,
        };
        if let Some(p) = mixture {
            let dmc = w.averaged_partial_channel(k, &p)?;
            let r = injectivity(&dmc, INJECTIVITY_TOL)?;
            write!(
                out,
                "sender={} view=mixture p_others={} injective={} min_row_distance={:.6}",
                k + 1,
                fmt_list(p.probs()),
                r.injective,
                r.min_row_distance
            )?;
            if let Some((a, b, _)) = r.witness {
                write!(out, " witness={a},{b}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

fn region(args: RegionArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_channel(&args.channel)?;
    let grid = args.grid;
    let (name, r): (&str, RateRegion) = match args.kind {
        RegionKind::DiUpper => ("di-upper", ru_region(&spec.mac, &spec.costs)?),
        RegionKind::DiLower => ("di-lower", rl_region(&spec.mac, &spec.costs, grid)?),
        RegionKind::Transmission => ("transmission", transmission_region(&spec.mac, &spec.costs, grid)?),
    };
    writeln!(out, "kind={name} channel={} grid={grid}", spec.name)?;
    writeln!(out, "empty={}", r.is_empty())?;
    writeln!(out, "axis_bounds={}", fmt_list(r.axis_bounds()))?;
    writeln!(out, "max_sum_rate={:.6}", r.max_sum_rate())?;
    let corners: Vec<String> = match r.corners() {
        Some(c) => c.iter().map(|v| format!("({})", fmt_list(v))).collect(),
        None => r.boundary().iter().map(|p| format!("({})", fmt_list(p))).collect(),
    };
    writeln!(out, "corners={}", corners.join(";"))?;
    if let Some(path) = &args.out {
        let points = export_region(&r, args.subdivide)?;
        let mut buf = Vec::new();
        write_csv(&points, &mut buf)?;
        fs::write(path, buf)?;
        writeln!(out, "csv={} points={}", path.display(), points.len())?;
    }
    Ok(())
}

fn message_count(n: usize, rate: Option<f64>, messages: Option<usize>) -> Result<usize> {
    match (messages, rate) {
        (Some(m), _) => Ok(m),
        (None, r) => {
            let r = r.unwrap_or(0.5);
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::OutOfRange(format!("rate {r} must be non-negative")));
            }
            let m = (2f64.powf(n as f64 * r) + 1e-9).floor();
            if m > 1e9 {
                return Err(Error::BudgetExceeded(format!("2^(n R) = {m} messages")));
            }
            Ok((m as usize).max(1))
        }
    }
}

fn input_type(args: &SimulateArgs, n: usize, a: usize) -> Result<TypeVector> {
    let t = match &args.input_type {
        Some(s) => parse_type(s)?,
        None => balanced_type(n, a)?,
    };
    if t.n() != n || t.alphabet() != a {
        return Err(Error::DimensionMismatch(format!(
            "input type {:?} for blocklength {n} over {a} letters",
            t.counts()
        )));
    }
    Ok(t)
}

/// Defaults to every letter on the tuple where the other senders send
/// their cheapest letters.
fn state_type(args: &SimulateArgs, spec: &ChannelSpec, k: usize, n: usize, s: usize) -> Result<TypeVector> {
    let t = match &args.state_type {
        Some(v) => parse_type(v)?,
        None => {
            let mut idx = 0;
            for j in (0..spec.mac.k()).filter(|&j| j != k) {
                idx = idx * spec.mac.in_sizes()[j] + spec.costs.sender(j).min_cost_letter();
            }
            let mut counts = vec![0; s];
            counts[idx] = n;
            TypeVector::new(counts)?
        }
    };
    if t.n() != n || t.alphabet() != s {
        return Err(Error::DimensionMismatch(format!(
            "state type {:?} for blocklength {n} over {s} states",
            t.counts()
        )));
    }
    Ok(t)
}

fn check_cost(costs: &CostSpec, k: usize, t: &TypeVector) -> Result<()> {
    let c = costs.sender(k);
    if !c.feasible(&t.as_pmf()) {
        return Err(Error::Infeasible(format!(
            "codeword type {:?} of sender {} exceeds its cost cap",
            t.counts(),
            k + 1
        )));
    }
    Ok(())
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_channel(&args.channel)?;
    let ns = parse_counts(&args.n)?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::OutOfRange("blocklengths must be positive".into()).into());
    }
    if args.monte_carlo && args.trials == 0 {
        return Err(Error::OutOfRange("at least one trial is required".into()).into());
    }
    let params = DecisionParams {
        eps: args.eps,
        delta: args.delta,
    };
    let method = if args.monte_carlo { "monte-carlo" } else { "exact" };
    if args.dia {
        return simulate_dia(&args, &spec, &ns, params, out);
    }
    if args.joint {
        return simulate_joint(&args, &spec, &ns, params, method, out);
    }
    let w = &spec.mac;
    let k = sender_index(args.sender, w.k())?;
    let channel = w.state_channel(k)?;
    writeln!(
        out,
        "mode={} channel={} sender={} eps={} delta={} method={method} seed={}",
        if args.duplicate_demo { "duplicate-demo" } else { "sender" },
        spec.name,
        k + 1,
        args.eps,
        args.delta,
        args.seed
    )?;
    let mut rows = Vec::new();
    for &n in &ns {
        let p = input_type(&args, n, channel.x_size())?;
        check_cost(&spec.costs, k, &p)?;
        let st = state_type(&args, &spec, k, n, channel.s_size())?;
        let s = state_word(&st, args.random_state.then_some(args.seed));
        let m = message_count(n, args.rate, args.messages)?;
        let seed = args.seed.wrapping_add(n as u64);
        if args.duplicate_demo {
            let m = m.max(2);
            let base = build_code(channel.clone(), p.clone(), vec![st.clone()], m, params, seed, BUILD_ATTEMPTS)?;
            let mut book = base.codebook().to_vec();
            book[1] = book[0].clone();
            let code = DiCode::with_duplicates(book, p, vec![st], channel.clone(), params)?;
            let d = duplicate_converse_demo(&code, &s)?;
            writeln!(
                out,
                "n={n} messages={m} duplicate={},{} false_id={:.12} missed_id={:.12} sum={:.12} max={:.12}",
                d.m,
                d.m_prime,
                d.false_id,
                d.missed_id,
                d.sum(),
                d.max()
            )?;
            continue;
        }
        let code = build_code(channel.clone(), p, vec![st], m, params, seed, BUILD_ATTEMPTS)?;
        let (missed, worst_false, hw) = if args.monte_carlo {
            let mut missed = 0.0;
            let mut missed_hw = 0.0;
            let mut worst = 0.0f64;
            let mut worst_hw = 0.0;
            for mp in 0..code.m() {
                let r = monte_carlo_errors(&code, &s, 0, mp, args.trials, seed)?;
                if mp == 0 {
                    missed = r.missed_id;
                    missed_hw = r.missed_half_width;
                } else if r.false_id > worst || mp == 1 {
                    worst = r.false_id;
                    worst_hw = r.false_half_width;
                }
            }
            (missed, worst, Some((missed_hw, worst_hw)))
        } else {
            let summary = code_errors_exact(&code, &s)?;
            (summary.max_missed, summary.worst_false, None)
        };
        write!(
            out,
            "n={n} messages={} rate={:.6} missed_id={missed:.6} false_id={worst_false:.6} total={:.6}",
            code.m(),
            code.rate(),
            missed + worst_false
        )?;
        if let Some((a, b)) = hw {
            write!(out, " missed_half_width={a:.6} false_half_width={b:.6}")?;
        }
        writeln!(out)?;
        rows.push((n, code.m(), missed, worst_false));
    }
    if !rows.is_empty() {
        writeln!(out)?;
        writeln!(out, "{:>4} {:>8} {:>10} {:>10} {:>10}", "n", "M", "missed", "false", "total")?;
        for (n, m, a, b) in rows {
            writeln!(out, "{n:>4} {m:>8} {a:>10.6} {b:>10.6} {:>10.6}", a + b)?;
        }
    }
    Ok(())
}

fn simulate_joint(
    args: &SimulateArgs,
    spec: &ChannelSpec,
    ns: &[usize],
    params: DecisionParams,
    method: &str,
    out: &mut dyn Write,
) -> CmdResult {
    let w = &spec.mac;
    if w.k() != 2 {
        return Err(Error::DimensionMismatch(format!("--joint needs two senders, got {}", w.k())).into());
    }
    if args.input_type.is_some() || args.state_type.is_some() {
        return Err(Error::Spec("--joint uses balanced codeword types; drop --input-type/--state-type".into()).into());
    }
    writeln!(
        out,
        "mode=joint channel={} eps={} delta={} method={method} seed={}",
        spec.name, args.eps, args.delta, args.seed
    )?;
    let mut rows = Vec::new();
    for &n in ns {
        let types = [balanced_type(n, w.in_sizes()[0])?, balanced_type(n, w.in_sizes()[1])?];
        for (k, t) in types.iter().enumerate() {
            check_cost(&spec.costs, k, t)?;
        }
        let m = message_count(n, args.rate, args.messages)?;
        let seed = args.seed.wrapping_add(n as u64);
        let code = MacCode::build(w, types, [m, m], params, seed, BUILD_ATTEMPTS)?;
        let mut worst = 0.0f64;
        let mut pairs = vec![[0, 0]];
        if m > 1 {
            pairs.extend([[1, 0], [0, 1], [1, 1]]);
        }
        for mp in pairs {
            let r = if args.monte_carlo {
                mac_errors_monte_carlo(&code, w, [0, 0], mp, args.trials, seed)?
            } else {
                mac_errors_exact(&code, w, [0, 0], mp)?
            };
            worst = worst.max(r.joint);
            write!(
                out,
                "n={n} messages={m} m_prime={},{} e1={:.6} e2={:.6} joint={:.6} union_bound={}",
                mp[0] + 1,
                mp[1] + 1,
                r.per_sender[0],
                r.per_sender[1],
                r.joint,
                r.union_bound_holds()
            )?;
            if args.monte_carlo {
                write!(out, " joint_half_width={:.6}", r.joint_half_width)?;
            }
            writeln!(out)?;
        }
        rows.push((n, m, worst));
    }
    writeln!(out)?;
    writeln!(out, "{:>4} {:>8} {:>10}", "n", "M", "joint")?;
    for (n, m, e) in rows {
        writeln!(out, "{n:>4} {m:>8} {e:>10.6}")?;
    }
    Ok(())
}

fn simulate_dia(
    args: &SimulateArgs,
    spec: &ChannelSpec,
    ns: &[usize],
    params: DecisionParams,
    out: &mut dyn Write,
) -> CmdResult {
    let w = &spec.mac;
    let kk = w.k();
    if args.exact && !args.monte_carlo {
        log::info!("the average false error of the time-division code is always estimated by Monte Carlo");
    }
    writeln!(
        out,
        "mode=dia channel={} senders={kk} eps={} delta={} trials={} seed={}",
        spec.name, args.eps, args.delta, args.trials, args.seed
    )?;
    let idle: Vec<usize> = (0..kk).map(|k| spec.costs.sender(k).min_cost_letter()).collect();
    for &n in ns {
        let len = n / kk;
        if len == 0 {
            return Err(Error::OutOfRange(format!("blocklength {n} shorter than {kk} slices")).into());
        }
        let m = message_count(len, args.rate, args.messages)?.max(2);
        let m_big = match args.m_big {
            Some(v) => v,
            None => {
                let v = n as f64 * 2f64.powf(n as f64 / kk as f64);
                if v > 1e18 {
                    return Err(Error::BudgetExceeded(format!("default message count {v}")).into());
                }
                v.floor() as u64
            }
        };
        let mut base = Vec::with_capacity(kk);
        for k in 0..kk {
            let others: Vec<usize> = (0..kk).filter(|&j| j != k).map(|j| idle[j]).collect();
            let sc = StateChannel::from_dmc(&w.partial_channel(k, &others)?);
            let p = input_type(args, len, sc.x_size())?;
            let class = type_class_size(&p);
            if class < m.into() {
                return Err(Error::Construction(format!(
                    "{m} codewords requested from a type class of size {class}"
                ))
                .into());
            }
            let seed = args.seed.wrapping_add(n as u64) ^ ((k as u64 + 1) << 56);
            base.push(build_code(sc, p, vec![TypeVector::new(vec![len])?], m, params, seed, BUILD_ATTEMPTS)?);
        }
        let dia = dia_build(base, vec![m_big; kk], n, &spec.costs)?;
        let missed = dia_missed_exact(&dia, w)?;
        let report = dia_errors(&dia, w, args.trials, args.seed)?;
        for k in 0..kk {
            let base_missed = code_errors_exact(dia.base(k), &vec![0; len])?.max_missed;
            let s = &report.senders[k];
            writeln!(
                out,
                "n={n} sender={} slice={}..{} base_messages={m} messages={m_big} base_missed_id={base_missed:.6} missed_id={:.6} mc_missed_id={:.6} avg_false_id={:.6} false_half_width={:.6}",
                k + 1,
                dia.slot(k).start,
                dia.slot(k).end,
                missed[k],
                s.missed_id,
                s.false_id,
                s.false_half_width
            )?;
        }
    }
    Ok(())
}

fn oracle(args: OracleArgs, out: &mut dyn Write) -> CmdResult {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let mut all_passed = true;
    for suite in suites {
        let report = run_suite(suite, args.seed)?;
        for c in &report.checks {
            writeln!(out, "suite={suite} check={} pass={} {}", c.label, c.passed, c.detail)?;
        }
        let passed = report.passed();
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        writeln!(out, "suite={suite} checks={} failed={failed} passed={passed}", report.checks.len())?;
        all_passed &= passed;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn emit_spec(args: SpecArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_channel(&args.channel)?;
    writeln!(out, "{}", spec.to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("dimac").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn balanced_types() {
        assert_eq!(balanced_type(7, 3).unwrap().counts(), &[3, 2, 2]);
        assert_eq!(balanced_type(6, 2).unwrap().counts(), &[3, 3]);
    }

    #[test]
    fn message_counts() {
        assert_eq!(message_count(8, Some(0.5), None).unwrap(), 16);
        assert_eq!(message_count(12, None, None).unwrap(), 64);
        assert_eq!(message_count(8, None, Some(5)).unwrap(), 5);
        assert!(message_count(8, Some(-1.0), None).is_err());
    }

    #[test]
    fn bad_input_exits_two() {
        assert_eq!(run_str(&["region", "--kind", "di-upper"]).0, 2);
        assert_eq!(run_str(&["region", "--builtin", "nope", "--kind", "di-upper"]).0, 2);
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        assert_eq!(run_str(&["analyze", "--builtin", "mod3_adder", "--sender", "3"]).0, 2);
        assert_eq!(run_str(&["analyze", "--builtin", "multiplier", "--cap", "x"]).0, 2);
    }

    #[test]
    fn cap_flag_sets_weight_cost() {
        let args = ChannelArgs {
            spec: None,
            builtin: Some("multiplier".into()),
            q: Some(0.05),
            cap: vec!["2=0.3".into()],
        };
        let spec = load_channel(&args).unwrap();
        assert_eq!(spec.costs.sender(1).phi, vec![0.0, 1.0]);
        assert_eq!(spec.costs.sender(1).cap, Some(0.3));
        assert_eq!(spec.costs.sender(0).cap, None);
    }
}
