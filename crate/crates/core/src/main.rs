use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use primegrid::analytic::{self, LetterDensity};
use primegrid::gaps::{self, HistogramDoc};
use primegrid::manifest::RunManifest;
use primegrid::optimizer::{self, DeConfig, EvalSeedPolicy, FitModel, Strategy};
use primegrid::seqgen::{self, GeneratorConfig, InputDistribution, Model};
use primegrid::shiftmodel::{self, Example, Letter};
use primegrid::signature::DEFAULT_SEGMENT_SIZE;
use primegrid::trail::{self, CheckpointManifest, PrimeStops, TrailJob};
use primegrid::words::{self, Word};
use primegrid::{Error, Result};

#[derive(Parser)]
#[command(name = "primegrid", version, about = "Number-trail and prime-grid toolkit")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Where to write the run manifest.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accumulate L∞ over [from, to] into a checkpoint directory.
    Trail(TrailArgs),
    /// Gap series, histograms and the first-rows table.
    Gaps(GapsArgs),
    /// L∞(p_k)/p_k at every stride-th prime.
    Ratio(RatioArgs),
    /// Modified prime-counting ratios at N = L∞(p_k).
    Pnt(PntArgs),
    /// All analytic constants as JSON.
    Constants(OutArgs),
    /// Locate a run of integers with prescribed ℓ∞ norms.
    FindWord(FindWordArgs),
    /// Calibrate one of the worked Markov-shift examples.
    MarkovExample(MarkovArgs),
    /// Run the forbidden-word-free sequence generators.
    Simulate(SimulateArgs),
    /// Fit a generator input distribution by differential evolution.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrailArgs {
    /// First integer of the range; 2 for a fresh run, the checkpoint's next_n
    /// when resuming.
    #[arg(long, value_parser = parse_count)]
    from: Option<u64>,
    /// Last integer of the range, inclusive.
    #[arg(long, value_parser = parse_count)]
    to: Option<u64>,
    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_SEGMENT_SIZE)]
    segment_size: u64,
    /// Directory for a fresh run.
    #[arg(long, conflicts_with = "resume")]
    checkpoint_dir: Option<PathBuf>,
    /// Continue the run stored in this directory.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Segments sieved concurrently between checkpoints (default: threads).
    #[arg(long)]
    batch: Option<usize>,
    /// Stop after this many segments, leaving a resumable checkpoint.
    #[arg(long)]
    stop_after: Option<usize>,
}

#[derive(Args)]
struct GapsArgs {
    /// Prime-stops file.
    #[arg(long)]
    stops: PathBuf,
    /// Primes file (default: primes.bin beside the stops file).
    #[arg(long)]
    primes: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: u8,
    /// Use gaps between primes instead of between prime stops.
    #[arg(long)]
    classical: bool,
    /// Only primes p ≤ N.
    #[arg(long, value_parser = parse_count)]
    n_max: Option<u64>,
    /// Histogram CSV (value,count).
    #[arg(long)]
    hist: Option<PathBuf>,
    /// Histogram JSON with metadata.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Restrict the written histogram to values lo:hi.
    #[arg(long, value_parser = parse_range)]
    range: Option<(i64, i64)>,
    /// Per-prime table k,p,L,D1,D2,DD1,DD2.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long)]
    stops: PathBuf,
    #[arg(long)]
    primes: Option<PathBuf>,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    stride: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PntArgs {
    #[arg(long)]
    stops: PathBuf,
    #[arg(long, value_parser = parse_count)]
    k: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FindWordArgs {
    /// Norms, e.g. 1,2,2,1.
    #[arg(long)]
    word: Word,
    /// One prime per letter, e.g. 3,2,5,7.
    #[arg(long, value_delimiter = ',')]
    primes: Vec<u64>,
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    kmax: u64,
    /// Seconds allowed per candidate factorization.
    #[arg(long)]
    candidate_timeout: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MarkovArgs {
    #[arg(long, value_parser = parse_example)]
    which: Example,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl ModelArg {
    fn model(self) -> Model {
        match self {
            ModelArg::One => Model::One,
            ModelArg::Two => Model::Two,
        }
    }

    fn number(self) -> u8 {
        match self {
            ModelArg::One => 1,
            ModelArg::Two => 2,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: ModelArg,
    /// table3-p1, table3-p2 or a CSV file (letter,p).
    #[arg(long)]
    dist: String,
    #[arg(long, value_parser = parse_count)]
    length: u64,
    #[arg(long, value_parser = parse_count, default_value = "1")]
    runs: u64,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: u64,
    /// Also count forbidden windows (keeps each sequence in memory).
    #[arg(long)]
    check_forbidden: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModelArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    /// i.i.d. sampling without elimination.
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Rand1bin,
    Best1bin,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    model: FitModelArg,
    #[arg(long, default_value_t = 40)]
    pop: usize,
    #[arg(long, default_value_t = 200)]
    gens: usize,
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    eval_length: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    weight: f64,
    #[arg(long, default_value_t = 0.9)]
    crossover: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Rand1bin)]
    strategy: StrategyArg,
    /// Mutate log p instead of p.
    #[arg(long)]
    log_scale: bool,
    /// Fresh evaluation seed every generation.
    #[arg(long)]
    reseed: bool,
    /// Distribution CSV (letter,p).
    #[arg(long)]
    out: PathBuf,
    /// JSON run report (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Accepts plain integers and exact scientific forms such as `1e7`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let Some((m, e)) = s.split_once(['e', 'E']) else {
        return Err(format!("{s:?} is not a non-negative integer"));
    };
    let e: u32 = e.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
    let (int, frac) = m.split_once('.').unwrap_or((m, ""));
    let frac = frac.trim_end_matches('0');
    if frac.len() as u32 > e {
        return Err(format!("{s:?} is not an integer"));
    }
    let digits: u64 = format!("{int}{frac}")
        .parse()
        .map_err(|_| format!("{s:?} is not a non-negative integer"))?;
    10u64
        .checked_pow(e - frac.len() as u32)
        .and_then(|p| digits.checked_mul(p))
        .ok_or_else(|| format!("{s:?} does not fit in 64 bits"))
}

fn parse_range(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: i64 = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
    let hi: i64 = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
    if lo > hi {
        return Err("lo must not exceed hi".into());
    }
    Ok((lo, hi))
}

fn parse_example(s: &str) -> std::result::Result<Example, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Ctx {
    manifest: RunManifest,
    manifest_path: Option<PathBuf>,
    started: Instant,
}

impl Ctx {
    /// Writes `text` to `out`, or stdout, and records the file.
    fn emit(&mut self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(p) => {
                fs::write(p, text)?;
                self.manifest.output(p)?;
            }
            None => {
                let mut so = io::stdout().lock();
                so.write_all(text.as_bytes())?;
                so.flush()?;
            }
        }
        Ok(())
    }

    fn finish(mut self, default: Option<PathBuf>) -> Result<()> {
        self.manifest.wall_time = self.started.elapsed().as_secs_f64();
        let path = self
            .manifest_path
            .or(default)
            .unwrap_or_else(|| PathBuf::from(format!("{}.manifest.json", self.manifest.command)));
        self.manifest.write(&path)
    }
}

fn sidecar(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("primegrid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Domain("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Resource(e.to_string()))?;
    }
    let name = match &cli.command {
        Command::Trail(_) => "trail",
        Command::Gaps(_) => "gaps",
        Command::Ratio(_) => "ratio",
        Command::Pnt(_) => "pnt",
        Command::Constants(_) => "constants",
        Command::FindWord(_) => "find-word",
        Command::MarkovExample(_) => "markov-example",
        Command::Simulate(_) => "simulate",
        Command::Optimize(_) => "optimize",
    };
    let mut ctx = Ctx {
        manifest: RunManifest::new(name),
        manifest_path: cli.manifest,
        started: Instant::now(),
    };
    ctx.manifest.param("threads", rayon::current_num_threads());
    let default = match cli.command {
        Command::Trail(a) => cmd_trail(&mut ctx, a)?,
        Command::Gaps(a) => cmd_gaps(&mut ctx, a)?,
        Command::Ratio(a) => cmd_ratio(&mut ctx, a)?,
        Command::Pnt(a) => cmd_pnt(&mut ctx, a)?,
        Command::Constants(a) => {
            let text = to_json(&analytic::constants_report())?;
            ctx.emit(a.out.as_deref(), &text)?;
            a.out.as_deref().map(sidecar)
        }
        Command::FindWord(a) => cmd_find_word(&mut ctx, a)?,
        Command::MarkovExample(a) => cmd_markov(&mut ctx, a)?,
        Command::Simulate(a) => cmd_simulate(&mut ctx, a)?,
        Command::Optimize(a) => cmd_optimize(&mut ctx, a)?,
    };
    ctx.finish(default)
}

fn cmd_trail(ctx: &mut Ctx, a: TrailArgs) -> Result<Option<PathBuf>> {
    let batch = a.batch.unwrap_or_else(rayon::current_num_threads).max(1);
    let status = if let Some(dir) = &a.resume {
        let m = CheckpointManifest::load(dir)?;
        if let Some(from) = a.from {
            if from != m.next_n {
                return Err(Error::Domain(format!(
                    "--from {from} does not continue the checkpoint (next_n = {})",
                    m.next_n
                )));
            }
        }
        ctx.manifest.param("resume", dir.display());
        trail::resume_checkpointed(dir, a.to, batch, a.stop_after)?
    } else {
        let dir = a
            .checkpoint_dir
            .clone()
            .ok_or_else(|| Error::Domain("give --checkpoint-dir or --resume".into()))?;
        let to = a.to.ok_or_else(|| Error::Domain("--to is required".into()))?;
        if let Some(from) = a.from {
            if from != 2 {
                return Err(Error::Domain(
                    "a fresh run starts at 2; extend an existing run with --resume".into(),
                ));
            }
        }
        trail::start_checkpointed(&TrailJob {
            dir,
            to,
            segment_size: a.segment_size,
            batch,
            max_segments: a.stop_after,
        })?
    };
    let dir = a.resume.or(a.checkpoint_dir).expect("checked above");
    let m = &status.manifest;
    ctx.manifest
        .param("from", a.from.unwrap_or(2))
        .param("to", m.to)
        .param("segment_size", m.segment_size)
        .param("batch", batch);
    for f in [trail::MANIFEST_FILE, &m.stops_file, &m.primes_file] {
        ctx.manifest.output(&dir.join(f))?;
    }
    let report = json!({
        "next_n": m.next_n,
        "cumsum_linf": m.cumsum_linf,
        "prime_count": m.prime_count,
        "segments_done": status.segments_done,
        "complete": status.complete,
    });
    ctx.emit(None, &to_json(&report)?)?;
    Ok(Some(dir.join("run.manifest.json")))
}

fn primes_path(stops: &Path, given: Option<PathBuf>) -> PathBuf {
    given.unwrap_or_else(|| stops.with_file_name(trail::PRIMES_FILE))
}

fn cmd_gaps(ctx: &mut Ctx, a: GapsArgs) -> Result<Option<PathBuf>> {
    let mut stops = trail::read_u64_file(&a.stops)?;
    ctx.manifest.input(&a.stops)?;
    let need_primes = a.classical || a.n_max.is_some() || a.table.is_some();
    let mut primes = Vec::new();
    if need_primes {
        let pp = primes_path(&a.stops, a.primes.clone());
        primes = trail::read_u64_file(&pp)?;
        ctx.manifest.input(&pp)?;
        if primes.len() < stops.len() {
            return Err(Error::Format("primes file is shorter than the stops file".into()));
        }
        primes.truncate(stops.len());
    }
    let n_max = match a.n_max {
        Some(n) => {
            let c = gaps::primes_up_to(&primes, n);
            if c == primes.len() && primes.last().is_some_and(|&p| p < n) {
                eprintln!("primegrid: warning: data end at p = {}", primes[c - 1]);
            }
            primes.truncate(c);
            stops.truncate(c);
            n
        }
        None => stops.len() as u64,
    };
    PrimeStops::from_vec(stops.clone())?;
    let input = if a.classical { &primes } else { &stops };
    let series = gaps::gap_series(input, !a.classical, a.order)?;
    let mut hist = gaps::histogram(&series)?;
    if let Some((lo, hi)) = a.range {
        hist = hist.clipped(lo, hi);
    }
    ctx.manifest
        .param("order", a.order)
        .param("classical", a.classical)
        .param("n_max", n_max);
    if let Some((lo, hi)) = a.range {
        ctx.manifest.param("range", format!("{lo}:{hi}"));
    }
    if let Some(p) = &a.hist {
        ctx.emit(Some(p), &hist.to_csv())?;
    }
    if let Some(p) = &a.json {
        ctx.emit(Some(p), &to_json(&HistogramDoc::new(&hist, n_max, series.kind))?)?;
    }
    if let Some(p) = &a.table {
        ctx.emit(Some(p), &first_rows_table(&primes, &stops)?)?;
    }
    let mut summary = json!({
        "kind": series.kind,
        "values": series.len(),
        "jumping_champions": gaps::jumping_champions(&hist),
    });
    if series.kind == gaps::GapKind::TrailD1 {
        let report = gaps::excluded_values_check(&series)?;
        summary["first_occurrence"] = json!(report.first_occurrence);
    }
    ctx.emit(None, &to_json(&summary)?)?;
    Ok(a.hist.or(a.json).or(a.table).as_deref().map(sidecar))
}

/// `k, p_k, L∞(p_k), D¹_k, D²_k, 𝒟¹_k, 𝒟²_k` for every k with both
/// second differences defined.
fn first_rows_table(primes: &[u64], stops: &[u64]) -> Result<String> {
    if stops.len() < 3 {
        return Err(Error::Domain("the table needs at least three primes".into()));
    }
    let d = |v: &[u64], k: usize| v[k + 1] as i64 - v[k] as i64;
    let mut s = String::from("k,p,L,D1,D2,DD1,DD2\n");
    for k in 0..stops.len() - 2 {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            k + 1,
            primes[k],
            stops[k],
            d(primes, k),
            d(primes, k + 1) - d(primes, k),
            d(stops, k),
            d(stops, k + 1) - d(stops, k),
        ));
    }
    Ok(s)
}

fn cmd_ratio(ctx: &mut Ctx, a: RatioArgs) -> Result<Option<PathBuf>> {
    let stops = PrimeStops::from_vec(trail::read_u64_file(&a.stops)?)?;
    let pp = primes_path(&a.stops, a.primes);
    let primes = trail::read_u64_file(&pp)?;
    ctx.manifest.input(&a.stops)?.input(&pp)?;
    ctx.manifest.param("stride", a.stride);
    let stride = usize::try_from(a.stride).map_err(|_| Error::Domain("stride too large".into()))?;
    let mut s = String::from("k,ratio\n");
    for (k, r) in trail::ratio_series(&stops, &primes, stride)? {
        s.push_str(&format!("{k},{r}\n"));
    }
    ctx.emit(a.out.out.as_deref(), &s)?;
    Ok(a.out.out.as_deref().map(sidecar))
}

fn cmd_pnt(ctx: &mut Ctx, a: PntArgs) -> Result<Option<PathBuf>> {
    let stops = PrimeStops::from_vec(trail::read_u64_file(&a.stops)?)?;
    ctx.manifest.input(&a.stops)?;
    ctx.manifest.param("k", a.k);
    let k = usize::try_from(a.k).map_err(|_| Error::Domain("k too large".into()))?;
    let (by_log, by_li) = gaps::pnt_ratios(k, &stops)?;
    let n = stops.get(k).expect("checked by pnt_ratios");
    let report = json!({
        "k": a.k,
        "N": n,
        "pi_infty": gaps::pi_infty(n, &stops),
        "ratio_log": by_log,
        "ratio_li": by_li,
    });
    ctx.emit(a.out.out.as_deref(), &to_json(&report)?)?;
    Ok(a.out.out.as_deref().map(sidecar))
}

fn cmd_find_word(ctx: &mut Ctx, a: FindWordArgs) -> Result<Option<PathBuf>> {
    ctx.manifest
        .param("word", &a.word)
        .param("primes", format!("{:?}", a.primes))
        .param("kmax", a.kmax);
    let timeout = match a.candidate_timeout {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(Error::Domain("--candidate-timeout must be positive".into()))
        }
        t => t.map(Duration::from_secs_f64),
    };
    let (x, m) = words::crt_locate(&a.word, &a.primes)?;
    let hit = words::search_word(&a.word, &a.primes, a.kmax, timeout)?;
    let report = json!({
        "found": hit.is_some(),
        "location": hit.as_ref().map(|h| h.location.to_string()),
        "k": hit.as_ref().map(|h| h.k),
        "x": x.to_string(),
        "M": m.to_string(),
    });
    ctx.emit(a.out.out.as_deref(), &to_json(&report)?)?;
    Ok(a.out.out.as_deref().map(sidecar))
}

fn cmd_markov(ctx: &mut Ctx, a: MarkovArgs) -> Result<Option<PathBuf>> {
    ctx.manifest.param("which", format!("{:?}", a.which).to_lowercase());
    let cal = shiftmodel::calibrate_example(a.which)?;
    let ms = &cal.shift;
    let marg = ms.marginals();
    let letter = |l: Letter| match l {
        Letter::Sym(k) => k.to_string(),
        Letter::Star => "*".to_string(),
    };
    let report = json!({
        "which": a.which,
        "eliminated": a.which.eliminated().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "p1": cal.p1,
        "p2": cal.p2,
        "p_star": cal.p_star,
        "pi": ms.labels.iter().zip(&ms.pi).map(|(l, p)| json!([l, p])).collect::<Vec<_>>(),
        "marginals": marg.entries.iter().map(|(l, p)| json!([letter(*l), p])).collect::<Vec<_>>(),
        "expected_hop": ms.expected_hop(),
        "residual": shiftmodel::residual(ms, &LetterDensity::alphabet()),
    });
    ctx.emit(a.out.out.as_deref(), &to_json(&report)?)?;
    Ok(a.out.out.as_deref().map(sidecar))
}

fn load_dist(ctx: &mut Ctx, spec: &str) -> Result<InputDistribution> {
    match spec {
        "table3-p1" => Ok(InputDistribution::table3_p1()),
        "table3-p2" => Ok(InputDistribution::table3_p2()),
        file => {
            let p = Path::new(file);
            let d = InputDistribution::from_csv(&fs::read_to_string(p)?)?;
            ctx.manifest.input(p)?;
            Ok(d)
        }
    }
}

#[derive(Serialize)]
struct RunRecord {
    seed: u64,
    c0: f64,
    rms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<usize>,
}

fn cmd_simulate(ctx: &mut Ctx, a: SimulateArgs) -> Result<Option<PathBuf>> {
    let p = load_dist(ctx, &a.dist)?;
    ctx.manifest
        .param("model", a.model.number())
        .param("dist", &a.dist)
        .param("length", a.length)
        .param("runs", a.runs)
        .param("seed", a.seed)
        .param("rng", seqgen::RNG_NAME);
    if a.runs == 0 {
        return Err(Error::Domain("--runs must be at least 1".into()));
    }
    let cfg = GeneratorConfig::standard(a.model.model());
    let q = LetterDensity::alphabet();
    let records = (0..a.runs)
        .into_par_iter()
        .map(|i| {
            let seed = a.seed.wrapping_add(i);
            let (stats, violations) = if a.check_forbidden {
                let (s, v) = seqgen::run_stats_checked(cfg, &p, a.length, seed)?;
                (s, Some(v))
            } else {
                (seqgen::run_stats(cfg, &p, a.length, seed)?, None)
            };
            Ok(RunRecord {
                seed,
                c0: stats.c0,
                rms: seqgen::rms(&stats.marginals, &q),
                violations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = records.len() as f64;
    let report = json!({
        "model": a.model.number(),
        "length": a.length,
        "runs": records,
        "mean_c0": records.iter().map(|r| r.c0).sum::<f64>() / n,
        "mean_rms": records.iter().map(|r| r.rms).sum::<f64>() / n,
    });
    ctx.emit(a.out.out.as_deref(), &to_json(&report)?)?;
    Ok(a.out.out.as_deref().map(sidecar))
}

fn cmd_optimize(ctx: &mut Ctx, a: OptimizeArgs) -> Result<Option<PathBuf>> {
    let model = match a.model {
        FitModelArg::One => FitModel::Model1,
        FitModelArg::Two => FitModel::Model2,
        FitModelArg::None => FitModel::NoElimination,
    };
    let mut cfg = DeConfig::for_distribution();
    cfg.population = a.pop;
    cfg.generations = a.gens;
    cfg.eval_length = a.eval_length;
    cfg.weight = a.weight;
    cfg.crossover = a.crossover;
    cfg.log_scale = a.log_scale;
    cfg.strategy = match a.strategy {
        StrategyArg::Rand1bin => Strategy::Rand1Bin,
        StrategyArg::Best1bin => Strategy::Best1Bin,
    };
    cfg.eval_seed_policy = if a.reseed {
        EvalSeedPolicy::PerGeneration
    } else {
        EvalSeedPolicy::Fixed
    };
    ctx.manifest
        .param("model", format!("{model:?}"))
        .param("pop", a.pop)
        .param("gens", a.gens)
        .param("eval_length", a.eval_length)
        .param("seed", a.seed)
        .param("weight", a.weight)
        .param("crossover", a.crossover)
        .param("strategy", format!("{:?}", cfg.strategy))
        .param("log_scale", a.log_scale)
        .param("eval_seed_policy", format!("{:?}", cfg.eval_seed_policy));
    let fit = optimizer::inverse_fit(model, &LetterDensity::alphabet(), &cfg, a.seed)?;
    ctx.emit(Some(&a.out), &fit.distribution.to_csv())?;
    let report = json!({
        "model": model,
        "rms": fit.rms,
        "history": fit.history,
        "config": cfg,
        "seed": a.seed,
    });
    ctx.emit(a.report.as_deref(), &to_json(&report)?)?;
    Ok(Some(sidecar(&a.out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("100").unwrap(), 100);
        assert_eq!(parse_count("1e7").unwrap(), 10_000_000);
        assert_eq!(parse_count("1.55e7").unwrap(), 15_500_000);
        assert_eq!(parse_count("1_000").unwrap(), 1000);
        assert!(parse_count("1.5e0").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("1e20").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-60:60").unwrap(), (-60, 60));
        assert!(parse_range("5:1").is_err());
        assert!(parse_range("5").is_err());
    }
}
