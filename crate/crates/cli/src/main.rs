use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use detcover::hypergraph::{self, GenSpec, Hypergraph};
use detcover::oracle;
use detcover::params::{self, REFERENCE_KDM_BASES, REFERENCE_ROWS};
use detcover::solver::{self, Answer, Decision, Reason};
use detcover::{FieldSpec, SieveConfig};

/// `solve` refuses sieves with more than `2^30` probes per attempt.
const PROBE_EXPONENT_GUARD: usize = 30;
/// `count --method dlx` refuses larger instances without `--force`.
const DLX_VERTEX_GUARD: usize = 90;

#[derive(Parser)]
#[command(
    name = "detcover",
    version,
    about = "Exact cover detection by determinant sieves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether an instance has an exact cover.
    Solve(SolveArgs),
    /// Count exact covers with an exact oracle.
    Count(CountArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Print optimized solver parameters and runtime bases.
    Params(ParamsArgs),
    /// Time the solver on generated planted instances (CSV).
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Auto,
    Kdm,
    Xkc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Dlx,
    Ie,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Failure target for sampling U (XkC). Defaults to 2^-20.
    #[arg(long, conflicts_with = "epsilon_base")]
    epsilon: Option<f64>,
    /// Use epsilon = base^-n instead of a fixed epsilon.
    #[arg(long)]
    epsilon_base: Option<f64>,
    #[arg(long, default_value_t = 64, value_parser = parse_width)]
    m: u32,
    /// Sieve workers; 0 = all cores.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Allow sieves with more than 2^30 probes per attempt.
    #[arg(long)]
    force: bool,
}

#[derive(clap::Args)]
struct CountArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Dlx)]
    method: Method,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    force: bool,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "edges")]
    edges: usize,
    #[arg(long)]
    plant: bool,
    #[arg(long)]
    kdm: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ParamsArgs {
    /// A single k or an inclusive range such as `3..8`.
    #[arg(long, default_value = "3..8")]
    k: String,
    /// Compare against the published parameter rows and fail if any drifts.
    #[arg(long)]
    check: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Mode::Kdm)]
    mode: Mode,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',', default_values_t = vec![6, 9, 12])]
    n: Vec<usize>,
    /// Edges per instance; defaults to 2n.
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 64, value_parser = parse_width)]
    m: u32,
}

#[derive(Serialize)]
struct SolveReport {
    command: &'static str,
    answer: Answer,
    reason: Reason,
    mode: Mode,
    n: usize,
    k: usize,
    edges: usize,
    probes: u64,
    attempts: u64,
    elapsed_ms: f64,
    seed: u64,
    m: u32,
    epsilon: Option<f64>,
    t: Option<f64>,
    u_size: Option<usize>,
    repetitions: Option<u64>,
}

#[derive(Serialize)]
struct CountReport {
    command: &'static str,
    count: oracle::CoverCount,
    method: Method,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct ParamsRow {
    k: usize,
    tau12: Option<f64>,
    tau2: Option<f64>,
    t: Option<f64>,
    i_base: Option<f64>,
    c_k: Option<f64>,
    general_bound: Option<f64>,
    kdm_base: f64,
}

#[derive(Serialize)]
struct ParamsReport {
    rows: Vec<ParamsRow>,
    check: Option<CheckResult>,
}

#[derive(Serialize)]
struct CheckResult {
    passed: bool,
    failures: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Count(args) => cmd_count(args).map(|_| ExitCode::SUCCESS),
        Command::Gen(args) => cmd_gen(args).map(|_| ExitCode::SUCCESS),
        Command::Params(args) => cmd_params(args),
        Command::Bench(args) => cmd_bench(args).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_width(s: &str) -> Result<u32, String> {
    match s {
        "8" => Ok(8),
        "64" => Ok(64),
        _ => Err("field width must be 8 or 64".into()),
    }
}

fn read_instance(path: &PathBuf) -> anyhow::Result<Hypergraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    hypergraph::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn emit<T: Serialize>(format: Format, report: &T) -> anyhow::Result<()> {
    let value = serde_json::to_value(report)?;
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&value)?)?,
        Format::Text => {
            if let serde_json::Value::Object(map) = value {
                for (key, v) in map {
                    match v {
                        serde_json::Value::Null => {}
                        serde_json::Value::String(s) => writeln!(out, "{key}: {s}")?,
                        other => writeln!(out, "{key}: {other}")?,
                    }
                }
            }
        }
    }
    Ok(())
}

fn probe_exponent(h: &Hypergraph, mode: Mode, epsilon: f64) -> anyhow::Result<usize> {
    let (n, k) = (h.n(), h.k());
    Ok(match mode {
        Mode::Kdm => n - 2 * n / k,
        _ if k < 2 || n % k != 0 || n == 0 => 0,
        _ => n - params::plan_xkc(n, k, epsilon)?.u_size,
    })
}

fn run_solver(h: &Hypergraph, mode: Mode, cfg: &SieveConfig) -> detcover::Result<Decision> {
    match mode {
        Mode::Kdm => solver::solve_kdm(h, cfg),
        Mode::Xkc => solver::solve_xkc(h, cfg),
        Mode::Auto => solver::solve_auto(h, cfg),
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let h = read_instance(&args.input)?;
    let mode = match args.mode {
        Mode::Auto if h.partition().is_some() => Mode::Kdm,
        Mode::Auto => Mode::Xkc,
        other => other,
    };
    let epsilon = match (args.epsilon, args.epsilon_base) {
        (Some(e), _) => e,
        (None, Some(base)) => {
            if base.is_nan() || base <= 1.0 {
                bail!("--epsilon-base must exceed 1");
            }
            base.powf(-(h.n() as f64)).max(f64::MIN_POSITIVE)
        }
        (None, None) => SieveConfig::default().epsilon,
    };
    let cfg = SieveConfig {
        field: FieldSpec::with_width(args.m)?,
        seed: args.seed,
        epsilon,
        threads: args.threads,
    };
    cfg.validate()?;
    if mode == Mode::Kdm && h.partition().is_none() {
        bail!("--mode kdm needs an instance with a partition");
    }
    let exponent = probe_exponent(&h, mode, epsilon)?;
    if exponent > PROBE_EXPONENT_GUARD && !args.force {
        bail!("sieve would need 2^{exponent} probes per attempt (limit 2^{PROBE_EXPONENT_GUARD}); pass --force to run anyway");
    }
    let decision = run_solver(&h, mode, &cfg)?;
    let report = SolveReport {
        command: "solve",
        answer: decision.answer,
        reason: decision.reason,
        mode,
        n: h.n(),
        k: h.k(),
        edges: h.num_edges(),
        probes: decision.probes,
        attempts: decision.attempts,
        elapsed_ms: decision.elapsed.as_secs_f64() * 1e3,
        seed: args.seed,
        m: args.m,
        epsilon: (mode == Mode::Xkc).then_some(epsilon),
        t: decision.plan.map(|p| p.t),
        u_size: decision.plan.map(|p| p.u_size),
        repetitions: decision.plan.map(|p| p.repetitions),
    };
    emit(args.format, &report)?;
    Ok(match decision.answer {
        Answer::Yes => ExitCode::SUCCESS,
        Answer::No => ExitCode::from(1),
    })
}

fn cmd_count(args: CountArgs) -> anyhow::Result<()> {
    let h = read_instance(&args.input)?;
    let start = Instant::now();
    let count = match args.method {
        Method::Dlx => {
            if h.n() > DLX_VERTEX_GUARD && !args.force {
                bail!("dlx is limited to {DLX_VERTEX_GUARD} vertices; pass --force to run anyway");
            }
            oracle::dlx_count(&h)
        }
        Method::Ie => oracle::ie_count(&h)?,
    };
    emit(
        args.format,
        &CountReport {
            command: "count",
            count,
            method: args.method,
            elapsed_ms: elapsed_ms(start),
        },
    )
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let h = hypergraph::generate(
        &mut rng,
        GenSpec {
            k: args.k,
            n: args.n,
            edge_count: args.edges,
            plant: args.plant,
            kdm: args.kdm,
        },
    )?;
    let text = hypergraph::serialize(&h);
    match args.output {
        Some(path) => {
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_k_range(spec: &str) -> anyhow::Result<std::ops::RangeInclusive<usize>> {
    let parsed = match spec.split_once("..") {
        Some((lo, hi)) => lo
            .trim()
            .parse::<usize>()
            .and_then(|lo| Ok(lo..=hi.trim().trim_start_matches('=').parse()?)),
        None => spec.trim().parse::<usize>().map(|k| k..=k),
    };
    let range = parsed.with_context(|| format!("bad --k value {spec:?}"))?;
    if *range.start() < 2 || range.is_empty() {
        bail!("--k must be at least 2 and the range non-empty");
    }
    Ok(range)
}

fn cmd_params(args: ParamsArgs) -> anyhow::Result<ExitCode> {
    let range = parse_k_range(&args.k)?;
    let mut rows = Vec::new();
    for k in range {
        let kdm_base = params::kdm_base(k)?;
        if k == 2 {
            rows.push(ParamsRow {
                k,
                tau12: None,
                tau2: None,
                t: None,
                i_base: None,
                c_k: None,
                general_bound: None,
                kdm_base,
            });
            continue;
        }
        let row = params::optimize(k)?;
        rows.push(ParamsRow {
            k,
            tau12: Some(row.tau12),
            tau2: Some(row.tau2),
            t: Some(row.t),
            i_base: Some(row.i_base),
            c_k: Some(row.c_k),
            general_bound: Some(params::general_bound(k)),
            kdm_base,
        });
    }
    let check = args.check.then(|| check_rows(&rows));
    let passed = check.as_ref().is_none_or(|c| c.passed);
    let report = ParamsReport { rows, check };
    match args.format {
        Format::Json => emit(Format::Json, &report)?,
        Format::Text => print_params_table(&report)?,
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn check_rows(rows: &[ParamsRow]) -> CheckResult {
    let mut failures = Vec::new();
    for row in rows {
        if let Some(&(_, want)) = REFERENCE_KDM_BASES.iter().find(|r| r.0 == row.k) {
            if (row.kdm_base - want).abs() > 0.001 {
                failures.push(format!(
                    "k={}: kDM base {:.4} vs {want}",
                    row.k, row.kdm_base
                ));
            }
        }
        let Some(&(_, tau12, tau2, _, _, c_k)) = REFERENCE_ROWS.iter().find(|r| r.0 == row.k)
        else {
            continue;
        };
        let (Some(got_c), Some(got_12), Some(got_2)) = (row.c_k, row.tau12, row.tau2) else {
            continue;
        };
        if (got_c - c_k).abs() > 0.001 {
            failures.push(format!("k={}: c_k {got_c:.4} vs {c_k}", row.k));
        }
        if (got_12 - tau12).abs() > 0.01 || (got_2 - tau2).abs() > 0.01 {
            failures.push(format!(
                "k={}: (tau12, tau2) ({got_12:.3}, {got_2:.3}) vs ({tau12}, {tau2})",
                row.k
            ));
        }
    }
    CheckResult {
        passed: failures.is_empty(),
        failures,
    }
}

fn print_params_table(report: &ParamsReport) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{:>3}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}  {:>9}  {:>8}",
        "k", "tau12", "tau2", "t", "I^1/n", "c_k", "c_k bound", "kDM base"
    )?;
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
    for r in &report.rows {
        writeln!(
            out,
            "{:>3}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}  {:>9}  {:>8.3}",
            r.k,
            cell(r.tau12),
            cell(r.tau2),
            cell(r.t),
            cell(r.i_base),
            cell(r.c_k),
            cell(r.general_bound),
            r.kdm_base
        )?;
    }
    if let Some(check) = &report.check {
        if check.passed {
            writeln!(out, "all rows within tolerance")?;
        } else {
            for f in &check.failures {
                writeln!(out, "out of tolerance: {f}")?;
            }
        }
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    if args.reps == 0 {
        bail!("--reps must be positive");
    }
    let field = FieldSpec::with_width(args.m)?;
    let mode = if args.mode == Mode::Auto {
        Mode::Kdm
    } else {
        args.mode
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "n,k,mode,probes,attempts,elapsed_ms,answer")?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for &n in &args.n {
        let edge_count = args.edges.unwrap_or(2 * n).max(n / args.k.max(1));
        let mut probes = 0u64;
        let mut attempts = 0u64;
        let mut elapsed = 0.0;
        let mut yes = 0usize;
        for rep in 0..args.reps {
            let spec = GenSpec {
                k: args.k,
                n,
                edge_count,
                plant: true,
                kdm: mode == Mode::Kdm,
            };
            let h = hypergraph::generate(&mut rng, spec)?;
            let cfg = SieveConfig {
                field,
                seed: args.seed.wrapping_add(rep as u64),
                threads: args.threads,
                ..SieveConfig::default()
            };
            let d = run_solver(&h, mode, &cfg)?;
            probes += d.probes;
            attempts += d.attempts;
            elapsed += d.elapsed.as_secs_f64() * 1e3;
            yes += d.is_yes() as usize;
        }
        let reps = args.reps as f64;
        let answer = match yes {
            y if y == args.reps => "yes",
            0 => "no",
            _ => "mixed",
        };
        writeln!(
            out,
            "{n},{},{},{},{},{:.3},{answer}",
            args.k,
            if mode == Mode::Kdm { "kdm" } else { "xkc" },
            probes as f64 / reps,
            attempts as f64 / reps,
            elapsed / reps,
        )?;
    }
    Ok(())
}
