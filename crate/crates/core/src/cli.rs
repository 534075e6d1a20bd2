//! `hlvqmc` command line: price, greeks, smile, converge, selftest.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 numerical failure,
//! 3 I/O failure. Every run logs its fully resolved configuration as one
//! JSON line on standard error.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::greeks::{greeks, spot_greeks, GreekShifts, Recycling};
use crate::harness::{emit_report, ExperimentConfig, Method, Quantity, Study};
use crate::hlv::HlvParams;
use crate::normal::{inv_normal_cdf, norm_cdf};
use crate::path::{BridgePlan, Construction, TimeGrid};
use crate::pricing::{bs_geometric_asian_closed_form, implied_vol_curve, mc_price, OptionSpec};
use crate::uniform::{DirectionNumbers, SequenceKind, UniformStream};

pub const DIRNUMS_ENV: &str = "HLV_QMC_DIRNUMS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hlvqmc",
    version,
    about = "Geometric Asian options under hyperbolic local volatility: MC and Sobol QMC pricing, Greeks, smiles, convergence studies",
    long_about = "Geometric Asian options under hyperbolic local volatility.\n\n\
        Defaults everywhere are the reference study: S0=100, r=3%, T=1, nu=30%, \
        beta=0.5, 256 fixings, strikes 80/100/120, Sobol points with the Brownian bridge."
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price a geometric-average Asian call.
    Price(PriceArgs),
    /// Price plus Delta, Gamma, nu-Vega and beta-Vega by central differences.
    Greeks(GreeksArgs),
    /// Implied Black-Scholes volatilities of European calls, as CSV.
    Smile(SmileArgs),
    /// RMSE convergence study; writes CSV files and prints fitted rates.
    Converge(ConvergeArgs),
    /// Quick internal consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct ModelArgs {
    /// Initial spot S0.
    #[arg(long, default_value_t = 100.0)]
    spot: f64,
    /// Continuously compounded rate.
    #[arg(long, default_value_t = 0.03)]
    rate: f64,
    /// Maturity in years.
    #[arg(long, default_value_t = 1.0)]
    maturity: f64,
    /// Volatility level nu.
    #[arg(long, default_value_t = 0.3)]
    nu: f64,
    /// Skew beta in (0, 1]; 1 is Black-Scholes.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Time steps, equal to the number of fixings.
    #[arg(long, default_value_t = 256)]
    steps: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SamplingArgs {
    /// Number of simulated paths.
    #[arg(long, default_value_t = 1 << 16)]
    paths: u64,
    /// Uniform source: mt (Mersenne Twister) or sobol.
    #[arg(long, default_value = "sobol", value_parser = parse_sequence)]
    sequence: SequenceKind,
    /// Wiener path construction: incremental or bridge.
    #[arg(long, default_value = "bridge", value_parser = parse_construction)]
    construction: Construction,
    /// Mersenne Twister seed.
    #[arg(long, default_value_t = 2_718_281)]
    seed: u64,
    /// Sobol direction-number file (Joe-Kuo format); built-in table if absent.
    #[arg(long, env = DIRNUMS_ENV)]
    dirnums: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PriceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    sampling: SamplingArgs,
    /// Strike K.
    #[arg(long, default_value_t = 100.0)]
    strike: f64,
}

#[derive(Debug, Args, Serialize)]
struct GreeksArgs {
    #[command(flatten)]
    #[serde(flatten)]
    price: PriceArgs,
    /// Spot bump, percent of spot.
    #[arg(long, default_value_t = 1.0)]
    shift_spot_pct: f64,
    /// nu and beta bumps, percent of their values.
    #[arg(long, default_value_t = 1.0)]
    shift_param_pct: f64,
    /// Delta and Gamma only (allows beta = 1).
    #[arg(long)]
    spot_only: bool,
}

#[derive(Debug, Args, Serialize)]
struct SmileArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    sampling: SamplingArgs,
    /// Comma-separated strikes (default: 50,75,100,125,150% of spot).
    #[arg(long, value_parser = parse_list::<f64>)]
    strikes: Option<List<f64>>,
}

#[derive(Debug, Args, Serialize)]
struct ConvergeArgs {
    /// JSON study configuration; unspecified fields take the reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV files.
    #[arg(long, default_value = "convergence")]
    out: PathBuf,
    #[arg(long)]
    spot: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    maturity: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated strikes.
    #[arg(long, value_parser = parse_list::<f64>)]
    strikes: Option<List<f64>>,
    /// Comma-separated path counts, strictly increasing.
    #[arg(long, value_parser = parse_list::<u64>)]
    path_grid: Option<List<u64>>,
    /// Comma-separated methods: mc_incremental, mc_bridge, qmc_incremental, qmc_bridge.
    #[arg(long, value_parser = parse_list::<Method>)]
    methods: Option<List<Method>>,
    /// Comma-separated quantities: price, delta, gamma, vega_nu, vega_beta.
    #[arg(long, value_parser = parse_list::<Quantity>)]
    quantities: Option<List<Quantity>>,
    /// Replications L.
    #[arg(long)]
    runs: Option<usize>,
    /// Paths per reference replication.
    #[arg(long)]
    reference_paths: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shift_spot_pct: Option<f64>,
    #[arg(long)]
    shift_param_pct: Option<f64>,
    /// Sobol direction-number file.
    #[arg(long, env = DIRNUMS_ENV)]
    dirnums: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SelftestArgs {
    /// Sobol direction-number file.
    #[arg(long, env = DIRNUMS_ENV)]
    dirnums: Option<PathBuf>,
}

/// A comma-separated flag value; the empty string is the empty list.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
struct List<T>(Vec<T>);

fn parse_list<T>(s: &str) -> Result<List<T>, String>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(List(Vec::new()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(List)
}

fn parse_sequence(s: &str) -> Result<SequenceKind, String> {
    match s {
        "mt" => Ok(SequenceKind::MersenneTwister),
        "sobol" => Ok(SequenceKind::Sobol),
        _ => Err(format!("expected mt or sobol, got {s:?}")),
    }
}

fn parse_construction(s: &str) -> Result<Construction, String> {
    match s {
        "incremental" => Ok(Construction::Incremental),
        "bridge" => Ok(Construction::BrownianBridge),
        _ => Err(format!("expected incremental or bridge, got {s:?}")),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Lib(e) if e.is_io() => EXIT_IO,
            Failure::Lib(Error::Parse { .. }) => EXIT_IO,
            Failure::Lib(Error::Config(_) | Error::Domain(_)) => EXIT_USAGE,
            Failure::Lib(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Price(a) => price(a, cli.threads),
        Command::Greeks(a) => greeks_cmd(a, cli.threads),
        Command::Smile(a) => smile(a, cli.threads),
        Command::Converge(a) => converge(a, cli.threads),
        Command::Selftest(a) => selftest(a, cli.threads),
    }
}

fn log_config(command: &str, threads: Option<usize>, args: &impl Serialize) {
    let line = json!({
        "command": command,
        "threads": threads.unwrap_or_else(rayon::current_num_threads),
        "args": args,
    });
    eprintln!("config: {line}");
}

fn params(m: &ModelArgs) -> Result<(HlvParams, TimeGrid), Failure> {
    let p =
        HlvParams::new(m.nu, m.beta, m.rate, m.spot).map_err(|e| Failure::Usage(e.to_string()))?;
    let grid = TimeGrid::new(m.maturity, m.steps).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((p, grid))
}

fn table(dirnums: &Option<PathBuf>) -> Result<Arc<DirectionNumbers>, Error> {
    match dirnums {
        Some(path) => Ok(Arc::new(DirectionNumbers::load(path)?)),
        None => Ok(DirectionNumbers::builtin()),
    }
}

fn stream(s: &SamplingArgs, dim: usize) -> Result<UniformStream, Failure> {
    if s.paths == 0 {
        return Err(Failure::Usage("--paths must be positive".into()));
    }
    Ok(match s.sequence {
        SequenceKind::Sobol => UniformStream::sobol(&*table(&s.dirnums)?, dim)?,
        SequenceKind::MersenneTwister => UniformStream::mersenne(s.seed, dim)?,
    })
}

fn option_spec(strike: f64, grid: &TimeGrid) -> Result<OptionSpec, Failure> {
    let spec = OptionSpec::geometric_asian(strike, grid.maturity(), grid.steps());
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

fn price(a: &PriceArgs, threads: Option<usize>) -> Outcome {
    log_config("price", threads, a);
    let (p, grid) = params(&a.model)?;
    let spec = option_spec(a.strike, &grid)?;
    let mut s = stream(&a.sampling, grid.steps())?;
    let est = mc_price(&spec, &p, &mut s, a.sampling.construction, a.sampling.paths)?;
    println!("price     {:.10}", est.value);
    if let Some(se) = est.std_error {
        println!("std_error {se:.10}");
    }
    println!("paths     {}", est.paths);
    Ok(EXIT_OK)
}

fn greeks_cmd(a: &GreeksArgs, threads: Option<usize>) -> Outcome {
    log_config("greeks", threads, a);
    let pa = &a.price;
    let (p, grid) = params(&pa.model)?;
    let spec = option_spec(pa.strike, &grid)?;
    if !(a.shift_spot_pct > 0.0 && a.shift_param_pct > 0.0) {
        return Err(Failure::Usage("shift percentages must be positive".into()));
    }
    let shifts = GreekShifts::relative(&p, a.shift_spot_pct / 100.0, a.shift_param_pct / 100.0);
    let mut s = stream(&pa.sampling, grid.steps())?;
    let (c, n) = (pa.sampling.construction, pa.sampling.paths);
    if a.spot_only {
        let g = spot_greeks(&spec, &p, &mut s, c, n, shifts, Recycling::Recycled)?;
        println!("price     {:.10}", g.price);
        println!("delta     {:.10}", g.delta);
        println!("gamma     {:.10}", g.gamma);
    } else {
        let g = greeks(&spec, &p, &mut s, c, n, shifts)?;
        println!("price     {:.10}", g.price);
        println!("delta     {:.10}", g.delta);
        println!("gamma     {:.10}", g.gamma);
        println!("vega_nu   {:.10}", g.vega_nu);
        println!("vega_beta {:.10}", g.vega_beta);
    }
    Ok(EXIT_OK)
}

fn smile(a: &SmileArgs, threads: Option<usize>) -> Outcome {
    let strikes = match &a.strikes {
        Some(List(k)) => k.clone(),
        None => [0.5, 0.75, 1.0, 1.25, 1.5]
            .iter()
            .map(|f| f * a.model.spot)
            .collect(),
    };
    log_config(
        "smile",
        threads,
        &json!({ "resolved_strikes": strikes, "flags": a }),
    );
    let (p, grid) = params(&a.model)?;
    if let Some(k) = strikes.iter().find(|&&k| !(k > 0.0)) {
        return Err(Failure::Usage(format!("strikes must be positive, got {k}")));
    }
    println!("strike,price,implied_vol");
    if strikes.is_empty() {
        return Ok(EXIT_OK);
    }
    let mut s = stream(&a.sampling, grid.steps())?;
    let curve = implied_vol_curve(
        &p,
        &strikes,
        grid,
        &mut s,
        a.sampling.construction,
        a.sampling.paths,
    )?;
    for pt in curve {
        let iv = match pt.implied_vol {
            Some(v) => format!("{v:.10}"),
            None => {
                eprintln!(
                    "warning: no implied volatility at strike {} (price {:.10})",
                    pt.strike, pt.price
                );
                "NaN".to_string()
            }
        };
        println!("{},{:.10},{iv}", pt.strike, pt.price);
    }
    Ok(EXIT_OK)
}

fn converge(a: &ConvergeArgs, threads: Option<usize>) -> Outcome {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let p = &mut cfg.params;
    macro_rules! set {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src.clone() {
                $dst = v;
            }
        };
    }
    set!(p.spot, a.spot);
    set!(p.rate, a.rate);
    set!(p.nu, a.nu);
    set!(p.beta, a.beta);
    set!(cfg.maturity, a.maturity);
    set!(cfg.steps, a.steps);
    set!(cfg.runs, a.runs);
    set!(cfg.reference_paths, a.reference_paths);
    set!(cfg.seed, a.seed);
    set!(cfg.shift_spot_pct, a.shift_spot_pct);
    set!(cfg.shift_param_pct, a.shift_param_pct);
    if let Some(List(v)) = &a.strikes {
        cfg.strikes = v.clone();
    }
    if let Some(List(v)) = &a.path_grid {
        cfg.path_grid = v.clone();
    }
    if let Some(List(v)) = &a.methods {
        cfg.methods = v.clone();
    }
    if let Some(List(v)) = &a.quantities {
        cfg.quantities = v.clone();
    }
    if a.dirnums.is_some() {
        cfg.dirnums = a.dirnums.clone();
    }
    log_config("converge", threads, &json!({ "out": a.out, "study": cfg }));
    cfg.validate()?;
    let report = Study::new(cfg)?.run()?;
    emit_report(&report, &a.out)?;
    println!(
        "{:<10} {:>8} {:<16} {:>8} {:>8}",
        "quantity", "strike", "method", "alpha", "r2"
    );
    for c in &report.curves {
        let (alpha, r2) = match c.fit {
            Some(f) => (format!("{:.4}", f.alpha), format!("{:.4}", f.r_squared)),
            None => ("-".into(), "-".into()),
        };
        println!(
            "{:<10} {:>8} {:<16} {alpha:>8} {r2:>8}",
            c.quantity.name(),
            c.strike,
            c.method.to_string()
        );
    }
    Ok(EXIT_OK)
}

fn selftest(a: &SelftestArgs, threads: Option<usize>) -> Outcome {
    log_config("selftest", threads, a);
    let table = table(&a.dirnums)?;
    let mut failures = 0;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let first = UniformStream::sobol(&table, table.max_dimension())?.next_point()?;
    check(
        "sobol-first-point",
        first.iter().all(|&x| x == 0.5),
        format!("{} coordinates", first.len()),
    );

    let worst = (1..1000)
        .map(|i| {
            let u = i as f64 / 1000.0;
            (norm_cdf(inv_normal_cdf(u).unwrap_or(f64::NAN)) - u).abs()
        })
        .fold(0.0, f64::max);
    check(
        "inverse-normal-round-trip",
        worst <= 1e-9,
        format!("max error {worst:.2e}"),
    );

    let grid = TimeGrid::new(1.0, 64)?;
    let plan = BridgePlan::new(&grid);
    let var_err = (1..=64)
        .map(|i| (plan_variance(&plan, i) - grid.time(i)).abs())
        .fold(0.0, f64::max);
    check(
        "bridge-variance",
        var_err <= 1e-12,
        format!("max error {var_err:.2e}"),
    );

    let bs = HlvParams::new(0.3, 1.0, 0.03, 100.0)?;
    let spec = OptionSpec::geometric_asian(100.0, 1.0, 256);
    let exact = bs_geometric_asian_closed_form(&bs, &spec)?;
    let mut s = UniformStream::sobol(&table, 256)?;
    let est = mc_price(&spec, &bs, &mut s, Construction::BrownianBridge, 1 << 14)?;
    let rel = (est.value - exact).abs() / exact;
    check(
        "beta-one-closed-form",
        rel < 2e-3,
        format!("{:.6} vs {exact:.6}, relative {rel:.2e}", est.value),
    );

    Ok(if failures == 0 { EXIT_OK } else { EXIT_NUMERIC })
}

/// `Var[W(t_i)]` of the bridge, obtained by pushing unit vectors through the plan.
fn plan_variance(plan: &BridgePlan, i: usize) -> f64 {
    let n = plan.steps();
    let builder = crate::path::PathBuilder::Bridge(plan.clone());
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n + 1];
    let mut var = 0.0;
    for k in 0..n {
        z.fill(0.0);
        z[k] = 1.0;
        builder.fill(&z, &mut w);
        var += w[i] * w[i];
    }
    var
}
