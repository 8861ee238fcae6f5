use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ulfo_core::gdta::{self, Verdict};
use ulfo_core::report::AnalysisReport;
use ulfo_core::sim::{self, positive_peaks};
use ulfo_core::study::{self, MonteCarloSummary, ScenarioRanges, SweepSpec, RNG_ALGORITHM};
use ulfo_core::{Basis, Error, Param, SimConfig, SystemModel, SystemParams};

const THREADS_ENV: &str = "ULFO_THREADS";

#[derive(Parser)]
#[command(name = "ulfo", version, about = "Ultra-low-frequency oscillation analysis of a hydro single-machine system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, damping decomposition and stability verdict (JSON)
    Analyze(AnalyzeArgs),
    /// Governor damping criterion (JSON)
    Criterion(CriterionArgs),
    /// Time-domain response to an initial disturbance (CSV)
    Simulate(SimulateArgs),
    /// One-parameter sweep of the dominant mode (CSV)
    Sweep(SweepArgs),
    /// Randomized scenarios around the parameter file (CSV + summary JSON)
    Montecarlo(MonteCarloArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Parameter file (JSON object with TJ, D, KL, TW, KP2, Ty, KP1, KI1, bP)
    params: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate the torque coefficients at the self-consistent frequency
    #[arg(long)]
    refine: bool,
}

#[derive(Args)]
struct CriterionArgs {
    params: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation frequency in rad/s (default: dominant eigenfrequency)
    #[arg(long)]
    omega: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    params: PathBuf,
    /// Integration step (s)
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Simulated time (s)
    #[arg(long, default_value_t = 600.0)]
    t_end: f64,
    /// Initial state entry as KEY:VALUE with KEY in f, Tmd|x, mu, yL; repeatable
    #[arg(long = "disturb", value_name = "KEY:VALUE")]
    disturb: Vec<String>,
    /// State basis: original or jerk
    #[arg(long, default_value = "original")]
    basis: Basis,
    /// Trace CSV path; without it the trace goes to stdout and the summary to stderr
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    params: PathBuf,
    /// Parameter to vary: TJ, D, KL, TW, KP2, Ty, KP1, KI1 or bP
    #[arg(long)]
    param: String,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Sweep CSV path; without it the CSV goes to stdout and the summary to stderr
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MonteCarloArgs {
    params: PathBuf,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Each parameter is drawn from [1 - spread, 1 + spread] times its file value
    #[arg(long, default_value_t = 0.5)]
    spread: f64,
    /// Scenario CSV path
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the summary JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CriterionOutput {
    omega: f64,
    ratio: f64,
    verdict: Verdict,
    d_m: f64,
    path1: f64,
    path2: f64,
}

#[derive(Serialize)]
struct MonteCarloOutput<'a> {
    rng_algorithm: &'static str,
    seed: u64,
    spread: f64,
    #[serde(flatten)]
    summary: &'a MonteCarloSummary,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}

fn configure_threads() -> ulfo_core::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a non-negative integer, got `{raw}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    Ok(())
}

fn run(command: Command) -> ulfo_core::Result<()> {
    match command {
        Command::Analyze(a) => analyze(a),
        Command::Criterion(a) => criterion(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Montecarlo(a) => montecarlo(a),
    }
}

fn analyze(args: AnalyzeArgs) -> ulfo_core::Result<()> {
    let p = SystemParams::from_path(&args.params)?;
    let report = AnalysisReport::compute(&p, args.refine)?;
    write_json(&report, args.out.as_deref())
}

fn criterion(args: CriterionArgs) -> ulfo_core::Result<()> {
    let p = SystemParams::from_path(&args.params)?;
    let omega = match args.omega {
        Some(w) => w,
        None => gdta::eigen_omega(&p)?,
    };
    let c = gdta::proportional_criterion(&p, omega)?;
    let d = gdta::damping_decomposition(&p, omega)?;
    let out = CriterionOutput {
        omega,
        ratio: c.ratio,
        verdict: c.verdict,
        d_m: d.d_m,
        path1: d.path1,
        path2: d.path2,
    };
    write_json(&out, args.out.as_deref())
}

fn parse_disturbance(specs: &[String]) -> ulfo_core::Result<[f64; 4]> {
    if specs.is_empty() {
        return Ok(SimConfig::DEFAULT_DISTURBANCE);
    }
    let mut x0 = [0.0; 4];
    for spec in specs {
        let (key, value) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidConfig(format!("--disturb expects KEY:VALUE, got `{spec}`")))?;
        let index = match key {
            "f" => 0,
            "Tmd" | "x" => 1,
            "mu" => 2,
            "yL" => 3,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "--disturb key must be one of f, Tmd, x, mu, yL, got `{key}`"
                )))
            }
        };
        x0[index] = value
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("--disturb value for {key} is not a number: `{value}`")))?;
    }
    Ok(x0)
}

fn simulate(args: SimulateArgs) -> ulfo_core::Result<()> {
    let x0 = parse_disturbance(&args.disturb)?;
    let cfg = SimConfig::new(args.dt, args.t_end, x0, args.basis)?;
    let p = SystemParams::from_path(&args.params)?;
    let model = SystemModel::new(p)?;
    let trace = sim::simulate(&model.matrix(args.basis), &cfg)?;

    let df: Vec<f64> = trace.frequency().collect();
    let window = (df.len() / 10).max(1);
    let peak_abs = |xs: &[f64]| xs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let amplitude_start = peak_abs(&df[..window]);
    let amplitude_end = peak_abs(&df[df.len() - window..]);
    let summary = match sim::estimate_damping(&trace) {
        Ok(est) => format!(
            "method=log_decrement sigma={} omega={} peaks={} amplitude_start={amplitude_start} amplitude_end={amplitude_end}",
            est.sigma, est.omega, est.peak_count
        ),
        Err(Error::InsufficientCycles { .. }) => {
            // too few oscillations: fall back to the overall envelope decay
            let sigma = (amplitude_end / amplitude_start).ln() / args.t_end;
            format!(
                "method=envelope sigma={sigma} omega=NaN peaks={} amplitude_start={amplitude_start} amplitude_end={amplitude_end}",
                positive_peaks(&trace.times, &df).len()
            )
        }
        Err(e) => return Err(e),
    };

    match &args.csv {
        Some(path) => {
            write_file(path, |w| trace.write_csv(w))?;
            stdout_line(&summary)?;
        }
        None => {
            trace.write_csv(BufWriter::new(io::stdout().lock()))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> ulfo_core::Result<()> {
    let param: Param = args.param.parse()?;
    let p = SystemParams::from_path(&args.params)?;
    let default = SweepSpec::default_for(param, p)?;
    let (lo, hi) = (default.grid[0], default.grid[default.grid.len() - 1]);
    let spec = SweepSpec::linspace(param, args.from.unwrap_or(lo), args.to.unwrap_or(hi), args.steps, p)?;
    let result = study::sweep(&spec)?;
    let summary = result.summary.map(|s| {
        format!(
            "param={param} trend={} sign_changes={} min_re_lambda={} argmin={} skipped={}",
            serde_json::to_value(s.trend).expect("enum serializes").as_str().unwrap_or_default(),
            s.sign_changes,
            s.min_re_lambda,
            s.argmin_value,
            s.skipped
        )
    });

    match &args.csv {
        Some(path) => {
            write_file(path, |w| result.write_csv(w))?;
            if let Some(s) = summary {
                stdout_line(&s)?;
            }
        }
        None => {
            result.write_csv(BufWriter::new(io::stdout().lock()))?;
            if let Some(s) = summary {
                eprintln!("{s}");
            }
        }
    }
    Ok(())
}

fn montecarlo(args: MonteCarloArgs) -> ulfo_core::Result<()> {
    if !(args.spread.is_finite() && (0.0..=1.0).contains(&args.spread)) {
        return Err(Error::InvalidConfig(format!("--spread must lie in [0, 1], got {}", args.spread)));
    }
    let p = SystemParams::from_path(&args.params)?;
    let ranges = if args.spread == 0.0 {
        ScenarioRanges::degenerate(p)
    } else {
        ScenarioRanges::uniform(p, 1.0 - args.spread, 1.0 + args.spread)
    };
    let scenarios = study::sample_scenarios(&ranges, args.n, args.seed)?;
    let result = study::montecarlo_dm(&scenarios);
    if let Some(path) = &args.csv {
        write_file(path, |w| result.write_csv(w))?;
    }
    let out = MonteCarloOutput {
        rng_algorithm: RNG_ALGORITHM,
        seed: args.seed,
        spread: args.spread,
        summary: &result.summary,
    };
    write_json(&out, args.out.as_deref())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> ulfo_core::Result<()>) -> ulfo_core::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> ulfo_core::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => stdout_line(&text)?,
    }
    Ok(())
}

fn stdout_line(text: &str) -> ulfo_core::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}
