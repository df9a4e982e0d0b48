use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sofft::bench::{
    amplitude_models, gen_sparse_signal, render_heatmap, run_sweep, write_csv, ExperimentConfig,
    MeasurementUnits, SUPPORT_THRESHOLD,
};
use sofft::dft::fft_forward;
use sofft::grid::{l2_norm, linf_norm};
use sofft::recovery::RecoveryParams;
use sofft::schedule::{schedules, ScheduleOptions};
use sofft::selftest::{run_checks, Budget, SelftestOptions};
use sofft::signal_io::{read_signal, support_path, write_signal, write_support, SignalFormat, SupportFile};
use sofft::{sparse_fft, Error, GridDims, SampleOracle, Seed};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "sofft", version, about = "Sparse Fourier transform with sample reuse")]
struct Cli {
    /// Master seed; the SOFFT_SEED environment variable takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an exactly k-sparse signal and its support sidecar.
    Gen(GenArgs),
    /// Recover a sparse signal from its spectrum.
    Recover(RecoverArgs),
    /// Run a phase-transition sweep and write CSV (and optionally SVG).
    Experiment(ExperimentArgs),
    /// Run the named self-checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Grid dimension and side length.
    #[arg(long, num_args = 2, value_names = ["D", "N"], default_values_t = [1, 4096])]
    dims: Vec<usize>,
    #[arg(long)]
    k: usize,
    /// Amplitude model name.
    #[arg(long, default_value = "pm-one")]
    model: String,
    #[arg(long)]
    out: PathBuf,
    /// Write JSON instead of the binary format (at most 4096 points).
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// Boxcar of about k+1 taps with geometric thresholds; for exactly sparse input.
    Experiment,
    /// Bucket count and filter order from the analysis; needs --mu.
    Theory,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    /// Time-domain signal file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 18)]
    r_max: usize,
    #[arg(long, value_enum, default_value_t = Mode::Experiment)]
    mode: Mode,
    /// Threshold schedule name, overriding the mode's default.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, default_value_t = 1.2)]
    ratio: f64,
    #[arg(long)]
    floor: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    /// Noise level; required in theory mode.
    #[arg(long)]
    mu: Option<f64>,
    /// Output file of `index,re,im` lines (flat indices).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Use N = 2^15 instead of the desk-scale N = 2^12.
    #[arg(long)]
    paper: bool,
    #[arg(long, default_value = "experiment.csv")]
    out: PathBuf,
    /// Also render a heatmap to this SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Count real-valued measurements (two per complex sample).
    #[arg(long)]
    real_measurements: bool,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated sparsities (default 10,20,..,100).
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Comma-separated round counts (default 5,6,..,25).
    #[arg(long, value_delimiter = ',')]
    r_max: Vec<usize>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    ratio: Option<f64>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Reduced Monte-Carlo budget.
    #[arg(long)]
    quick: bool,
    /// Feed an even-determinant matrix to the parity check; it must fail.
    #[arg(long)]
    inject_even_det: bool,
    /// Run only these checks (repeatable).
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Print every detail line, not just failures.
    #[arg(long, short)]
    verbose: bool,
}

enum Failure {
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn effective_seed(flag: u64) -> Result<Seed, Failure> {
    match std::env::var("SOFFT_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Seed)
            .map_err(|_| Failure::Lib(Error::Parameter(format!("SOFFT_SEED={v:?} is not a u64")))),
        Err(_) => Ok(Seed(flag)),
    }
}

fn cmd_gen(args: &GenArgs, seed: Seed) -> Result<(), Failure> {
    let dims = GridDims::new(args.dims[0], args.dims[1])?;
    let model = amplitude_models().create(&args.model, &())?;
    let (x, support) = gen_sparse_signal(dims, args.k, model.as_ref(), &mut seed.rng())?;
    let format = if args.json { SignalFormat::Json } else { SignalFormat::Binary };
    write_signal(&x, &args.out, format)?;
    let sidecar = support_path(&args.out);
    write_support(
        &SupportFile {
            d: dims.d(),
            n: dims.n(),
            k: args.k,
            model: args.model.clone(),
            seed: seed.0,
            support: support.into_iter().collect(),
        },
        &sidecar,
    )?;
    println!("wrote {} ({} points, k = {})", args.out.display(), dims.len(), args.k);
    println!("wrote {}", sidecar.display());
    Ok(())
}

fn recovery_params(args: &RecoverArgs, dims: GridDims) -> Result<RecoveryParams, Failure> {
    let mut params = match args.mode {
        Mode::Experiment => RecoveryParams::experiment(args.k, args.r_max, args.ratio),
        Mode::Theory => {
            let mu = args
                .mu
                .filter(|&m| m > 0.0)
                .ok_or_else(|| Error::Parameter("theory mode needs a positive --mu".into()))?;
            RecoveryParams::theory(dims, args.k, args.eps, args.alpha, mu, args.r_max)
        }
    };
    let mut options = ScheduleOptions {
        ratio: args.ratio,
        ..ScheduleOptions::default()
    };
    if let Some(floor) = args.floor {
        options.floor = floor;
    }
    let name = args
        .schedule
        .clone()
        .unwrap_or_else(|| params.schedule.name().to_string());
    params.schedule = Arc::from(schedules().create(&name, &options)?);
    params.validate(dims)?;
    Ok(params)
}

fn cmd_recover(args: &RecoverArgs, seed: Seed) -> Result<(), Failure> {
    let x = read_signal(&args.input)?;
    let params = recovery_params(args, x.dims)?;
    let oracle = SampleOracle::new(fft_forward(&x))?;
    let out = sparse_fft(&oracle, &params, seed)?;
    let report = &out.report;

    let mut text = String::from("index,re,im\n");
    for (i, v) in out.estimate.iter() {
        writeln!(text, "{i},{:e},{:e}", v.re, v.im).expect("writing to a String");
    }
    fs::write(&args.out, text).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;

    let residual: Vec<_> = out
        .estimate
        .to_dense(x.dims.len())
        .iter()
        .zip(&x.values)
        .map(|(c, v)| v - c)
        .collect();
    let norm = x.norm();
    println!("samples_used {}", report.samples_used());
    println!("measurements {}", report.measurements);
    println!("iterations {}", report.iterations());
    println!("recovered {} coefficients ({} above {SUPPORT_THRESHOLD})", out.estimate.len(), out.estimate.support_above(SUPPORT_THRESHOLD).len());
    println!("residual_l2 {:e}", l2_norm(&residual));
    println!("residual_linf {:e}", linf_norm(&residual));
    println!("residual_l2_relative {:e}", l2_norm(&residual) / norm.max(f64::MIN_POSITIVE));
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs, seed: Seed) -> Result<(), Failure> {
    let mut config = if args.paper {
        ExperimentConfig::full_scale(seed)
    } else {
        ExperimentConfig::desk(seed)
    };
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if !args.k.is_empty() {
        config.k_list = args.k.clone();
    }
    if !args.r_max.is_empty() {
        config.r_max_list = args.r_max.clone();
    }
    if let Some(m) = &args.model {
        config.model = m.clone();
    }
    if let Some(r) = args.ratio {
        config.ratio = r;
    }
    config.validate()?;
    eprintln!(
        "sweeping {} cells x {} trials at N = {}",
        config.k_list.len() * config.r_max_list.len(),
        config.trials,
        config.dims.len()
    );
    let records = run_sweep(&config)?;
    let units = if args.real_measurements {
        MeasurementUnits::Real
    } else {
        MeasurementUnits::Complex
    };
    write_csv(&records, &args.out, units)?;
    println!("wrote {}", args.out.display());
    if let Some(svg) = &args.svg {
        render_heatmap(&records, svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

fn cmd_selftest(args: &SelftestArgs, seed: Seed) -> Result<(), Failure> {
    let options = SelftestOptions {
        budget: if args.quick { Budget::Reduced } else { Budget::Full },
        seed,
        inject_even_det: args.inject_even_det,
    };
    let reports = run_checks(&args.checks, &options)?;
    let mut failed = Vec::new();
    for r in &reports {
        println!(
            "{} {:<22} {:>8.2}s",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.elapsed.as_secs_f64()
        );
        for line in &r.details {
            if args.verbose || !r.passed {
                println!("     {line}");
            }
        }
        if !r.passed {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        Error::Parameter(_) => EXIT_USAGE,
        Error::Oracle(_) => EXIT_FAILURE,
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let seed = effective_seed(cli.seed)?;
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, seed),
        Command::Recover(a) => cmd_recover(a, seed),
        Command::Experiment(a) => cmd_experiment(a, seed),
        Command::Selftest(a) => cmd_selftest(a, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(names)) => {
            eprintln!("sofft: failed checks: {names}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("sofft: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
