use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qfextreme::experiments::config::default_workers;
use qfextreme::experiments::{diagnose_sweep, parse_grid, render, verify_constants, ExperimentConfig, OutputFormat};
use qfextreme::rng::parse_seed;
use qfextreme::tail::{tail_asymptotic, tail_mc, TailQuery};
use qfextreme::{substream, Error, ExtremalMode, FieldKind, Spectrum};

const EXIT_ACCEPTANCE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "qfextreme",
    version,
    about = "Extremal statistics of quadratic forms of Haar columns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Plotdata,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Plotdata => OutputFormat::Plotdata,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    MaxSigned,
    MaxAbs,
    Min,
}

impl From<Mode> for ExtremalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::MaxSigned => ExtremalMode::MaxSigned,
            Mode::MaxAbs => ExtremalMode::MaxAbs,
            Mode::Min => ExtremalMode::Min,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    Real,
    Complex,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed (decimal or 0x-hex).
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Check closed-form constants against independent oracles.
    VerifyConstants,
    /// Leading-order tail of Σ a_i y_i² with an optional Monte Carlo estimate.
    Tail {
        /// Comma-separated spectrum, e.g. `1,0.5`.
        #[arg(long, allow_hyphen_values = true)]
        spectrum: String,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value = "max-signed")]
        mode: Mode,
        /// Monte Carlo sample count; 0 skips the estimate.
        #[arg(long, default_value_t = 0)]
        samples: u64,
        #[arg(long, default_value = "0")]
        seed: String,
    },
    /// Median coupling diagnostics over an (N, k) grid.
    Diagnose {
        /// Grid points `NxK`, comma separated.
        #[arg(long, default_value = "1000x5,2000x10,4000x20")]
        grid: String,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long, default_value = "0")]
        seed: String,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value = "real")]
        field: Field,
    },
}

/// Failures that exit with a code other than the config one.
enum Failure {
    Input(Error),
    Runtime(Error),
    Acceptance,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidArgument(_) | Error::Domain(_) => Failure::Input(e),
            other => Failure::Runtime(other),
        }
    }
}

fn parse_spectrum(text: &str) -> Result<Spectrum, Error> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("spectrum value `{v}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Spectrum::new(values)
}

fn simulate(
    config: PathBuf,
    seed: Option<String>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_path(&config).map_err(|e| match e {
        Error::Io { .. } => Failure::Input(e),
        other => other.into(),
    })?;
    if let Some(s) = seed {
        cfg.seed = parse_seed(&s)?;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let result = qfextreme::experiments::run(&cfg)?;
    let text = render(&result, format.into())?;
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|source| Failure::Runtime(Error::Io { path, source }))?,
        None => print!("{text}"),
    }
    for s in &result.sources {
        eprintln!(
            "{:?}: KS vs limit {:.4}{}",
            s.source,
            s.ks_vs_limit,
            s.ks_vs_exact.map_or(String::new(), |d| format!(", KS vs exact {d:.4}"))
        );
    }
    if let Some(d) = result.ks_two_sample {
        eprintln!("two-sample KS {d:.4}");
    }
    for c in &result.acceptance {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("{tag} {} = {:.4} (threshold {})", c.name, c.value, c.threshold);
    }
    if result.accepted() {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn tail(spectrum: &str, t: f64, mode: Mode, samples: u64, seed: &str) -> Result<(), Failure> {
    let query = TailQuery::new(parse_spectrum(spectrum)?, t, mode.into())?;
    match tail_asymptotic(&query) {
        Ok(a) => println!(
            "asymptotic {:.10e}{}",
            a.value,
            if a.clipped { " (clipped)" } else { "" }
        ),
        Err(e) => println!("asymptotic unavailable: {e}"),
    }
    if samples > 0 {
        let est = tail_mc(&query, samples, &mut substream(parse_seed(seed)?, 0))?;
        println!(
            "monte_carlo {:.10e} stderr {:.3e} hits {} samples {}",
            est.estimate, est.stderr, est.hits, est.samples
        );
    }
    Ok(())
}

fn diagnose(grid: &str, replicas: usize, seed: &str, workers: Option<usize>, field: Field) -> Result<(), Failure> {
    let field = match field {
        Field::Real => FieldKind::Real,
        Field::Complex => FieldKind::Complex,
    };
    let rows = diagnose_sweep(
        &parse_grid(grid)?,
        replicas,
        parse_seed(seed)?,
        workers.unwrap_or_else(default_workers),
        field,
    )?;
    println!(
        "n,k,replicas,median_eps,eps_bound,median_max_l,l_bound,median_max_delta,median_max_delta_gap,median_max_inner"
    );
    for r in &rows {
        println!(
            "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            r.n,
            r.k,
            r.replicas,
            r.median_eps,
            r.eps_bound,
            r.median_l,
            r.l_bound,
            r.median_delta,
            r.median_delta_gap,
            r.median_inner
        );
        if !r.eps_ok() {
            log::warn!(
                "({}, {}): median eps / bound = {:.3}",
                r.n,
                r.k,
                r.median_eps / r.eps_bound
            );
        }
        if !r.l_ok() {
            log::warn!(
                "({}, {}): median max L / bound = {:.3}",
                r.n,
                r.k,
                r.median_l / r.l_bound
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate {
            config,
            seed,
            workers,
            out,
            format,
        } => simulate(config, seed, workers, out, format),
        Command::VerifyConstants => {
            let report = verify_constants();
            print!("{report}");
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Acceptance)
            }
        }
        Command::Tail {
            spectrum,
            t,
            mode,
            samples,
            seed,
        } => tail(&spectrum, t, mode, samples, &seed),
        Command::Diagnose {
            grid,
            replicas,
            seed,
            workers,
            field,
        } => diagnose(&grid, replicas, &seed, workers, field),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Acceptance) => ExitCode::from(EXIT_ACCEPTANCE),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
