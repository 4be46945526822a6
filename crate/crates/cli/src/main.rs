//! `chaos`: runs one verification suite and writes its report.
//!
//! Exit status is 0 when every identity passes, 1 when any fails and 2
//! for unusable input (bad experiment file, unknown suite, invalid
//! parameters).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chaos_core::mc::Execution;
use chaos_core::suites::{run, ExperimentSpec, Suite};
use chaos_core::{Error, Report};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chaos", version, about = "Verification suites for chaos decompositions on Poisson, compound Poisson and Gamma spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite, named here or by the experiment file.
    Run {
        suite: Option<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Compare the three Gamma inner-product routes and print the CSV table.
    Threepath {
        /// Highest chaos level (at most 8).
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the suite names.
    List,
}

#[derive(Args)]
struct RunOpts {
    /// Experiment file (`key = value` lines).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (parallel builds only).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

fn describe(err: &Error, source: Option<&Path>) -> String {
    match (err, source) {
        (Error::Config { line, column, message }, Some(p)) if *line > 0 => {
            format!("{}:{line}:{column}: {message}", p.display())
        }
        _ => err.to_string(),
    }
}

fn load_spec(suite: Option<&str>, opts: &RunOpts) -> Result<ExperimentSpec, Failure> {
    let mut spec = match &opts.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            let text = match suite {
                // a suite on the command line replaces the file's, so the file may omit it
                Some(s) if !text.lines().any(|l| l.trim_start().starts_with("suite")) => format!("suite = {s}\n{text}"),
                _ => text,
            };
            text.parse::<ExperimentSpec>().map_err(|e| Failure::config(describe(&e, Some(path))))?
        }
        None => {
            let name = suite.ok_or_else(|| Failure::config("name a suite or pass --spec"))?;
            ExperimentSpec::new(parse_suite(name)?)
        }
    };
    if let Some(s) = suite {
        spec.suite = parse_suite(s)?;
    }
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(n) = opts.samples {
        spec.samples = Some(n.max(1));
    }
    if let Some(out) = &opts.out {
        spec.out = Some(out.clone());
    }
    Ok(spec)
}

fn parse_suite(name: &str) -> Result<Suite, Failure> {
    name.parse::<Suite>().map_err(|e| Failure::config(describe(&e, None)))
}

fn execute(spec: &ExperimentSpec, threads: Option<usize>) -> Result<Report, Failure> {
    let go = || run(spec, Execution::default()).map_err(|e| Failure::config(describe(&e, None)));
    match threads {
        #[cfg(feature = "parallel")]
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?
            .install(go),
        #[cfg(not(feature = "parallel"))]
        Some(_) => go(),
        None => go(),
    }
}

fn emit(report: &Report, spec: &ExperimentSpec, format: Format) -> Result<(), Failure> {
    let body = match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    match &spec.out {
        Some(path) => fs::write(path, body).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run_command(spec: ExperimentSpec, opts: &RunOpts, default_format: Format) -> Result<bool, Failure> {
    let started = Instant::now();
    let report = execute(&spec, opts.threads)?;
    let secs = started.elapsed().as_secs_f64();
    emit(&report, &spec, opts.format.unwrap_or(default_format))?;
    let failed = report.failures().count();
    eprintln!(
        "{}: {} ({} identities, {failed} failed) in {secs:.2} s",
        report.suite,
        if report.pass { "PASS" } else { "FAIL" },
        report.identities.len()
    );
    for f in report.failures() {
        eprintln!("  FAIL {}: statistic {:e} > threshold {:e}", f.identity, f.statistic, f.threshold);
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::List => {
            for s in Suite::ALL {
                println!("{s}");
            }
            Ok(true)
        }
        Command::Run { suite, opts } => {
            load_spec(suite.as_deref(), &opts).and_then(|spec| run_command(spec, &opts, Format::Json))
        }
        Command::Threepath { n, opts } => load_spec(Some(Suite::GammaInnerThreepath.name()), &opts).and_then(|mut spec| {
            if n.is_some() {
                spec.n = n;
            }
            run_command(spec, &opts, Format::Csv)
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
