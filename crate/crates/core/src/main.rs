use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use holoform::harness::{emit_report, run_suite, write_report, ReportFormat, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "holoform", version, about = "Seeded numerical checks for holomorphic Riemannian geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a check suite and emit a report.
    Check(CheckArgs),
    /// List suites and their checks with default tolerances.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Text => ReportFormat::Text,
        }
    }
}

#[derive(clap::Args)]
struct CheckArgs {
    /// lie-identities, psl-curvature, g-space, quadrics, rotpi-cover,
    /// symmetric-scaling, symmetric-curvature or all.
    suite: Suite,
    #[arg(long, env = "HOLOFORM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Override a check tolerance, e.g. `--tol g-curvature=1e-5`.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_override)]
    tol: Vec<(String, f64)>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value.parse().map_err(|e| format!("bad tolerance `{value}`: {e}"))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("tolerance for `{name}` must be positive"));
    }
    Ok((name.to_owned(), value))
}

fn check(args: CheckArgs) -> holoform::Result<bool> {
    let cfg = SuiteConfig {
        suite: args.suite,
        seed: args.seed,
        samples: usize::try_from(args.samples).map_err(|_| holoform::Error::InvalidArgument("samples out of range"))?,
        tolerance_overrides: args.tol.into_iter().collect::<BTreeMap<_, _>>(),
        output_path: args.out,
        timing: args.timing,
    };
    let report = run_suite(&cfg)?;
    let bytes = emit_report(&report, args.format.into())?;
    match &cfg.output_path {
        Some(path) => write_report(path, &bytes)?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|source| holoform::Error::Io { path: PathBuf::from("<stdout>"), source })?,
    }
    for c in report.failures() {
        match &c.error {
            Some(e) => eprintln!("{}/{}: error: {e}", c.suite, c.name),
            None => eprintln!("{}/{}: residual {:.5e} exceeds tolerance {:.5e}", c.suite, c.name, c.max_residual, c.tolerance),
        }
    }
    Ok(report.pass)
}

fn list() -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    for suite in Suite::CONCRETE {
        writeln!(out, "{suite}")?;
        for name in suite.check_names() {
            let tol = suite.default_tolerance(name).unwrap_or(f64::NAN);
            writeln!(out, "  {name:<32} {tol:.1e}")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => match list() {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("holoform: {e}");
                ExitCode::from(2)
            }
        },
        Command::Check(args) => match check(args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("holoform: {e}");
                ExitCode::from(2)
            }
        },
    }
}
