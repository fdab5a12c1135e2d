use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use meanforge_core::matrix_io::MatrixFile;
use meanforge_core::schedule::make_schedule;
use meanforge_core::{HermitianMatrix, RationalWeight};
use meanforge_verifier::report::{render_report, Format};
use meanforge_verifier::suite::ExplicitInstance;
use meanforge_verifier::{run_suite, run_suite_with_instance, Field, Level, TrialConfig};
use serde::Serialize;

/// Randomized checks of dyadic refinements of the Young inequality.
#[derive(Parser)]
#[command(name = "meanforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar inequalities on random positive pairs.
    Scalar(RunArgs),
    /// Loewner-order inequalities on random positive definite pairs.
    Operator(RunArgs),
    /// Hilbert-Schmidt norm inequalities.
    Hsnorm(RunArgs),
    /// Every level.
    All(RunArgs),
    /// Print the coefficient schedule of a weight.
    Schedule(ScheduleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Weight p/q; repeat to cycle through several.
    #[arg(long = "nu", value_name = "P/Q")]
    nu: Vec<RationalWeight>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = meanforge_core::DEFAULT_DEPTH)]
    depth: usize,
    #[arg(long, default_value_t = meanforge_core::DEFAULT_TOLERANCE)]
    tol: f64,
    /// Master seed; MEANFORGE_SEED takes precedence when set.
    #[arg(long, default_value_t = meanforge_verifier::config::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Field::Real)]
    field: Field,
    /// Largest condition number of generated matrices.
    #[arg(long = "cond", default_value_t = 1e4)]
    cond: f64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// JSON file with matrices "a", "b" and optionally "x" to use instead of generated ones.
    #[arg(long = "matrix-file", value_name = "PATH")]
    matrix_file: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long = "nu", value_name = "P/Q")]
    nu: RationalWeight,
    #[arg(long, default_value_t = 16)]
    depth: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn master_seed(flag: u64) -> anyhow::Result<u64> {
    match std::env::var("MEANFORGE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("MEANFORGE_SEED={v:?} is not a 64-bit integer")),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => bail!("MEANFORGE_SEED: {e}"),
    }
}

fn load_instance(path: &PathBuf) -> anyhow::Result<ExplicitInstance> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = MatrixFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(ExplicitInstance {
        a: HermitianMatrix::new(file.a).context("matrix a")?,
        b: HermitianMatrix::new(file.b).context("matrix b")?,
        x: file.x,
    })
}

fn write_output(bytes: &[u8], out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .context("writing standard output"),
    }
}

fn run(level: Level, args: RunArgs) -> anyhow::Result<ExitCode> {
    let defaults = TrialConfig::default();
    let config = TrialConfig {
        master_seed: master_seed(args.seed)?,
        trials: args.trials,
        dim: args.dim,
        nu_list: if args.nu.is_empty() {
            defaults.nu_list
        } else {
            args.nu
        },
        depth: args.depth,
        tol: args.tol,
        field: args.field,
        condition_cap: args.cond,
    };
    let report = match &args.matrix_file {
        Some(path) => run_suite_with_instance(&config, level, &load_instance(path)?),
        None => run_suite(&config, level),
    }
    .map_err(anyhow::Error::msg)?;
    write_output(&render_report(&report, args.format), args.out.as_ref())?;

    let s = &report.summary;
    eprintln!(
        "{} trials, {} verdicts, {} failures, {} equality cases",
        s.trials, s.verdicts, s.failures, s.equality_cases
    );
    for f in s.failed.iter().take(20) {
        eprintln!("FAIL trial {} (seed {}): {}", f.trial, f.seed, f.id);
    }
    Ok(if s.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Serialize)]
struct ScheduleRow {
    k: usize,
    m: String,
    r: String,
    lower_exponent: f64,
    upper_exponent: f64,
}

#[derive(Serialize)]
struct ScheduleDoc {
    nu: RationalWeight,
    depth: usize,
    termination_index: Option<usize>,
    exact: bool,
    entries: Vec<ScheduleRow>,
}

fn schedule(args: ScheduleArgs) -> anyhow::Result<ExitCode> {
    let s = make_schedule(args.nu, args.depth)?;
    let entries = s
        .entries()
        .iter()
        .map(|e| {
            let (p, q) = e.r_exact();
            ScheduleRow {
                k: e.k,
                m: e.m.to_string(),
                r: format!("{p}/{q}"),
                lower_exponent: e.lower_exponent(),
                upper_exponent: e.upper_exponent(),
            }
        })
        .collect();
    let doc = ScheduleDoc {
        nu: s.nu(),
        depth: s.depth(),
        termination_index: s.termination_index(),
        exact: s.is_exact(),
        entries,
    };
    let mut out = Vec::new();
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &doc)?;
            out.push(b'\n');
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for row in &doc.entries {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    write_output(&out, None)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scalar(a) => run(Level::Scalar, a),
        Command::Operator(a) => run(Level::Operator, a),
        Command::Hsnorm(a) => run(Level::Hsnorm, a),
        Command::All(a) => run(Level::All, a),
        Command::Schedule(a) => schedule(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
