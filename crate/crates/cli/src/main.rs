//! `vmt`: modify images, compare them, generate metamorphic suites and run
//! them against a system under test.
//!
//! Exit codes: 0 success (for `run`: every case passed), 1 at least one
//! failing case, 2 usage, configuration or I/O error.

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use vmt_core::diff::{mse, mssim, SsimParams};
use vmt_core::image::{load_image, save_image};
use vmt_core::modifiers::{apply, Modification, Operator};
use vmt_core::report::{export_report, render, ReportFormat, ReportOptions};
use vmt_core::runner::{run_suite, RunOptions};
use vmt_core::suite::{generate_suites, load_suite, parse_modifications, save_suite};
use vmt_core::sut::{MockSut, SutAdapter, DEFAULT_IOU_THRESHOLD, DEFAULT_TIMEOUT_MS};

#[derive(Debug, Parser)]
#[command(name = "vmt", version, about = "Metamorphic testing for computer-vision systems")]
struct Cli {
    /// Seed for stochastic operators (`modify`), and the default seed for
    /// modifications that omit one (`gen`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress informational output on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply one modification to an image and write the result as PNG.
    Modify {
        #[arg(long)]
        op: String,
        /// Operator parameters as a JSON object.
        #[arg(long, default_value = "{}")]
        params: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a similarity metric between two images.
    Diff {
        #[arg(long, value_enum, default_value_t = Metric::Ssim)]
        metric: Metric,
        a: PathBuf,
        b: PathBuf,
    },
    /// Derive the similar and severe suites from an initial suite.
    Gen {
        #[arg(long)]
        suite: PathBuf,
        /// JSON array of modifications.
        #[arg(long)]
        mods: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a suite against a system under test and write a report.
    Run {
        #[arg(long)]
        suite: PathBuf,
        /// `mock` for the built-in detector, otherwise a command line that
        /// starts a protocol adapter.
        #[arg(long)]
        sut: String,
        /// Report file. Without it the report goes to standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Defaults to the report's extension, else csv.
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
        iou: f64,
        /// Also compute MSE against the source image.
        #[arg(long)]
        mse: bool,
        /// Clamp SSIM to [0, 1] in Markdown reports.
        #[arg(long)]
        clamp01: bool,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_MS)]
        timeout_ms: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Metric {
    Ssim,
    Mse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Md,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
            Format::Md => ReportFormat::Md,
        }
    }
}

struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Modify {
            op,
            params,
            input,
            out,
        } => {
            let params: Map<String, Value> =
                serde_json::from_str(params).map_err(|e| format!("--params: {e}"))?;
            let operator = Operator::from_json(op, &params)?;
            let m = Modification::new(operator, cli.seed.unwrap_or(0), None)?;
            let img = load_image(input)?;
            save_image(&apply(&m, &img)?, out)?;
            println!("{}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Diff { metric, a, b } => {
            let (a, b) = (load_image(a)?, load_image(b)?);
            let value = match metric {
                Metric::Ssim => mssim(&a, &b, &SsimParams::default())?.mean,
                Metric::Mse => mse(&a, &b)?,
            };
            println!("{value:.6}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            suite,
            mods,
            out_dir,
        } => {
            let initial = load_suite(suite)?;
            let text = std::fs::read_to_string(mods)
                .map_err(|e| format!("{}: {e}", mods.display()))?;
            let mods = parse_modifications(&with_default_seed(&text, cli.seed))
                .map_err(|e| format!("{}: {e}", mods.display()))?;
            let (similar, severe) = generate_suites(&initial, &mods, out_dir)?;
            save_suite(&similar, out_dir.join("similar.json"))?;
            save_suite(&severe, out_dir.join("severe.json"))?;
            for (name, s) in [("similar", &similar), ("severe", &severe)] {
                if s.is_empty() && !cli.quiet {
                    eprintln!("warning: the {name} suite is empty");
                }
            }
            println!("similar: {}, severe: {}", similar.len(), severe.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            suite,
            sut,
            report,
            format,
            workers,
            iou,
            mse,
            clamp01,
            timeout_ms,
        } => {
            if !(0.0..=1.0).contains(iou) {
                return Err(Failure(format!("--iou must lie in [0, 1], got {iou}")));
            }
            let format = format
                .map(ReportFormat::from)
                .or_else(|| report.as_deref().and_then(ReportFormat::from_path))
                .unwrap_or(ReportFormat::Csv);
            let suite = load_suite(suite)?;
            if suite.is_empty() {
                return Err(Failure("the suite has no cases".into()));
            }
            let opts = RunOptions {
                workers: *workers,
                ssim: SsimParams::default(),
                iou_threshold: *iou,
                mse: *mse,
            };
            let (rows, summary) = if sut == "mock" {
                run_suite(&suite, || MockSut, &opts)?
            } else {
                let command = shlex::split(sut)
                    .filter(|c| !c.is_empty())
                    .ok_or_else(|| format!("--sut: cannot parse command line {sut:?}"))?;
                let timeout = Duration::from_millis(*timeout_ms);
                run_suite(
                    &suite,
                    || SutAdapter::new(command.clone()).with_timeout(timeout),
                    &opts,
                )?
            };
            let ropts = ReportOptions { clamp01: *clamp01 };
            match report {
                Some(path) => export_report(&rows, &summary, format, path, ropts)?,
                None => print!("{}", render(&rows, &summary, format, ropts)),
            }
            if !cli.quiet {
                eprintln!(
                    "{} passed, {} failed, {} total in {:.2?}",
                    summary.passed, summary.failed, summary.total, summary.wall_time
                );
            }
            Ok(if summary.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

// Inserts `"seed": seed` into modification objects that lack one. Anything
// that does not look like an array of objects is left for the parser to
// report.
fn with_default_seed(text: &str, seed: Option<u64>) -> String {
    let Some(seed) = seed else {
        return text.to_string();
    };
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Array(mut items)) => {
            for item in &mut items {
                if let Value::Object(obj) = item {
                    obj.entry("seed").or_insert(seed.into());
                }
            }
            Value::Array(items).to_string()
        }
        _ => text.to_string(),
    }
}
