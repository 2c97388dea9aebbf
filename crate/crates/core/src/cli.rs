//! The `absint` command line.
//!
//! Exit codes: 0 success or sound, 1 soundness violation, 2 usage, input or
//! parse error, 3 state budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::analyzer::{analyze, interval_memory, AnalysisConfig};
use crate::concrete::DEFAULT_STATE_BUDGET;
use crate::difftest::{check_soundness_from, check_soundness_with, CheckError, Mutant, Verdict};
use crate::domain::Lattice;
use crate::interval::{Itv, Thresholds};
use crate::lang::{gen_batch, parse, GenConfig, Program};
use crate::machine_int::Width;
use crate::memory::AMem;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "absint", version, about = "Interval abstract interpreter for a small imperative language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyse a program and print the final variable ranges.
    Analyze(AnalyzeArgs),
    /// Compare the analysis with the exhaustive concrete semantics.
    Check(CheckArgs),
    /// Print randomly generated programs.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct WidthArg {
    /// Integer width in bits, 2 to 64.
    #[arg(long, env = "ABSINT_WIDTH", default_value_t = 64)]
    width: u32,
}

#[derive(Debug, Args)]
struct InitArgs {
    /// Initial range of a variable, as NAME=LOW:UP. Repeatable; other
    /// variables start unconstrained.
    #[arg(long = "init", value_name = "NAME=LOW:UP")]
    init: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[command(flatten)]
    width: WidthArg,
    /// Comma-separated widening thresholds, or @FILE to read them from a file.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    init: InitArgs,
}

#[derive(Debug, Args)]
struct GenShape {
    /// Maximum number of statement nodes per program.
    #[arg(long, default_value_t = 12)]
    size: usize,
    /// Number of variables, 1 to 8.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=8))]
    vars: u8,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Program to check; omit with --gen.
    #[arg(required_unless_present = "gen", conflicts_with = "gen")]
    file: Option<PathBuf>,
    /// Check generated programs instead of a file.
    #[arg(long)]
    gen: bool,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    shape: GenShape,
    #[command(flatten)]
    width: WidthArg,
    /// Largest number of concrete memories to enumerate.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: u64,
    #[command(flatten)]
    init: InitArgs,
    #[arg(long, hide = true)]
    mutant: Option<Mutant>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    shape: GenShape,
    #[command(flatten)]
    width: WidthArg,
}

/// A user-facing failure, reported on stderr.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn width_of(w: &WidthArg) -> Result<Width, Failure> {
    Width::new(w.width).map_err(|e| input_error(e.to_string()))
}

fn read_program(path: &Path, width: Width) -> Result<Program, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, width).map_err(|e| input_error(format!("{}:{e}", path.display())))
}

fn read_thresholds(spec: &str, width: Width) -> Result<Thresholds, Failure> {
    let text = match spec.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| input_error(format!("cannot read {path}: {e}")))?
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(","),
        None => spec.to_string(),
    };
    Thresholds::parse(width, &text).map_err(|e| input_error(e.to_string()))
}

/// Builds the initial memory from `NAME=LOW:UP` bindings, or `None` if
/// there are none.
fn initial_memory(p: &Program, bindings: &[String]) -> Result<Option<AMem<Itv>>, Failure> {
    if bindings.is_empty() {
        return Ok(None);
    }
    let d = interval_memory(p.width, p.nvars(), &AnalysisConfig::default());
    let mut entries = vec![d.num().top(); p.nvars()];
    for b in bindings {
        let bad = || input_error(format!("bad --init `{b}`, expected NAME=LOW:UP"));
        let (name, range) = b.split_once('=').ok_or_else(bad)?;
        let (lo, up) = range.split_once(':').ok_or_else(bad)?;
        let lo: i128 = lo.trim().parse().map_err(|_| bad())?;
        let up: i128 = up.trim().parse().map_err(|_| bad())?;
        let v = p
            .var_id(name.trim())
            .ok_or_else(|| input_error(format!("--init names unknown variable `{name}`")))?;
        let itv = d.num().mk(lo, up);
        if itv.is_bot() {
            return Err(input_error(format!(
                "--init range {lo}:{up} is empty or does not fit in {} bits",
                p.width.bits()
            )));
        }
        entries[v.index()] = itv;
    }
    Ok(Some(d.from_entries(entries)))
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let width = width_of(&args.width)?;
    let p = read_program(&args.file, width)?;
    let config = AnalysisConfig {
        thresholds: args
            .thresholds
            .as_deref()
            .map(|t| read_thresholds(t, width))
            .transpose()?,
        mutant: None,
    };
    let initial = initial_memory(&p, &args.init.init)?;
    let report = analyze(&p, initial, &config).map_err(|e| Failure {
        code: EXIT_VIOLATION,
        message: format!("analysis failed: {e}"),
    })?;
    let written = match args.format {
        Format::Text => write!(out, "{report}"),
        Format::Json => writeln!(out, "{}", report.to_json()),
    };
    written.map_err(|e| input_error(e.to_string()))?;
    Ok(EXIT_OK)
}

fn verdict_json(result: &Result<Verdict, CheckError>, index: usize) -> serde_json::Value {
    match result {
        Ok(v) => {
            let mut j = serde_json::to_value(v).expect("verdicts serialize");
            j["index"] = json!(index);
            j
        }
        Err(CheckError::Budget(e)) => json!({"index": index, "status": "budget", "error": e.to_string()}),
        Err(CheckError::Fixpoint(e)) => json!({"index": index, "status": "error", "error": e.to_string()}),
    }
}

fn cmd_check(args: &CheckArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let width = width_of(&args.width)?;
    let config = AnalysisConfig {
        thresholds: None,
        mutant: args.mutant,
    };
    let results: Vec<Result<Verdict, CheckError>> = match &args.file {
        Some(path) => {
            let p = read_program(path, width)?;
            let r = match initial_memory(&p, &args.init.init)? {
                Some(init) => check_soundness_from(&p, width, &init, &config, args.budget),
                None => check_soundness_with(&p, width, &config, args.budget),
            };
            vec![r]
        }
        None => {
            if !args.init.init.is_empty() {
                return Err(input_error("--init needs a program file"));
            }
            let cfg = GenConfig::new(args.shape.size.max(1), args.shape.vars as usize, width);
            gen_batch(args.seed, args.count, cfg)
                .par_iter()
                .map(|p| check_soundness_with(p, width, &config, args.budget))
                .collect()
        }
    };
    let mut code = EXIT_OK;
    for (i, r) in results.iter().enumerate() {
        writeln!(out, "{}", verdict_json(r, i)).map_err(|e| input_error(e.to_string()))?;
        code = match (code, r) {
            (_, Ok(v)) if !v.is_sound() => EXIT_VIOLATION,
            (_, Err(CheckError::Fixpoint(_))) => EXIT_VIOLATION,
            (EXIT_OK, Err(CheckError::Budget(_))) => EXIT_BUDGET,
            (c, _) => c,
        };
    }
    Ok(code)
}

fn cmd_gen(args: &GenArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let width = width_of(&args.width)?;
    let cfg = GenConfig::new(args.shape.size.max(1), args.shape.vars as usize, width);
    let mut text = String::new();
    for (i, p) in gen_batch(args.seed, args.count, cfg).iter().enumerate() {
        if i > 0 {
            text.push_str("---\n");
        }
        text.push_str(&p.to_string());
        text.push('\n');
    }
    out.write_all(text.as_bytes())
        .map_err(|e| input_error(e.to_string()))?;
    Ok(EXIT_OK)
}

/// Runs the command line on `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Gen(a) => cmd_gen(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "absint: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> ExitCode {
    let code = run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
