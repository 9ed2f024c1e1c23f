//! The `riskx` command-line front end.
//!
//! Subcommands `expand`, `geometry`, `simulate` and `loops` write CSV (header
//! row, `-` for unavailable cells) or JSON lines with the same keys. Exit codes
//! are 0 on success, 2 for usage or validation errors and 3 for numeric
//! failures.

mod args;
mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::Context;
use clap::{ArgAction, CommandFactory, Parser};

pub use args::{Cli, Command, Format};
pub use config::{config_to_args, parse_config, ConfigEntry};
pub use format::{format_sig, parse_count_list, parse_csv_row, parse_grid, ParsedCell};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Runs with the process arguments and standard streams; returns the exit code.
pub fn main() -> i32 {
    run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
        Err(ParseFailure::Other(e)) => {
            let _ = writeln!(stderr, "error: {e:#}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    let numeric = e.chain().any(|c| c.downcast_ref::<crate::Error>().is_some_and(crate::Error::is_numeric));
    if numeric {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

enum ParseFailure {
    Clap(clap::Error),
    Other(anyhow::Error),
}

/// The `--config` path, if given after the subcommand.
fn config_path(argv: &[OsString]) -> Option<std::path::PathBuf> {
    let mut it = argv.iter().skip(2);
    while let Some(arg) = it.next() {
        let arg = arg.to_string_lossy();
        if arg == "--" {
            break;
        }
        if arg == "--config" {
            return it.next().map(Into::into);
        }
        if let Some(v) = arg.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Config-file flags are inserted ahead of the command-line flags, so the
/// latter win.
fn parse(argv: &[OsString]) -> Result<Cli, ParseFailure> {
    let Some(path) = config_path(argv) else {
        return Cli::try_parse_from(argv).map_err(ParseFailure::Clap);
    };
    let sub_name = argv[1].to_string_lossy().into_owned();
    let root = Cli::command();
    let Some(sub) = root.find_subcommand(&sub_name) else {
        return Cli::try_parse_from(argv).map_err(ParseFailure::Clap);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(ParseFailure::Other)?;
    let entries = parse_config(&text)
        .and_then(|entries| {
            config_to_args(&entries, |key| {
                sub.get_arguments()
                    .find(|arg| arg.get_long() == Some(key))
                    .map(|arg| matches!(arg.get_action(), ArgAction::SetTrue))
            })
        })
        .with_context(|| format!("in config {}", path.display()))
        .map_err(ParseFailure::Other)?;
    let mut merged: Vec<OsString> = argv[..2].to_vec();
    merged.extend(entries.into_iter().map(OsString::from));
    merged.extend(argv[2..].iter().cloned());
    Cli::try_parse_from(merged).map_err(ParseFailure::Clap)
}

enum Report {
    Table(format::Table),
    Loops(commands::LoopReport),
}

fn compute(cli: &Cli) -> anyhow::Result<Report> {
    Ok(match &cli.command {
        Command::Expand(a) => Report::Table(commands::expand(a)?),
        Command::Geometry(a) => Report::Table(commands::geometry(a)?),
        Command::Simulate(a) => Report::Table(commands::simulate(a)?),
        Command::Loops(a) => Report::Loops(commands::loops(a)?),
    })
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let out = cli.command.output();
    let report = match out.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w as usize)
            .build()?
            .install(|| compute(cli))?,
        None => compute(cli)?,
    };
    let mut sink: Box<dyn Write + '_> = match &out.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(stdout)),
    };
    match (report, out.format) {
        (Report::Loops(r), Format::Csv) => writeln!(sink, "{}", r.line())?,
        (Report::Loops(r), Format::Jsonl) => r.write_jsonl(&mut sink)?,
        (Report::Table(t), Format::Csv) => t.write_csv(&mut sink, out.precision)?,
        (Report::Table(t), Format::Jsonl) => t.write_jsonl(&mut sink, out.precision)?,
    }
    sink.flush()?;
    Ok(())
}
