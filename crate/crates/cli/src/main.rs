use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nodal_stability::io::{
    exit, parse_document, parse_query, run_query, serialize, Document, Format,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Machine => Format::Machine,
        }
    }
}

/// Exact stability checks for vector bundles on nodal curves.
#[derive(Debug, Parser)]
#[command(name = "nstab", version)]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every query in a document; the exit code is the largest over all queries.
    Run { file: PathBuf },
    /// Run one query given on the command line against a document.
    Query {
        file: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, required = true)]
        query: Vec<String>,
    },
    /// Print the canonical form of a document.
    Fmt { file: PathBuf },
}

fn load(path: &Path) -> Result<Document, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("nstab: {}: {e}", path.display());
        exit::IO
    })?;
    parse_document(&text).map_err(|d| {
        eprintln!("nstab: {}:{d}", path.display());
        exit::DATA
    })
}

fn execute(cli: Cli) -> Result<u8, u8> {
    let format: Format = cli.format.into();
    match cli.command {
        Command::Fmt { file } => {
            print!("{}", serialize(&load(&file)?));
            Ok(exit::YES)
        }
        Command::Run { file } => {
            let doc = load(&file)?;
            let mut worst = exit::YES;
            for (k, q) in doc.queries.iter().enumerate() {
                if k > 0 {
                    println!();
                }
                let report = run_query(&doc, q).map_err(|e| {
                    eprintln!("nstab: query `{}`: {e}", q.text());
                    exit::SOFTWARE
                })?;
                print!("{}", report.render(format));
                worst = worst.max(report.exit_code());
            }
            Ok(worst)
        }
        Command::Query { file, query } => {
            let doc = load(&file)?;
            let q = parse_query(&query).map_err(|m| {
                eprintln!("nstab: {m}");
                exit::USAGE
            })?;
            q.check_references(&doc).map_err(|m| {
                eprintln!("nstab: {m}");
                exit::USAGE
            })?;
            let report = run_query(&doc, &q).map_err(|e| {
                eprintln!("nstab: {e}");
                exit::SOFTWARE
            })?;
            print!("{}", report.render(format));
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::YES };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
