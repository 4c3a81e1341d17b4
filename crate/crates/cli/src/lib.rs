//! The `seqprt` command-line tool.
//!
//! Every analysis subcommand prints one JSON document (or a CSV table with
//! `--format csv`). Reals in JSON are rounded to six significant digits;
//! CSV cells and plot files keep full precision.
//!
//! | exit code | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | I/O failure (output files, standard input, server) |
//! | 2 | usage error or invalid specification |
//! | 3 | infeasible design |
//! | 4 | malformed or invalid observations |

pub mod args;
mod commands;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::Cli;
use args::{Command, Format, OutputArgs, ServeArgs};
pub use error::CliError;
use output::Report;

/// Parse `argv`, run the command and return the process exit code.
pub fn main_with<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code().try_into().unwrap_or(CliError::USAGE);
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let (report, output) = match &cli.command {
        Command::Design(a) => (commands::design_cmd(a)?, &a.output),
        Command::Oc(a) => (commands::oc_cmd(a)?, &a.output),
        Command::Run(a) => (commands::run_cmd(a)?, &a.output),
        Command::Umpbt(a) => (commands::umpbt_cmd(a)?, &a.output),
        Command::EffectiveN(a) => (commands::effective_n_cmd(a)?, &a.output),
        Command::FindAlt(a) => (commands::find_alt_cmd(a)?, &a.output),
        Command::FindN(a) => (commands::find_n_cmd(a)?, &a.output),
        Command::Cost(a) => (commands::cost_cmd(a)?, &a.output),
        Command::Serve(a) => return serve(a),
    };
    emit(&report, output)
}

fn emit(report: &Report, output: &OutputArgs) -> Result<(), CliError> {
    let text = match output.format {
        Format::Json => report.render_json(),
        Format::Csv => report.table.render(),
    };
    match &output.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::io(format!("cannot write standard output: {e}")))
        }
    }
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let mut config = seqprt_service::Config::from_env().map_err(CliError::usage)?;
    if let Some(dir) = &args.data_dir {
        config.data_dir = dir.clone();
    }
    if let Some(bind) = args.bind {
        config.bind = bind;
    }
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io(format!("cannot start runtime: {e}")))?;
    runtime
        .block_on(seqprt_service::serve(config))
        .map_err(|e| CliError::io(format!("server failed: {e}")))
}
