//! `torind` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 the checked
//! claim does not hold. Failures are also written to stderr as JSON.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use crate::commands::{Failure, Outcome};
use crate::config::{load_file, Cli, Command, FileConfig, Tolerances};
use crate::output::{to_json, write_file, SCHEMA};

fn report_failure(command: Option<&str>, f: &Failure) -> i32 {
    let doc = json!({
        "schema": SCHEMA,
        "command": command,
        "error": { "kind": f.kind, "message": f.message, "exit_code": f.code },
    });
    eprint!("{}", to_json(&doc));
    f.code
}

fn execute(cli: Cli, file: &FileConfig) -> Result<Outcome, Failure> {
    if let Some(c) = &file.command {
        if c != cli.command.name() {
            return Err(Failure::validation(format!(
                "config is for `{c}` but the command is `{}`",
                cli.command.name()
            )));
        }
    }
    let tol = Tolerances::resolve(&cli.tolerances, &file.tolerances)?;
    match cli.command {
        Command::Index(a) => commands::index(a, file, &tol),
        Command::TheoremCheck(a) => commands::theorem_check(a, file, &tol),
        Command::CorollaryCheck(a) => commands::corollary_check_cmd(a, file, &tol),
        Command::FirstIntegral(a) => commands::first_integral(a, file, &tol),
        Command::Pushforward(a) => commands::pushforward_cmd(a, file, &tol),
        Command::Plot(a) => commands::plot(a, file, &tol),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let message = rendered
                .trim()
                .strip_prefix("error: ")
                .unwrap_or(rendered.trim())
                .to_string();
            return report_failure(None, &Failure::validation(message));
        }
    };
    let name = cli.command.name();
    let file = match load_file(cli.config.as_ref()) {
        Ok(f) => f,
        Err(msg) => return report_failure(Some(name), &Failure::validation(msg)),
    };
    let out = cli.out.clone().or(file.out.clone());
    let outcome = match execute(cli, &file) {
        Ok(o) => o,
        Err(f) => return report_failure(Some(name), &f),
    };
    let doc = json!({
        "schema": SCHEMA,
        "command": name,
        "status": if outcome.holds { "ok" } else { "assertion_failed" },
        "config": outcome.config,
        "result": outcome.result,
    });
    let text = to_json(&doc);
    match out {
        Some(path) => {
            if let Err(msg) = write_file(&path, &text) {
                return report_failure(Some(name), &Failure::validation(msg));
            }
        }
        None => print!("{text}"),
    }
    if outcome.holds {
        0
    } else {
        4
    }
}
