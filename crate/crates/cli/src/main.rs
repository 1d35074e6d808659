mod args;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, Format};
use commands::Outcome;
use config::{FileConfig, FlagBudget, DIGITS_ENV};
use error::CliError;

fn run(cli: &Cli) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let env = std::env::var(DIGITS_ENV).ok();
    let flags = FlagBudget {
        rel_tol: cli.rel_tol,
        digits: cli.digits,
        max_terms: cli.max_terms,
    };
    let budget = config::resolve_budget(env.as_deref(), &file, flags)?;

    let (name, (params, outcome)) = match &cli.command {
        Command::Eval(a) => ("eval", commands::cmd_eval(a, &budget)?),
        Command::Certify(a) => ("certify", commands::cmd_certify(a, &budget)?),
        Command::Verify(a) => ("verify", commands::cmd_verify(a, &budget)?),
        Command::Props(a) => ("props", commands::cmd_props(a, &budget)?),
    };
    let config = json!({
        "command": name,
        "format": cli.format,
        "out": cli.out.as_ref().map(|p| p.display().to_string()),
        "budget": budget,
        "working_digits": budget.working_digits(),
        "parameters": params,
    });
    emit(cli, config, outcome)
}

fn emit(cli: &Cli, config: Value, outcome: Outcome) -> Result<i32, CliError> {
    let body = match cli.format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("config".into(), config);
            if let Value::Object(rest) = outcome.json {
                doc.extend(rest);
            }
            serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes") + "\n"
        }
        Format::Csv => outcome.csv,
        Format::Text => outcome.text,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qpoly: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
