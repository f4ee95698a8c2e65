//! Command-line front end for `djr-core`.
//!
//! Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 for
//! usage and precondition errors.

pub mod args;
pub mod commands;
pub mod config;
pub mod suite;

use std::fmt;

use serde_json::Value;

use crate::args::{Cli, Format};
use crate::config::RunConfig;

pub const SCHEMA: &str = "djr-report/1";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(djr_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<djr_core::Error> for CliError {
    fn from(e: djr_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// One command's result in every supported rendering.
#[derive(Debug, Clone)]
pub struct Output {
    pub text: String,
    pub json: Value,
    pub csv: Option<String>,
    pub pass: bool,
}

impl Output {
    pub fn new(text: String, json: Value) -> Self {
        Output {
            text,
            json,
            csv: None,
            pass: true,
        }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn with_verdict(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(ensure_newline(self.text.clone())),
            Format::Json => Ok(ensure_newline(
                serde_json::to_string_pretty(&self.json).expect("json values serialize"),
            )),
            Format::Csv => self.csv.clone().ok_or_else(|| {
                CliError::Usage("csv output is not available for this command".into())
            }),
        }
    }
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

pub fn csv_string<T: serde::Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

/// Runs one invocation and writes its output; returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let config = RunConfig::resolve(cli)?;
    let output = commands::dispatch(cli, &config)?;
    let format = match (&cli.command, cli.format.or(config.file.format)) {
        (args::Command::Block { .. }, None) => Format::Text,
        _ => config.format,
    };
    let rendered = output.render(format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(if output.pass { 0 } else { 1 })
}
