use std::path::Path;

use serde::Deserialize;

use crate::args::{Cli, Family, Format};
use crate::CliError;

/// Defaults read from `--config`; flags take precedence.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub cap: Option<u64>,
    pub depth: Option<usize>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: FileConfig,
    pub format: Format,
    pub cap: u64,
    pub depth: Option<usize>,
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let format = cli.format.or(file.format).unwrap_or(if cli.out.is_some() {
            Format::Json
        } else {
            Format::Text
        });
        let cap = cli.cap.or(file.cap).unwrap_or(djr_core::words::DEFAULT_CAP);
        let depth = cli.depth.or(file.depth);
        Ok(RunConfig {
            file,
            format,
            cap,
            depth,
        })
    }

    pub fn a(&self, family: &Family) -> Result<u64, CliError> {
        family
            .a
            .or(self.file.a)
            .ok_or_else(|| CliError::Usage("missing --a".into()))
    }

    pub fn b(&self, b: Option<u64>) -> Result<u64, CliError> {
        b.or(self.file.b)
            .ok_or_else(|| CliError::Usage("missing --b".into()))
    }
}
