use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliResult;

/// Provenance record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub start_unix_ms: u128,
    pub end_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn start(subcommand: &str, flags: &impl Serialize, seed: Option<u64>) -> CliResult<Self> {
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            flags: serde_json::to_value(flags)?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            start_unix_ms: now_ms(),
            end_unix_ms: 0,
        })
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Writes `<out>.manifest.json`, or a single JSON line on stderr when the
    /// output went to stdout.
    pub fn finish(mut self, out: Option<&Path>) -> CliResult<()> {
        self.end_unix_ms = now_ms();
        match out {
            Some(p) => {
                let mut text = serde_json::to_string_pretty(&self)?;
                text.push('\n');
                std::fs::write(Self::path_for(p), text)?;
            }
            None => {
                let line = serde_json::to_string(&self)?;
                writeln!(std::io::stderr(), "{line}")?;
            }
        }
        Ok(())
    }
}
