use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// A record tagged with the config hash and master seed that produced it.
#[derive(Serialize)]
pub struct Tagged<'a, T: Serialize> {
    pub config_hash: &'a str,
    pub master_seed: u64,
    #[serde(flatten)]
    pub record: T,
}

/// Appends one JSON object per line, each with a single write so an interrupted run
/// leaves only whole lines behind.
pub struct JsonLines {
    file: File,
}

impl JsonLines {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(JsonLines { file })
    }

    pub fn write(&mut self, value: &impl Serialize) -> Result<(), CliError> {
        let mut line = serde_json::to_string(value).map_err(|e| CliError::Io(e.to_string()))?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        Ok(())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
