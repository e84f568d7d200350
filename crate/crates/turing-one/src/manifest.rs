use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::formats::to_json;
use crate::model_file::sha256_hex;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

/// What was run, on which input, and digests of everything written.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input_digest: Option<String>,
    pub parameters: Value,
    pub tool_version: &'static str,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputEntry>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: &str, input_digest: Option<String>, parameters: Value) -> Self {
        Self {
            command: command.to_string(),
            input_digest,
            parameters,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
            started: Some(Instant::now()),
        }
    }

    /// Writes `bytes` to `path` and records its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
        self.record(path, bytes);
        Ok(())
    }

    /// Records a file that was already written.
    pub fn record_file(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.record(path, &bytes);
        Ok(())
    }

    fn record(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(OutputEntry {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn finish(&mut self, path: &Path) -> Result<PathBuf, CliError> {
        if let Some(t) = self.started {
            self.wall_time_seconds = t.elapsed().as_secs_f64();
        }
        std::fs::write(path, to_json(self)).map_err(|e| CliError::io(path, e))?;
        Ok(path.to_path_buf())
    }
}
