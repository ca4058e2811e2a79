//! Config-driven scenario runner for the `biham` binary.
//!
//! Each invocation reads one JSON config, validates it, runs one command and
//! writes a single CSV or JSON artifact atomically.

pub mod config;
pub mod error;
pub mod inputs;
pub mod output;
pub mod run;
pub mod validate;

use std::path::Path;

pub use config::{Command, Params, ScenarioConfig};
pub use error::{CliError, Diagnostic};
pub use run::{run, RunSummary};
pub use validate::{validate, validate_text};

/// Reads and parses `config_path`. Relative `matrix_file` entries resolve
/// against the config's directory.
pub fn load(command: Command, config_path: &Path, out_dir: &Path, seed: u64) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let params = Params::parse(command, &text).map_err(|e| CliError::Config(vec![Diagnostic::schema("config", e.to_string())]))?;
    Ok(ScenarioConfig {
        command,
        params,
        out_dir: out_dir.to_path_buf(),
        base_dir: base_dir(config_path),
        seed,
    })
}

pub fn base_dir(config_path: &Path) -> std::path::PathBuf {
    match config_path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => ".".into(),
    }
}
