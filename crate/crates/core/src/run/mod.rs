//! Run configuration, run directories and the pipelines behind the CLI.

mod commands;
mod config;
mod studies;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use commands::{cmd_fit, cmd_flow, cmd_geometry_check, cmd_indexset, cmd_solve, cmd_verify, Outcome};
pub use config::{
    default_config_toml, ConvergenceConfig, ExtractionConfig, FitConfig, FlowConfig, GeometryConfig, IndexsetConfig,
    MellinLoopConfig, RunConfig, SolveConfig, TailConfig,
};
pub use studies::{
    convergence_study, front_face_study, index_property_suite, mellin_oracle_loop, parse_e0, solve_slices, tail_study,
    ConvergenceRow, ConvergenceStudy, FrontFaceStudy, IndexPropertyReport, MellinCase, MellinLoopReport, TailStudy,
};

use crate::{Error, Result};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_ROOT_ENV: &str = "SCRI_OUTPUT_ROOT";

/// `name version` of this library.
pub fn version_stamp() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Directory holding the outputs of one command.
///
/// The name is derived from the command and a hash of the effective config,
/// so that identical configs write to the same place.
#[derive(Clone, Debug)]
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(cfg: &RunConfig, command: &str) -> Result<RunDir> {
        let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.output_dir.clone());
        let text = cfg.to_toml()?;
        let digest = Sha256::digest(text.as_bytes());
        let tag: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
        let path = root.join(format!("{command}-{tag}"));
        fs::create_dir_all(&path).map_err(|e| io_err(&path, e))?;
        let dir = RunDir { path };
        dir.write("config.toml", &text)?;
        dir.write("version.txt", &format!("{}\ncommand {command}\n", version_stamp()))?;
        Ok(dir)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.path.join(name);
        fs::write(&p, contents).map_err(|e| io_err(&p, e))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        self.write(name, &(text + "\n"))
    }
}

fn io_err(p: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
}
