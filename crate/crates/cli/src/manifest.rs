use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::{Command, Failure};

/// Written next to every output so the run can be repeated with `replay`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    #[serde(flatten)]
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub threads: usize,
    pub started_unix_s: f64,
    pub wall_clock_s: f64,
}

pub struct Clock {
    started: SystemTime,
    t0: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Self {
            started: SystemTime::now(),
            t0: Instant::now(),
        }
    }

    pub fn manifest(
        &self,
        command: &Command,
        inputs: Vec<PathBuf>,
        outputs: Vec<PathBuf>,
        threads: usize,
    ) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.clone(),
            inputs,
            outputs,
            threads,
            started_unix_s: self
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            wall_clock_s: self.t0.elapsed().as_secs_f64(),
        }
    }
}

/// `out.csv` → `out.csv.manifest.json`.
pub fn path_for(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write(path: &Path, m: &RunManifest) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(m).expect("manifest serializes");
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn read(path: &Path) -> Result<RunManifest, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}
