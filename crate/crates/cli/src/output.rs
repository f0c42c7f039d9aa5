//! Run directories, manifests, and report writers.
//!
//! Every invocation gets its own timestamped directory under the output
//! base so runs never clobber each other. Reports are deterministic
//! given (config, seed); wall-clock and timestamps live only in the
//! manifest.

use crate::config::ConfigFile;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const SCHEMA_VERSION: u32 = 1;

pub struct RunDir {
    pub path: PathBuf,
    started: Instant,
    command: String,
    seed: u64,
    config_snapshot: Vec<(String, String)>,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    tool_version: &'a str,
    seed: u64,
    config: Vec<(String, String)>,
    artifacts: &'a [String],
    wall_clock_seconds: f64,
    exit_status: i32,
}

impl RunDir {
    /// Create `<base>/<command>-<unix-millis>[-k]/`.
    pub fn create(base: &Path, command: &str, config: &ConfigFile, seed: u64) -> std::io::Result<RunDir> {
        let millis = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        let mut k = 0u32;
        loop {
            let name = if k == 0 {
                format!("{command}-{millis}")
            } else {
                format!("{command}-{millis}-{k}")
            };
            let path = base.join(&name);
            match std::fs::create_dir_all(path.parent().unwrap_or(base))
                .and_then(|_| std::fs::create_dir(&path))
            {
                Ok(()) => {
                    return Ok(RunDir {
                        path,
                        started: Instant::now(),
                        command: command.to_string(),
                        seed,
                        config_snapshot: config
                            .entries()
                            .map(|(a, b)| (a.to_string(), b.to_string()))
                            .collect(),
                        artifacts: Vec::new(),
                    })
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists && k < 1000 => k += 1,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn file(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.path.join(name)
    }

    pub fn write_text(&mut self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.file(name);
        std::fs::write(&path, body)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let path = self.file(name);
        let mut body = serde_json::to_string_pretty(value).expect("report serialization");
        body.push('\n');
        std::fs::write(&path, body)?;
        Ok(path)
    }

    /// Write the manifest; call last, with the exit status about to be
    /// returned.
    pub fn finalize(&self, exit_status: i32) {
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            command: &self.command,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            config: self.config_snapshot.clone(),
            artifacts: &self.artifacts,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            exit_status,
        };
        let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
        body.push('\n');
        let _ = std::fs::write(self.path.join("manifest.json"), body);
    }
}

/// Field dump rows `x y value`, one interior node per line.
pub fn field_dump(grid: &spectral_tower_core::GridDomain, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for i in 0..grid.len() {
        let (x, y) = grid.coords(i);
        out.push_str(&format!("{x} {y} {}\n", values[i]));
    }
    out
}

/// Thread cap from `SPECTRAL_TOWER_THREADS` (default 1).
pub fn thread_cap() -> usize {
    std::env::var("SPECTRAL_TOWER_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}
