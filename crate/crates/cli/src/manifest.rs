use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Record of one invocation; `argv` replays it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, with `--seed` and `--out` made explicit.
    pub argv: Vec<String>,
    pub params: Value,
    pub seed: u64,
    pub code_version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub out_dir: PathBuf,
    /// File names inside `out_dir`, manifest excluded.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Drops every `--flag VALUE` / `--flag=VALUE` occurrence and appends `--flag value`.
pub fn set_flag(argv: &[String], flag: &str, value: &str) -> Vec<String> {
    let prefix = format!("{flag}=");
    let mut out = Vec::with_capacity(argv.len() + 2);
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
            continue;
        }
        if a == flag {
            skip = true;
            continue;
        }
        if a.starts_with(&prefix) {
            continue;
        }
        out.push(a.clone());
    }
    out.push(flag.to_string());
    out.push(value.to_string());
    out
}

/// Output directory of one command plus the names written so far.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    started: u128,
}

impl Outputs {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: now_ms(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.bytes(name, text.as_bytes())
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut f = fs::File::create(&path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        f.write_all(data)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// Registers a file written by someone else.
    pub fn record(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn finish(
        self,
        command: &str,
        argv: &[String],
        seed: u64,
        params: Value,
    ) -> CliResult<RunManifest> {
        let argv = set_flag(
            &set_flag(argv, "--seed", &seed.to_string()),
            "--out",
            &self.dir.to_string_lossy(),
        );
        let m = RunManifest {
            command: command.to_string(),
            argv,
            params,
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
            out_dir: self.dir.clone(),
            outputs: self.files,
        };
        let text = serde_json::to_string_pretty(&m)? + "\n";
        fs::write(self.dir.join(MANIFEST_NAME), text)?;
        Ok(m)
    }
}
