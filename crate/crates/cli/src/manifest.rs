//! Run manifests and output placement.
//!
//! A command with `--output` writes its artifacts plus a manifest recording
//! the parsed command, seeds, input and output hashes. `replay` feeds the
//! recorded command back through the same code path and compares hashes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::error::{io_error, CliError};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(64);
    for b in Sha256::digest(bytes) {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    /// Full parameter record; `replay` re-runs exactly this.
    pub command: Command,
    pub seeds: BTreeMap<String, u64>,
    pub rng: String,
    pub inputs: Vec<FileRecord>,
    /// Output file names relative to the manifest's directory.
    pub outputs: Vec<FileRecord>,
    /// SHA-256 of the serialized command.
    pub config_hash: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))
    }
}

pub fn config_hash(cmd: &Command) -> String {
    sha256_hex(serde_json::to_string(cmd).expect("commands serialize").as_bytes())
}

/// One file produced by a command. For directory outputs `name` is the file
/// name; for `generate`, whose output is a single file, it is a suffix
/// appended to that file's name.
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, contents: impl Into<Vec<u8>>) -> Self {
        Self { name: name.to_string(), contents: contents.into() }
    }
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Printed to stdout; when no output location is given the first artifact
    /// is printed instead if this is empty.
    pub summary: String,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<PathBuf>,
}

/// Where a command's files go: `(directory, prefix, manifest file name)`.
fn placement(cmd: &Command, output: &Path) -> (PathBuf, String, String) {
    match cmd {
        Command::Generate(_) => {
            let dir = output.parent().map(Path::to_path_buf).unwrap_or_default();
            let file = output.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (dir, file.clone(), format!("{file}.manifest.json"))
        }
        _ => (output.to_path_buf(), String::new(), MANIFEST_NAME.to_string()),
    }
}

/// Writes the artifacts and the manifest, or prints to stdout when the
/// command has no output location. Returns the manifest when one was written.
pub fn emit(cmd: &Command, argv: &[String], outcome: Outcome) -> Result<Option<RunManifest>, CliError> {
    let Some(output) = cmd.output() else {
        if outcome.summary.is_empty() {
            if let Some(first) = outcome.artifacts.first() {
                print!("{}", String::from_utf8_lossy(&first.contents));
            }
        } else {
            print!("{}", outcome.summary);
        }
        return Ok(None);
    };
    let (dir, prefix, manifest_name) = placement(cmd, output);
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    }
    let mut outputs = Vec::new();
    for a in &outcome.artifacts {
        let name = format!("{prefix}{}", a.name);
        let path = dir.join(&name);
        fs::write(&path, &a.contents).map_err(io_error(&path))?;
        outputs.push(FileRecord { path: name, sha256: sha256_hex(&a.contents) });
    }
    let mut inputs = Vec::new();
    for p in &outcome.inputs {
        let bytes = fs::read(p).map_err(io_error(p))?;
        inputs.push(FileRecord { path: p.display().to_string(), sha256: sha256_hex(&bytes) });
    }
    let manifest = RunManifest {
        tool: "maglap".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cmd.name().into(),
        argv: argv.to_vec(),
        command: cmd.clone(),
        seeds: outcome.seeds,
        rng: maglap::rng::RNG_NAME.into(),
        inputs,
        outputs,
        config_hash: config_hash(cmd),
    };
    let path = dir.join(manifest_name);
    let text = serde_json::to_string_pretty(&manifest).map_err(maglap::Error::from)? + "\n";
    fs::write(&path, text).map_err(io_error(&path))?;
    print!("{}", outcome.summary);
    Ok(Some(manifest))
}
