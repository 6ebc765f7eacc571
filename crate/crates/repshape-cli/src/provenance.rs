//! Provenance block written next to every command's outputs: tool version,
//! effective configuration and its hash, and digests of every input file.
//! The timestamp lives only here so the primary outputs stay byte-identical
//! across reruns.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use repshape::{Result, ShapeError};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    config_hash: String,
    inputs: Vec<InputDigest>,
    unix_timestamp: u64,
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| ShapeError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(hex_digest(&bytes))
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `provenance.json` into the output directory.
pub fn write_provenance(
    command: &str,
    config: &RunConfig,
    inputs: &[PathBuf],
    output_dir: &Path,
) -> Result<()> {
    let config_json =
        serde_json::to_string(config).expect("config serialization cannot fail");
    let mut digests = Vec::with_capacity(inputs.len());
    for path in inputs {
        digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: file_digest(path)?,
        });
    }
    let block = Provenance {
        tool: "repshape",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        config_hash: hex_digest(config_json.as_bytes()),
        inputs: digests,
        unix_timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let path = output_dir.join("provenance.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&block).expect("provenance serialization cannot fail"),
    )
    .map_err(|e| ShapeError::Io { path, source: e })
}
