//! Artifacts: CSV tables (header comment block first) and JSON documents
//! (a `header` object first). Nothing time-dependent is written.

use std::path::{Path, PathBuf};

use serde::Serialize;

use blaschke_core::report::{ArtifactHeader, CsvTable};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Serialize)]
struct HeaderJson<'a> {
    tool: &'a str,
    config_sha256: &'a str,
    seed: u64,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: HeaderJson<'a>,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json<T: Serialize>(name: &str, header: &ArtifactHeader, body: &T) -> Result<Artifact, CliError> {
    let doc = Document {
        header: HeaderJson {
            tool: &header.tool,
            config_sha256: &header.config_sha256,
            seed: header.seed,
        },
        body,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

pub fn csv(name: &str, header: &ArtifactHeader, table: &CsvTable) -> Result<Artifact, CliError> {
    Ok(Artifact {
        name: name.to_string(),
        bytes: table.to_bytes(header)?,
    })
}

/// Writes every artifact into `dir` (created if missing).
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(path)
        })
        .collect()
}
