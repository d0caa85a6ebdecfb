//! Report and manifest emission: JSON for machines, CSV mirroring the
//! familiar comparison-table layouts.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::discovery::{config_hash, RunConfig};

use super::{io_err, HarnessError};

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let body = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        context: format!("serializing {}", path.display()),
        source,
    })?;
    std::fs::write(path, body).map_err(io_err(format!("writing {}", path.display())))
}

pub fn write_text(path: &Path, body: &str) -> Result<(), HarnessError> {
    std::fs::write(path, body).map_err(io_err(format!("writing {}", path.display())))
}

/// Everything needed to reproduce a run bit-exactly.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub name: String,
    pub seed: u64,
    pub config_hash: String,
    pub engine_version: String,
    pub roster_sha256: String,
}

impl Manifest {
    pub fn new(name: &str, config: &RunConfig, roster_path: &Path) -> Result<Self, HarnessError> {
        let bytes = std::fs::read(roster_path)
            .map_err(io_err(format!("reading {}", roster_path.display())))?;
        Ok(Self {
            name: name.to_string(),
            seed: config.seed,
            config_hash: config_hash(config),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            roster_sha256: format!("{:x}", Sha256::digest(&bytes)),
        })
    }
}

/// Render rows of (label, cells) as CSV with a header.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let escaped: Vec<String> = row
            .iter()
            .map(|cell| {
                if cell.contains(',') || cell.contains('"') {
                    format!("\"{}\"", cell.replace('"', "\"\""))
                } else {
                    cell.clone()
                }
            })
            .collect();
        out.push_str(&escaped.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_escapes_commas_and_quotes() {
        let csv = to_csv(
            &["a", "b"],
            &[vec!["x,y".into(), "say \"hi\"".into()]],
        );
        assert_eq!(csv, "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
    }
}
