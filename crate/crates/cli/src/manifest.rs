//! Reproducibility manifests for search runs.
//!
//! A manifest records what was asked (command line, config, input hashes),
//! what was built (shell, group, and graph statistics), how the solve went
//! (budget, outcome), and where the artifacts live.  Re-running the same
//! command in the same tree produces byte-identical witness files; the
//! manifest carries everything needed to do so.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use latshell::Result;

#[derive(Debug, Clone, Serialize)]
pub struct ShellStats {
    pub n: usize,
    pub k: u32,
    pub vectors: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupStats {
    pub text: String,
    pub label: String,
    pub tag: String,
    /// Group order as a decimal string; it can exceed every fixed-width
    /// integer JSON readers agree on.
    pub order: String,
    pub generators: usize,
    pub orbits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub from_cache: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetStats {
    pub time_limit_secs: u64,
    pub node_limit: u64,
    pub target_weight: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeStats {
    pub bound: u64,
    pub proven_optimal: bool,
    pub nodes_explored: u64,
    pub clique: Vec<usize>,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub partition_ms: u128,
    pub graph_ms: u128,
    pub solve_ms: u128,
    pub total_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub input_hashes: BTreeMap<String, String>,
    pub t: i64,
    pub shell: ShellStats,
    pub group: GroupStats,
    pub graph: GraphStats,
    pub budget: BudgetStats,
    pub outcome: OutcomeStats,
    pub outputs: OutputPaths,
    pub timings: Timings,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .expect("manifest serialization cannot fail");
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
