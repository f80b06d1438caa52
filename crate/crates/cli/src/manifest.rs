//! Run manifests: tool version, input digests, and the content-affecting
//! flag set. Every emitted report embeds one, so identical manifests imply
//! byte-identical report bodies. Output-location flags are deliberately not
//! recorded; they do not affect report content.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct ManifestInput {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub inputs: Vec<ManifestInput>,
    pub flags: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            tool: "corefeval",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            flags: BTreeMap::new(),
            seed: None,
        }
    }

    pub fn input(&mut self, path: &Path, content: &str) {
        let mut hasher = Sha256::new();
        hasher.update(content.as_bytes());
        self.inputs.push(ManifestInput {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
    }

    pub fn flag(&mut self, key: &str, value: impl ToString) {
        self.flags.insert(key.to_string(), value.to_string());
    }
}

/// A report body wrapped with its manifest.
#[derive(Debug, Serialize)]
pub struct Wrapped<T: Serialize> {
    pub manifest: RunManifest,
    pub report: T,
}

pub fn wrap<T: Serialize>(manifest: RunManifest, report: T) -> Wrapped<T> {
    Wrapped { manifest, report }
}
