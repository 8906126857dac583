//! Run manifests: what was run, with which inputs, so it can be run again.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::OutputFormat;
use crate::error::CliError;

pub const MANIFEST_PREFIX: &str = "# manifest: ";
const MARKDOWN_PREFIX: &str = "<!-- manifest: ";
const MARKDOWN_SUFFIX: &str = " -->";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub format: OutputFormat,
    /// Input path → SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads input files and remembers their digests.
#[derive(Debug, Default)]
pub struct Inputs {
    pub digests: BTreeMap<String, String>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        self.digests.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }
}

/// The artifact body of one run.
pub enum Body {
    Json(serde_json::Value),
    Text(String),
}

impl RunManifest {
    /// Embed the manifest: as a `manifest` member for JSON, as a leading
    /// comment line otherwise.
    pub fn wrap(&self, body: Body) -> String {
        let compact = serde_json::to_string(self).expect("manifest serializes");
        match body {
            Body::Json(result) => {
                let doc = serde_json::json!({ "manifest": self, "result": result });
                let mut s = serde_json::to_string_pretty(&doc).expect("artifact serializes");
                s.push('\n');
                s
            }
            Body::Text(text) if self.format == OutputFormat::Markdown => {
                format!("{MARKDOWN_PREFIX}{compact}{MARKDOWN_SUFFIX}\n{text}")
            }
            Body::Text(text) => format!("{MANIFEST_PREFIX}{compact}\n{text}"),
        }
    }

    /// Recover the manifest from an artifact in any of the formats.
    pub fn extract(artifact: &str) -> Option<Self> {
        let first = artifact.lines().next()?;
        if let Some(rest) = first.strip_prefix(MANIFEST_PREFIX) {
            return serde_json::from_str(rest).ok();
        }
        if let Some(rest) = first.strip_prefix(MARKDOWN_PREFIX) {
            return serde_json::from_str(rest.strip_suffix(MARKDOWN_SUFFIX)?).ok();
        }
        let doc: serde_json::Value = serde_json::from_str(artifact).ok()?;
        serde_json::from_value(doc.get("manifest")?.clone()).ok()
    }
}

/// The payload of a JSON artifact, or the document itself if it has no
/// manifest wrapper.
pub fn unwrap_json(doc: serde_json::Value) -> serde_json::Value {
    match doc {
        serde_json::Value::Object(mut m) if m.contains_key("manifest") && m.contains_key("result") => {
            m.remove("result").expect("checked")
        }
        other => other,
    }
}
