use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use super::pipeline::Stage;
use super::RunConfig;

pub const MANIFEST_HEADER: &str = "NILEZTN-MANIFEST v1";

/// Record of one output directory: version, config, stage timings and a
/// SHA-256 of every artifact. Only `created_unix` and the `stage.*` lines
/// vary between two runs of the same config.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn build(config: &RunConfig, timings: &[(Stage, f64)], mut artifacts: Vec<(String, Vec<u8>)>) -> Self {
        let mut entries = vec![("version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        entries.push(("created_unix".into(), now.to_string()));
        for (stage, secs) in timings {
            entries.push((format!("stage.{}.seconds", stage.as_str()), format!("{secs:.3}")));
        }
        for line in config.to_text().lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                entries.push((format!("config.{k}"), v.to_string()));
            }
        }
        artifacts.sort_by(|a, b| a.0.cmp(&b.0));
        for (name, bytes) in artifacts {
            let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            entries.push((format!("artifact.{name}"), format!("{} {digest}", bytes.len())));
        }
        Self { entries }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Entries that must agree between runs of the same config.
    pub fn reproducible(&self) -> impl Iterator<Item = &(String, String)> {
        self.entries.iter().filter(|(k, _)| k != "created_unix" && !k.starts_with("stage."))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MANIFEST_HEADER}\n");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Inverse of [`Manifest::to_text`]; `None` on a malformed file.
    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        (lines.next()? == MANIFEST_HEADER).then_some(())?;
        let entries = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string())))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { entries })
    }
}
