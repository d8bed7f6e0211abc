use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Annotate,
    Graph,
    Groups,
    Metrics,
    Crosstopic,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Ingest, Stage::Annotate, Stage::Graph, Stage::Groups, Stage::Metrics, Stage::Crosstopic, Stage::Report];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Annotate => "annotate",
            Stage::Graph => "graph",
            Stage::Groups => "groups",
            Stage::Metrics => "metrics",
            Stage::Crosstopic => "crosstopic",
            Stage::Report => "report",
        }
    }

    /// Stages whose outputs this stage reads.
    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Annotate => &[Stage::Ingest],
            Stage::Graph => &[Stage::Ingest, Stage::Annotate],
            Stage::Groups => &[Stage::Annotate, Stage::Graph],
            Stage::Metrics | Stage::Crosstopic => &[Stage::Annotate, Stage::Graph, Stage::Groups],
            Stage::Report => {
                &[Stage::Ingest, Stage::Annotate, Stage::Graph, Stage::Groups, Stage::Metrics, Stage::Crosstopic]
            }
        }
    }

    /// Parses a comma-separated list into canonical order.
    pub fn parse_list(s: &str) -> Result<Vec<Stage>> {
        let mut stages =
            s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::parse).collect::<Result<Vec<Stage>>>()?;
        stages.sort();
        stages.dedup();
        if stages.is_empty() {
            return Err(Error::Config("empty stage list".into()));
        }
        Ok(stages)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL.into_iter().find(|st| st.as_str() == s).ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

/// Record of one stage execution, written as `<stage>/manifest.json`.
///
/// Input and output keys are paths relative to the run directory (external
/// inputs keep their own path); values are hex SHA-256 digests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: Stage,
    pub config_hash: String,
    pub tool_version: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_ms: u64,
    /// Set when this invocation reused the stored outputs.
    #[serde(skip)]
    pub cached: bool,
}

impl StageManifest {
    pub fn path(run_dir: &Path, stage: Stage) -> PathBuf {
        run_dir.join(stage.as_str()).join(MANIFEST_FILE)
    }

    pub fn load(run_dir: &Path, stage: Stage) -> Result<Option<Self>> {
        let path = Self::path(run_dir, stage);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }

    pub fn save(&self, run_dir: &Path) -> Result<()> {
        let path = Self::path(run_dir, self.stage);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Compares the recorded outputs with the files on disk.
    pub fn verify_outputs(&self, run_dir: &Path) -> Result<()> {
        let found = hash_tree(run_dir, self.stage)?;
        let diff = diff_hashes(&self.outputs, &found);
        if diff.is_empty() {
            Ok(())
        } else {
            Err(Error::HashMismatch { stage: self.stage.to_string(), diff })
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&data)))
}

/// Hashes of every file under `<run_dir>/<stage>/` except the manifest,
/// keyed by `/`-separated path relative to `run_dir`.
pub fn hash_tree(run_dir: &Path, stage: Stage) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let root = run_dir.join(stage.as_str());
    if root.exists() {
        walk(run_dir, &root, &mut out)?;
    }
    out.remove(&format!("{}/{MANIFEST_FILE}", stage.as_str()));
    Ok(out)
}

fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            walk(base, &path, out)?;
        } else {
            let rel = path.strip_prefix(base).expect("walk stays under base");
            let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            out.insert(key, sha256_file(&path)?);
        }
    }
    Ok(())
}

/// One line per differing key; empty when equal.
pub fn diff_hashes(recorded: &BTreeMap<String, String>, found: &BTreeMap<String, String>) -> String {
    let mut lines = Vec::new();
    for (k, v) in recorded {
        match found.get(k) {
            None => lines.push(format!("  missing  {k}")),
            Some(w) if w != v => lines.push(format!("  changed  {k} (recorded {}, found {})", &v[..12], &w[..12])),
            _ => {}
        }
    }
    for k in found.keys().filter(|k| !recorded.contains_key(*k)) {
        lines.push(format!("  extra    {k}"));
    }
    lines.join("\n")
}
