use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotate::{StanceNames, Topic};
use crate::crosstopic::NmiNormalization;
use crate::graph::TimeWindow;
use crate::groups::DetectOptions;
use crate::ingest::{firehose_outages_2025, Downtime, FilterOptions, SamplingMode};
use crate::metrics::MetricOptions;
use crate::{Error, Result};

/// Full pipeline configuration, read from TOML.
///
/// Relative paths are resolved against the directory holding the config
/// file. Everything except `workdir` feeds the config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; every stochastic step derives its seed from it.
    pub seed: u64,
    #[serde(default = "default_workdir")]
    pub workdir: PathBuf,
    pub ingest: IngestConfig,
    #[serde(default)]
    pub annotate: AnnotateConfig,
    pub topics: TopicsConfig,
    #[serde(default)]
    pub groups: GroupsConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub crosstopic: CrosstopicConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn default_workdir() -> PathBuf {
    PathBuf::from("polarnet-runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    /// Glob patterns of event dump files.
    pub inputs: Vec<String>,
    #[serde(default = "one")]
    pub min_reposts: u64,
    #[serde(default = "five")]
    pub min_chars: usize,
    #[serde(default = "english")]
    pub lang: String,
    #[serde(default = "three_percent")]
    pub sample_fraction: f64,
    #[serde(default)]
    pub sampling: SamplingMode,
    /// Collection window for the activity table, `YYYY-MM-DD:YYYY-MM-DD`.
    #[serde(default)]
    pub collection_window: Option<TimeWindow>,
    #[serde(default)]
    pub downtime: DowntimeConfig,
}

fn one() -> u64 {
    1
}
fn five() -> usize {
    5
}
fn english() -> String {
    "en".into()
}
fn three_percent() -> f64 {
    0.03
}

/// Collection outages subtracted from the observed days.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DowntimeConfig {
    #[default]
    None,
    /// The known 2025 firehose outages.
    Firehose2025,
    Explicit(Vec<Downtime>),
}

impl DowntimeConfig {
    pub fn intervals(&self) -> Vec<Downtime> {
        match self {
            DowntimeConfig::None => Vec::new(),
            DowntimeConfig::Firehose2025 => firehose_outages_2025(),
            DowntimeConfig::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotateConfig {
    /// `mock`, or an HTTP endpoint URL.
    #[serde(default = "mock")]
    pub provider: String,
    #[serde(default = "eight")]
    pub in_flight: usize,
    #[serde(default = "three")]
    pub max_attempts: usize,
    #[serde(default = "ten")]
    pub stance_sample: usize,
    #[serde(default = "thirty")]
    pub timeout_secs: u64,
}

fn mock() -> String {
    "mock".into()
}
fn eight() -> usize {
    8
}
fn three() -> usize {
    3
}
fn ten() -> usize {
    10
}
fn thirty() -> u64 {
    30
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        Self {
            provider: mock(),
            in_flight: eight(),
            max_attempts: three(),
            stance_sample: ten(),
            timeout_secs: thirty(),
        }
    }
}

impl AnnotateConfig {
    pub fn is_mock(&self) -> bool {
        self.provider == "mock"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicsConfig {
    /// Topic slugs or display names.
    pub list: Vec<Topic>,
    pub window: TimeWindow,
    #[serde(default)]
    pub include_isolated: bool,
    /// Overrides of the default stance display names, keyed by topic slug.
    #[serde(default)]
    pub stance_names: BTreeMap<String, StanceNames>,
}

impl TopicsConfig {
    pub fn names(&self, topic: Topic) -> StanceNames {
        self.stance_names.get(topic.slug()).cloned().unwrap_or_else(|| StanceNames::defaults(topic))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupsConfig {
    pub max_groups: usize,
    pub runs: usize,
    pub iters: usize,
    pub simple_graph: bool,
}

impl Default for GroupsConfig {
    fn default() -> Self {
        let d = DetectOptions::default();
        Self { max_groups: d.max_groups, runs: d.runs, iters: d.iters, simple_graph: d.simple_graph }
    }
}

impl GroupsConfig {
    pub fn options(&self, seed: u64) -> DetectOptions {
        DetectOptions {
            max_groups: self.max_groups,
            runs: self.runs,
            iters: self.iters,
            seed,
            simple_graph: self.simple_graph,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default)]
    pub include_neutral: bool,
    #[serde(default)]
    pub three_group_simpson: bool,
}

impl MetricsConfig {
    pub fn options(&self) -> MetricOptions {
        MetricOptions { include_neutral: self.include_neutral, three_group_simpson: self.three_group_simpson }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosstopicConfig {
    pub threshold: f64,
    /// Keep pairs with overlap strictly above the threshold.
    pub strict: bool,
    pub nmi: NmiNormalization,
    /// Keep neutral users as a third class in content-based alignment;
    /// when off they are dropped before computing NMI.
    pub alignment_neutral: bool,
}

impl Default for CrosstopicConfig {
    fn default() -> Self {
        Self { threshold: 0.2, strict: true, nmi: NmiNormalization::Arithmetic, alignment_neutral: true }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.ingest.inputs.is_empty() {
            return bad("ingest.inputs is empty".into());
        }
        if !(self.ingest.sample_fraction > 0.0 && self.ingest.sample_fraction <= 1.0) {
            return bad(format!("ingest.sample_fraction must be in (0, 1], got {}", self.ingest.sample_fraction));
        }
        if self.topics.list.is_empty() {
            return bad("topics.list is empty".into());
        }
        if let Some(t) = self.topics.list.iter().find(|t| **t == Topic::Other) {
            return bad(format!("topic `{}` cannot be analysed", t.slug()));
        }
        for key in self.topics.stance_names.keys() {
            if Topic::parse(key).is_err() {
                return bad(format!("topics.stance_names has unknown topic `{key}`"));
            }
        }
        if self.annotate.in_flight == 0 || self.annotate.max_attempts == 0 || self.annotate.stance_sample == 0 {
            return bad("annotate.in_flight, max_attempts and stance_sample must be positive".into());
        }
        if self.groups.max_groups == 0 || self.groups.runs == 0 || self.groups.iters == 0 {
            return bad("groups.max_groups, runs and iters must be positive".into());
        }
        if !(self.crosstopic.threshold > 0.0 && self.crosstopic.threshold < 1.0) {
            return bad(format!("crosstopic.threshold must be in (0, 1), got {}", self.crosstopic.threshold));
        }
        Ok(())
    }

    /// Hex SHA-256 over the canonical JSON form, without `workdir`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("workdir");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn workdir(&self) -> PathBuf {
        self.resolve(&self.workdir)
    }

    /// `<workdir>/<first 16 hex digits of the config hash>`.
    pub fn run_dir(&self) -> PathBuf {
        self.workdir().join(&self.hash()[..16])
    }

    pub fn set_workdir(&mut self, dir: PathBuf) {
        self.workdir = dir;
    }

    /// Input files matched by the ingest globs, sorted and deduplicated.
    pub fn input_files(&self) -> Result<Vec<PathBuf>> {
        expand_inputs(&self.base_dir, &self.ingest.inputs)
    }

    pub fn filter_options(&self) -> FilterOptions {
        FilterOptions {
            min_reposts: self.ingest.min_reposts,
            min_chars: self.ingest.min_chars,
            lang: self.ingest.lang.clone(),
        }
    }
}

/// Files matched by `patterns` (relative ones resolved against `base`),
/// sorted and deduplicated. A pattern matching nothing is a config error.
pub fn expand_inputs(base: &Path, patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for pattern in patterns {
        let full = base.join(pattern);
        let pattern_str = full.to_string_lossy();
        let matches =
            glob::glob(&pattern_str).map_err(|e| Error::Config(format!("bad input glob `{pattern}`: {e}")))?;
        let before = files.len();
        for m in matches {
            let path = m.map_err(|e| Error::Config(e.to_string()))?;
            if path.is_file() {
                files.push(path);
            }
        }
        if files.len() == before {
            return Err(Error::Config(format!("input glob `{pattern}` matched no files")));
        }
    }
    files.sort();
    files.dedup();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[ingest]
inputs = ["events.jsonl"]
[topics]
list = ["trump", "Russia-Ukraine"]
window = "2024-12:2025-05"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = PipelineConfig::from_toml(MINIMAL, Path::new("/data")).unwrap();
        assert_eq!(c.topics.list, vec![Topic::TrumpAdministration, Topic::RussiaUkraine]);
        assert_eq!(c.ingest.sample_fraction, 0.03);
        assert_eq!(c.groups.runs, 15);
        assert_eq!(c.crosstopic.threshold, 0.2);
        assert!(c.annotate.is_mock());
        assert_eq!(c.workdir(), PathBuf::from("/data/polarnet-runs"));
    }

    #[test]
    fn seed_is_mandatory() {
        let text = MINIMAL.replace("seed = 7", "");
        assert!(matches!(PipelineConfig::from_toml(&text, Path::new(".")), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let text = MINIMAL.replace("seed = 7", "seed = 7\nsede = 8");
        assert!(PipelineConfig::from_toml(&text, Path::new(".")).is_err());
        let text = format!(
            "{MINIMAL}[crosstopic]\nthreshold = 1.5\nstrict = true\nnmi = \"arithmetic\"\nalignment_neutral = false\n"
        );
        assert!(matches!(PipelineConfig::from_toml(&text, Path::new(".")), Err(Error::Config(_))));
    }

    #[test]
    fn hash_ignores_workdir_only() {
        let a = PipelineConfig::from_toml(MINIMAL, Path::new(".")).unwrap();
        let mut b = a.clone();
        b.set_workdir("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        let c = PipelineConfig::from_toml(&MINIMAL.replace("seed = 7", "seed = 8"), Path::new(".")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn downtime_variants_parse() {
        let text = format!("{MINIMAL}").replace("[topics]", "downtime = \"firehose2025\"\n[topics]");
        let c = PipelineConfig::from_toml(&text, Path::new(".")).unwrap();
        assert!(!c.ingest.downtime.intervals().is_empty());
    }
}
