//! Staged, cached end-to-end runs.
//!
//! A run lives in `<workdir>/<config hash prefix>/`. Each stage writes into
//! its own subdirectory together with a manifest recording the hashes of
//! what it read and wrote; a stage is skipped when its manifest still
//! matches, and refuses to run on top of upstream outputs that changed
//! after they were recorded.

mod config;
mod fixture;
mod manifest;
mod report;
mod stages;
mod steps;

pub use config::{
    expand_inputs, AnnotateConfig, CrosstopicConfig, DowntimeConfig, GroupsConfig, IngestConfig, MetricsConfig,
    PipelineConfig, TopicsConfig,
};
pub use fixture::{
    fixture_config, generate_fixture, write_fixture, Fixture, FixtureTruth, FIXTURE_EVENTS, FIXTURE_SEED,
    FIXTURE_TOPICS, FIXTURE_USERS,
};
pub use manifest::{diff_hashes, hash_tree, sha256_file, Stage, StageManifest, MANIFEST_FILE};
pub use report::{fmt_count, fmt_index, render_report, ReportBundle, ABSENT};
pub use stages::{
    load_manifests, run_pipeline, AnnotateSummary, AnnotationFailure, CrosstopicSummary, GraphSummary, GroupSummary,
    IngestSummary, LayerSummary, NamedJointTable, StanceRow, StructuralRow, TOOL_VERSION,
};
pub use stages::{read_jsonl, write_json, write_jsonl};
pub use steps::{
    build_networks, make_provider, read_event_files, save_networks, topic_index, write_content_groups, Annotator,
    Corpus, EventLoad, StanceInputs,
};
