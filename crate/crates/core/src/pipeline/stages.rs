use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::manifest::{hash_tree, sha256_file, Stage, StageManifest};
use super::report::render_report;
use super::steps::{
    build_networks, make_provider, read_event_files, save_networks, topic_index, write_content_groups, Annotator,
    Corpus, EventLoad, StanceInputs,
};
use crate::annotate::{
    LabelKind, LabelStore, StanceLabel, StanceNames, Topic, STANCE_TEMPLATE, THEME_TEMPLATE, TOPIC_TEMPLATE,
};
use crate::crosstopic::{
    alignment_matrix, grouping_from_partition, grouping_from_stances, jaccard_matrix, joint_stance_table,
    topic_hypergraph, GroupingSource, JointStanceTable,
};
use crate::graph::{load_network, Interaction, NetworkStats, ProjectionTally, TopicNetwork};
use crate::groups::{
    content_groups, detect_structural_groups, group_composition, read_partition, write_partition, write_sidecar,
};
use crate::ingest::{
    filter_corpus, sample_corpus, ActivityAccumulator, EventCorpus, PostRecord, RepostRecord, StatsOptions,
};
use crate::metrics::{
    metric_report, pairwise_aei, structural_report, GroupedGraphView, MetricReport, StructuralReport,
};
use crate::rng::derive_seed;
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs `stages` (all when `None`) in pipeline order.
///
/// A stage whose stored manifest matches its current inputs is reused and
/// reported as cached. Stages outside the selection are never run: their
/// stored outputs must exist and match their manifests.
pub fn run_pipeline(config: &PipelineConfig, stages: Option<&[Stage]>) -> Result<Vec<StageManifest>> {
    config.validate()?;
    let run_dir = config.run_dir();
    fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
    write_json(&run_dir.join("config.json"), config)?;
    let config_hash = config.hash();

    let selected: Vec<Stage> = stages.map(<[Stage]>::to_vec).unwrap_or_else(|| Stage::ALL.to_vec());
    let mut done: BTreeMap<Stage, StageManifest> = BTreeMap::new();
    let mut out = Vec::new();
    for stage in Stage::ALL.into_iter().filter(|s| selected.contains(s)) {
        let inputs = stage_inputs(config, &run_dir, stage, &mut done)?;
        if let Some(mut prev) = StageManifest::load(&run_dir, stage)? {
            if prev.inputs == inputs && prev.tool_version == TOOL_VERSION && prev.verify_outputs(&run_dir).is_ok() {
                prev.cached = true;
                done.insert(stage, prev.clone());
                out.push(prev);
                continue;
            }
        }
        let dir = run_dir.join(stage.as_str());
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let start = Instant::now();
        let ctx = Ctx { config, run_dir: &run_dir, seed: derive_seed(config.seed, stage.as_str()) };
        let upstream: Vec<StageManifest> = stage.upstream().iter().filter_map(|s| done.get(s).cloned()).collect();
        execute(stage, &ctx, &upstream).map_err(|e| match e {
            Error::Config(_) | Error::MissingArtifact { .. } | Error::HashMismatch { .. } | Error::Stage { .. } => e,
            other => Error::Stage { stage: stage.to_string(), message: other.to_string() },
        })?;
        let manifest = StageManifest {
            stage,
            config_hash: config_hash.clone(),
            tool_version: TOOL_VERSION.to_string(),
            inputs,
            outputs: hash_tree(&run_dir, stage)?,
            wall_time_ms: start.elapsed().as_millis() as u64,
            cached: false,
        };
        manifest.save(&run_dir)?;
        done.insert(stage, manifest.clone());
        out.push(manifest);
    }
    Ok(out)
}

/// Loads the manifests stored in a run directory, in pipeline order.
pub fn load_manifests(run_dir: &Path) -> Result<Vec<StageManifest>> {
    let mut out = Vec::new();
    for stage in Stage::ALL {
        if let Some(m) = StageManifest::load(run_dir, stage)? {
            out.push(m);
        }
    }
    Ok(out)
}

fn stage_inputs(
    config: &PipelineConfig,
    run_dir: &Path,
    stage: Stage,
    done: &mut BTreeMap<Stage, StageManifest>,
) -> Result<BTreeMap<String, String>> {
    let mut inputs = BTreeMap::new();
    if stage == Stage::Ingest {
        for f in config.input_files()? {
            inputs.insert(f.display().to_string(), sha256_file(&f)?);
        }
        return Ok(inputs);
    }
    // Nearest upstream first, so a missing artifact names the closest stage.
    for &up in stage.upstream().iter().rev() {
        if !done.contains_key(&up) {
            let m = StageManifest::load(run_dir, up)?.ok_or_else(|| Error::MissingArtifact {
                upstream: up.to_string(),
                message: format!(
                    "stage `{stage}` needs the outputs of `{up}` under {}; run `{up}` first",
                    run_dir.display()
                ),
            })?;
            m.verify_outputs(run_dir)?;
            done.insert(up, m);
        }
        inputs.extend(done[&up].outputs.clone());
    }
    Ok(inputs)
}

struct Ctx<'a> {
    config: &'a PipelineConfig,
    run_dir: &'a Path,
    seed: u64,
}

impl Ctx<'_> {
    fn path(&self, stage: Stage, rel: &str) -> PathBuf {
        self.run_dir.join(stage.as_str()).join(rel)
    }

    fn networks_root(&self) -> PathBuf {
        self.path(Stage::Graph, "networks")
    }

    fn network(&self, topic: Topic) -> Result<TopicNetwork> {
        load_network(&self.networks_root(), topic, &self.config.topics.window, Interaction::Reposts)
    }

    fn stances(&self) -> Result<Vec<StanceLabel>> {
        Ok(LabelStore::load(&self.path(Stage::Annotate, "stances.jsonl"), LabelKind::Stance)?.stances())
    }

    fn partition_path(&self, topic: Topic) -> PathBuf {
        self.path(Stage::Groups, &format!("structural/{}.tsv", topic.slug()))
    }
}

fn execute(stage: Stage, ctx: &Ctx, upstream: &[StageManifest]) -> Result<()> {
    match stage {
        Stage::Ingest => run_ingest(ctx),
        Stage::Annotate => run_annotate(ctx),
        Stage::Graph => run_graph(ctx),
        Stage::Groups => run_groups(ctx),
        Stage::Metrics => run_metrics(ctx),
        Stage::Crosstopic => run_crosstopic(ctx),
        Stage::Report => render_report(ctx.run_dir, upstream)?.write_to(&ctx.run_dir.join(Stage::Report.as_str())),
    }
}

// ---------------------------------------------------------------- ingest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub input_files: Vec<String>,
    pub events: u64,
    pub malformed_lines: u64,
    pub malformed_examples: Vec<String>,
    pub posts_total: u64,
    pub posts_filtered: u64,
    pub posts_sampled: u64,
    pub duplicate_post_uris: u64,
    pub reposts: u64,
    pub likes: u64,
    pub follows: u64,
    pub blocks: u64,
}

fn run_ingest(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.config.ingest;
    let files = ctx.config.input_files()?;
    let EventLoad { events, malformed, examples } = read_event_files(&files)?;

    let mut acc = ActivityAccumulator::new();
    for ev in &events {
        acc.push(ev);
    }
    let options = StatsOptions {
        window: cfg.collection_window.map(|w| (w.first_day(), w.last_day())),
        downtime: cfg.downtime.intervals(),
    };
    let stats = acc.finish(&options);
    write_json(&ctx.path(Stage::Ingest, "activity.json"), &stats)?;
    let daily = ctx.path(Stage::Ingest, "daily.csv");
    stats.write_daily_csv(File::create(&daily).map_err(|e| Error::io(&daily, e))?)?;

    let corpus = EventCorpus::from_events(&events);
    let filtered = filter_corpus(&corpus.posts, &ctx.config.filter_options());
    let sampled = sample_corpus(&filtered, cfg.sample_fraction, derive_seed(ctx.seed, "sample"), cfg.sampling)?;
    let out = Corpus {
        posts: sampled,
        reposts: corpus.reposts,
        likes: corpus.likes,
        follows: corpus.follows,
        blocks: corpus.blocks,
    };
    out.save(&ctx.path(Stage::Ingest, ""))?;

    let summary = IngestSummary {
        input_files: files.iter().filter_map(|f| f.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        events: events.len() as u64,
        malformed_lines: malformed,
        malformed_examples: examples,
        posts_total: corpus.posts.len() as u64,
        posts_filtered: filtered.len() as u64,
        posts_sampled: out.posts.len() as u64,
        duplicate_post_uris: corpus.duplicate_post_uris,
        reposts: out.reposts.len() as u64,
        likes: out.likes.len() as u64,
        follows: out.follows.len() as u64,
        blocks: out.blocks.len() as u64,
    };
    write_json(&ctx.path(Stage::Ingest, "summary.json"), &summary)
}

// -------------------------------------------------------------- annotate

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnotationFailure {
    pub kind: String,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotateSummary {
    pub provider: String,
    pub template_hashes: BTreeMap<String, String>,
    pub posts: u64,
    pub theme_labels: u64,
    pub political_posts: u64,
    pub topic_labels: u64,
    /// Stance-labelled users per topic slug.
    pub stance_labels: BTreeMap<String, u64>,
    pub failures: Vec<AnnotationFailure>,
}

fn run_annotate(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.config.annotate;
    let posts: Vec<PostRecord> = read_jsonl(&ctx.path(Stage::Ingest, "posts.jsonl"))?;
    let reposts: Vec<RepostRecord> = read_jsonl(&ctx.path(Stage::Ingest, "reposts.jsonl"))?;
    let provider = make_provider(&cfg.provider, Duration::from_secs(cfg.timeout_secs))?;
    let mut annotator = Annotator::new(provider.as_ref(), cfg.max_attempts, cfg.in_flight);

    let themes = annotator.themes(&posts)?;
    let theme_labels = themes.themes();
    let political = theme_labels.iter().filter(|t| t.theme.is_political()).count();
    let topics = annotator.topics(&posts, &theme_labels)?;
    let topic_of: HashMap<String, Topic> = topics.topics().into_iter().map(|l| (l.post_uri, l.topic)).collect();
    let input = StanceInputs {
        posts: &posts,
        reposts: &reposts,
        topic_of: &topic_of,
        topics: &ctx.config.topics.list,
        window: ctx.config.topics.window,
        sample: cfg.stance_sample,
        seed: ctx.seed,
    };
    let stances = annotator.stances(&input, |t| ctx.config.topics.names(t))?;
    let mut stance_counts: BTreeMap<String, u64> =
        ctx.config.topics.list.iter().map(|t| (t.slug().to_string(), 0)).collect();
    for l in stances.stances() {
        *stance_counts.get_mut(l.topic.slug()).expect("configured topic") += 1;
    }

    themes.save(&ctx.path(Stage::Annotate, "themes.jsonl"))?;
    topics.save(&ctx.path(Stage::Annotate, "topics.jsonl"))?;
    stances.save(&ctx.path(Stage::Annotate, "stances.jsonl"))?;
    let mut failures = annotator.failures;
    failures.sort();
    let summary = AnnotateSummary {
        provider: if cfg.is_mock() { "mock".into() } else { "http".into() },
        template_hashes: [
            (THEME_TEMPLATE.id.to_string(), THEME_TEMPLATE.hash()),
            (TOPIC_TEMPLATE.id.to_string(), TOPIC_TEMPLATE.hash()),
            (STANCE_TEMPLATE.id.to_string(), STANCE_TEMPLATE.hash()),
        ]
        .into_iter()
        .collect(),
        posts: posts.len() as u64,
        theme_labels: themes.len() as u64,
        political_posts: political as u64,
        topic_labels: topics.len() as u64,
        stance_labels: stance_counts,
        failures,
    };
    write_json(&ctx.path(Stage::Annotate, "summary.json"), &summary)
}

// ----------------------------------------------------------------- graph

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub stats: NetworkStats,
    pub tally: ProjectionTally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub topic: Topic,
    pub window: String,
    /// Users in the likes or reposts layer.
    pub participants: u64,
    pub dangling_interactions: u64,
    pub layers: BTreeMap<Interaction, LayerSummary>,
}

fn run_graph(ctx: &Ctx) -> Result<()> {
    let corpus = Corpus::load(&ctx.path(Stage::Ingest, ""))?;
    let topic_of = topic_index(&ctx.path(Stage::Annotate, "topics.jsonl"))?;
    let t = &ctx.config.topics;
    let bundles = build_networks(&corpus, &topic_of, &t.list, t.window, t.include_isolated);
    let summaries = save_networks(&ctx.networks_root(), &bundles)?;
    write_json(&ctx.path(Stage::Graph, "summary.json"), &summaries)
}

// ---------------------------------------------------------------- groups

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub topic: Topic,
    pub nodes: u64,
    pub edges: u64,
    pub labelled: u64,
    pub coverage: f64,
    pub blocks: Option<usize>,
    pub description_length: Option<f64>,
    pub single_block_dl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn run_groups(ctx: &Ctx) -> Result<()> {
    let stances = ctx.stances()?;
    for sub in ["content", "structural", "composition"] {
        let d = ctx.path(Stage::Groups, sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let results: Vec<Result<GroupSummary>> = ctx
        .config
        .topics
        .list
        .par_iter()
        .map(|&topic| {
            let g = ctx.network(topic)?;
            let content = content_groups(&stances, &g)?;
            write_content_groups(&ctx.path(Stage::Groups, &format!("content/{}.tsv", topic.slug())), &g, &content)?;
            let mut summary = GroupSummary {
                topic,
                nodes: g.node_count() as u64,
                edges: g.edge_count() as u64,
                labelled: (g.node_count() - content.unlabeled) as u64,
                coverage: content.coverage,
                blocks: None,
                description_length: None,
                single_block_dl: None,
                note: None,
            };
            if g.edge_count() == 0 {
                summary.note = Some("no repost edges; structural groups absent".into());
                return Ok(summary);
            }
            let opts = ctx.config.groups.options(derive_seed(ctx.seed, topic.slug()));
            let found = detect_structural_groups(&g, &opts)?;
            write_partition(&ctx.partition_path(topic), &g, &found.partition)?;
            write_sidecar(&ctx.path(Stage::Groups, &format!("structural/{}.json", topic.slug())), &found)?;
            let comp = group_composition(&found.partition, &content)?;
            write_json(&ctx.path(Stage::Groups, &format!("composition/{}.json", topic.slug())), &comp)?;
            summary.blocks = Some(found.partition.blocks);
            summary.description_length = Some(found.partition.dl);
            summary.single_block_dl = Some(found.single_block_dl);
            Ok(summary)
        })
        .collect();
    let summaries = results.into_iter().collect::<Result<Vec<_>>>()?;
    write_json(&ctx.path(Stage::Groups, "summary.json"), &summaries)
}

// --------------------------------------------------------------- metrics

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceRow {
    pub topic: Topic,
    pub report: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralRow {
    pub topic: Topic,
    pub report: Option<StructuralReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn run_metrics(ctx: &Ctx) -> Result<()> {
    let stances = ctx.stances()?;
    let opts = ctx.config.metrics.options();
    let pairwise_dir = ctx.path(Stage::Metrics, "pairwise");
    fs::create_dir_all(&pairwise_dir).map_err(|e| Error::io(&pairwise_dir, e))?;
    let mut stance_rows = Vec::new();
    let mut structural_rows = Vec::new();
    for &topic in &ctx.config.topics.list {
        let g = ctx.network(topic)?;
        let s = content_groups(&stances, &g)?;
        let names = ctx.config.topics.names(topic);
        stance_rows.push(match metric_report(&g, &s, &names, &opts) {
            Ok(r) => StanceRow { topic, report: Some(r), note: None },
            Err(e @ Error::Precondition(_)) => StanceRow { topic, report: None, note: Some(e.to_string()) },
            Err(e) => return Err(e),
        });
        let path = ctx.partition_path(topic);
        if !path.exists() {
            structural_rows.push(StructuralRow { topic, report: None, note: Some("no structural partition".into()) });
            continue;
        }
        let p = read_partition(&path, &g, ctx.config.groups.simple_graph)?;
        let pairs = pairwise_aei(&GroupedGraphView::from_partition(&g, &p)?)?;
        fs::write(pairwise_dir.join(format!("{}.csv", topic.slug())), pairs.to_csv())
            .map_err(|e| Error::io(&pairwise_dir, e))?;
        structural_rows.push(StructuralRow { topic, report: Some(structural_report(&g, &p, &s, &names)?), note: None });
    }
    write_json(&ctx.path(Stage::Metrics, "stance.json"), &stance_rows)?;
    write_json(&ctx.path(Stage::Metrics, "structural.json"), &structural_rows)
}

// ------------------------------------------------------------ crosstopic

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstopicSummary {
    pub topics: Vec<String>,
    pub overlap: bool,
    pub alignment_content: bool,
    pub alignment_structural: bool,
    pub joint_tables: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A joint table with the stance names its CSV was written with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedJointTable {
    pub name: String,
    pub names_x: StanceNames,
    pub names_y: StanceNames,
    pub table: JointStanceTable,
}

fn run_crosstopic(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.config.crosstopic;
    let stances = ctx.stances()?;
    let nets: Vec<TopicNetwork> = ctx
        .config
        .topics
        .list
        .iter()
        .map(|&t| ctx.network(t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|g| g.node_count() > 0)
        .collect();
    let labels: Vec<String> = nets.iter().map(|g| g.topic.slug().to_string()).collect();
    let mut summary = CrosstopicSummary {
        topics: labels.clone(),
        overlap: false,
        alignment_content: false,
        alignment_structural: false,
        joint_tables: Vec::new(),
        notes: Vec::new(),
    };

    if nets.len() >= 2 {
        let refs: Vec<&TopicNetwork> = nets.iter().collect();
        let overlap = jaccard_matrix(&refs)?;
        write_text(&ctx.path(Stage::Crosstopic, "overlap.csv"), &overlap.to_csv())?;
        write_json(&ctx.path(Stage::Crosstopic, "overlap.json"), &overlap)?;
        let hyper = topic_hypergraph(&overlap, cfg.threshold, cfg.strict)?;
        write_json(&ctx.path(Stage::Crosstopic, "hypergraph.json"), &hyper)?;
        summary.overlap = true;

        let content: Vec<_> = nets
            .iter()
            .map(|g| Ok(grouping_from_stances(g, &content_groups(&stances, g)?, cfg.alignment_neutral)))
            .collect::<Result<Vec<_>>>()?;
        let m = alignment_matrix(labels.clone(), &content, GroupingSource::Content, cfg.nmi)?;
        write_text(&ctx.path(Stage::Crosstopic, "alignment_content.csv"), &m.to_csv())?;
        write_json(&ctx.path(Stage::Crosstopic, "alignment_content.json"), &m)?;
        summary.alignment_content = true;

        let mut s_labels = Vec::new();
        let mut structural = Vec::new();
        for g in &nets {
            let path = ctx.partition_path(g.topic);
            if path.exists() {
                structural.push(grouping_from_partition(g, &read_partition(&path, g, ctx.config.groups.simple_graph)?));
                s_labels.push(g.topic.slug().to_string());
            }
        }
        if structural.len() >= 2 {
            let m = alignment_matrix(s_labels, &structural, GroupingSource::Structural, cfg.nmi)?;
            write_text(&ctx.path(Stage::Crosstopic, "alignment_structural.csv"), &m.to_csv())?;
            write_json(&ctx.path(Stage::Crosstopic, "alignment_structural.json"), &m)?;
            summary.alignment_structural = true;
        } else {
            summary.notes.push("fewer than two topics with structural groups; structural alignment absent".into());
        }
    } else {
        summary.notes.push("fewer than two non-empty topic networks; overlap and alignment absent".into());
    }

    let topics = &ctx.config.topics.list;
    let mut tables: Vec<NamedJointTable> = Vec::new();
    for (i, &x) in topics.iter().enumerate() {
        for &y in &topics[i + 1..] {
            if let Some(table) = joint_stance_table(&stances, x, &stances, y)? {
                let name = format!("{}__{}", x.slug(), y.slug());
                let dir = ctx.path(Stage::Crosstopic, "joint");
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                let (names_x, names_y) = (ctx.config.topics.names(x), ctx.config.topics.names(y));
                write_text(&dir.join(format!("{name}.csv")), &table.to_csv(&names_x, &names_y))?;
                summary.joint_tables.push(name.clone());
                tables.push(NamedJointTable { name, names_x, names_y, table });
            }
        }
    }
    if !tables.is_empty() {
        write_json(&ctx.path(Stage::Crosstopic, "joint.json"), &tables)?;
    }
    write_json(&ctx.path(Stage::Crosstopic, "summary.json"), &summary)
}

// ------------------------------------------------------------------- io

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}
