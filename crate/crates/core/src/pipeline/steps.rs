//! Stage building blocks shared by the pipeline and the per-module commands.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use super::stages::{read_jsonl, write_jsonl, AnnotationFailure, GraphSummary, LayerSummary};
use crate::annotate::{
    annotate_batch, assign_topic, classify_stance, classify_theme, sample_user_posts, AnnotationProvider, HttpProvider,
    LabelKind, LabelStore, MockProvider, RetryPolicy, StanceNames, ThemeLabel, Topic, STANCE_TEMPLATE, THEME_TEMPLATE,
    TOPIC_TEMPLATE,
};
use crate::graph::{
    build_bipartite, build_bundle, network_stats, save_network, Interaction, MultilayerBundle, TimeWindow, TopicNetwork,
};
use crate::groups::StanceGrouping;
use crate::ingest::{EventReader, PostRecord, RawEvent, RepostRecord, UserEdgeRecord};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Post and interaction records in their on-disk JSON-lines form.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub posts: Vec<PostRecord>,
    pub reposts: Vec<RepostRecord>,
    pub likes: Vec<UserEdgeRecord>,
    pub follows: Vec<UserEdgeRecord>,
    pub blocks: Vec<UserEdgeRecord>,
}

impl Corpus {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(Corpus {
            posts: read_jsonl(&dir.join("posts.jsonl"))?,
            reposts: read_jsonl(&dir.join("reposts.jsonl"))?,
            likes: read_jsonl(&dir.join("likes.jsonl"))?,
            follows: read_jsonl(&dir.join("follows.jsonl"))?,
            blocks: read_jsonl(&dir.join("blocks.jsonl"))?,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_jsonl(&dir.join("posts.jsonl"), &self.posts)?;
        write_jsonl(&dir.join("reposts.jsonl"), &self.reposts)?;
        write_jsonl(&dir.join("likes.jsonl"), &self.likes)?;
        write_jsonl(&dir.join("follows.jsonl"), &self.follows)?;
        write_jsonl(&dir.join("blocks.jsonl"), &self.blocks)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EventLoad {
    pub events: Vec<RawEvent>,
    pub malformed: u64,
    /// First few parse errors, prefixed with the file name.
    pub examples: Vec<String>,
}

pub fn read_event_files(files: &[PathBuf]) -> Result<EventLoad> {
    let mut out = EventLoad::default();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let reader = BufReader::new(File::open(f).map_err(|e| Error::io(f, e))?);
        for item in EventReader::new(reader) {
            match item {
                Ok(ev) => out.events.push(ev),
                Err(e) => {
                    out.malformed += 1;
                    if out.examples.len() < 20 {
                        out.examples.push(format!("{name}: {e}"));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `"mock"` selects the deterministic provider; anything else is an endpoint
/// URL, overridable through the environment.
pub fn make_provider(spec: &str, timeout: Duration) -> Result<Box<dyn AnnotationProvider>> {
    Ok(if spec == "mock" { Box::new(MockProvider) } else { Box::new(HttpProvider::from_env(Some(spec), timeout)?) })
}

/// Annotation errors and guard violations skip the item; anything else
/// (transport failures) aborts.
fn skip_or_fail<T>(
    r: Result<T>,
    kind: &str,
    id: &str,
    topic: Option<Topic>,
    failures: &mut Vec<AnnotationFailure>,
) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::Annotation { .. } | Error::Precondition(_))) => {
            failures.push(AnnotationFailure {
                kind: kind.into(),
                id: id.into(),
                topic: topic.map(|t| t.slug().to_string()),
                reason: e.to_string(),
            });
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Who is asked to annotate and how hard it tries.
pub struct Annotator<'a> {
    pub provider: &'a dyn AnnotationProvider,
    pub retry: RetryPolicy,
    pub in_flight: usize,
    pub failures: Vec<AnnotationFailure>,
}

/// Everything the stance step needs besides the annotator.
pub struct StanceInputs<'a> {
    pub posts: &'a [PostRecord],
    pub reposts: &'a [RepostRecord],
    pub topic_of: &'a HashMap<String, Topic>,
    pub topics: &'a [Topic],
    pub window: TimeWindow,
    pub sample: usize,
    pub seed: u64,
}

impl<'a> Annotator<'a> {
    pub fn new(provider: &'a dyn AnnotationProvider, max_attempts: usize, in_flight: usize) -> Self {
        Annotator { provider, retry: RetryPolicy { max_attempts }, in_flight, failures: Vec::new() }
    }

    pub fn themes(&mut self, posts: &[PostRecord]) -> Result<LabelStore> {
        let store = LabelStore::new(LabelKind::Theme);
        let hash = THEME_TEMPLATE.hash();
        let (provider, retry) = (self.provider, &self.retry);
        let results = annotate_batch(posts, self.in_flight, |p| classify_theme(p, provider, retry));
        for (post, r) in posts.iter().zip(results) {
            if let Some(label) = skip_or_fail(r, "theme", &post.uri, None, &mut self.failures)? {
                store.insert_theme(&label, &hash, post.created_at)?;
            }
        }
        Ok(store)
    }

    /// Topic labels for the posts whose theme is political.
    pub fn topics(&mut self, posts: &[PostRecord], themes: &[ThemeLabel]) -> Result<LabelStore> {
        let theme_of: HashMap<&str, &ThemeLabel> = themes.iter().map(|t| (t.post_uri.as_str(), t)).collect();
        let political: Vec<(&PostRecord, &ThemeLabel)> = posts
            .iter()
            .filter_map(|p| theme_of.get(p.uri.as_str()).filter(|t| t.theme.is_political()).map(|t| (p, *t)))
            .collect();
        let store = LabelStore::new(LabelKind::Topic);
        let hash = TOPIC_TEMPLATE.hash();
        let (provider, retry) = (self.provider, &self.retry);
        let results = annotate_batch(&political, self.in_flight, |(p, l)| assign_topic(p, l, provider, retry));
        for ((post, _), r) in political.iter().zip(results) {
            if let Some(label) = skip_or_fail(r, "topic", &post.uri, None, &mut self.failures)? {
                store.insert_topic(&label, &hash, post.created_at)?;
            }
        }
        Ok(store)
    }

    /// Stance labels for every participant of every topic. A label is
    /// stamped with the newest post in the sample it was judged on.
    pub fn stances(&mut self, input: &StanceInputs, names: impl Fn(Topic) -> StanceNames + Sync) -> Result<LabelStore> {
        let jobs = stance_jobs(input);
        let (provider, retry) = (self.provider, &self.retry);
        let results = annotate_batch(&jobs, self.in_flight, |(topic, user, corpus)| {
            let seed = derive_seed(input.seed, &format!("stance/{}/{user}", topic.slug()));
            let sample = sample_user_posts(user, corpus, input.sample, seed)?;
            let at = sample.iter().map(|p| p.created_at).max().expect("sample is non-empty");
            classify_stance(user, &sample, *topic, &names(*topic), provider, retry).map(|l| (l, at))
        });
        let store = LabelStore::new(LabelKind::Stance);
        let hash = STANCE_TEMPLATE.hash();
        for ((topic, user, _), r) in jobs.iter().zip(results) {
            if let Some((label, at)) = skip_or_fail(r, "stance", user, Some(*topic), &mut self.failures)? {
                store.insert_stance(&label, &hash, at)?;
            }
        }
        Ok(store)
    }
}

/// Stance participants: authors and reposters of the topic's posts in the
/// window, each with the topic posts they authored or reposted.
fn stance_jobs(input: &StanceInputs) -> Vec<(Topic, String, Vec<PostRecord>)> {
    let window = &input.window;
    let by_uri: HashMap<&str, &PostRecord> = input.posts.iter().map(|p| (p.uri.as_str(), p)).collect();
    let mut jobs = Vec::new();
    for &topic in input.topics {
        let on_topic = |p: &PostRecord| input.topic_of.get(&p.uri) == Some(&topic) && window.contains(p.created_at);
        let mut per_user: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for p in input.posts.iter().filter(|p| on_topic(p)) {
            per_user.entry(&p.author).or_default().insert(&p.uri);
        }
        for r in input.reposts.iter().filter(|r| window.contains(r.timestamp)) {
            if let Some(p) = by_uri.get(r.subject.as_str()).filter(|p| on_topic(p)) {
                per_user.entry(&r.reposter).or_default().insert(&p.uri);
            }
        }
        for (user, uris) in per_user {
            let corpus = uris.into_iter().map(|u| by_uri[u].clone()).collect();
            jobs.push((topic, user.to_string(), corpus));
        }
    }
    jobs
}

/// Post uri to topic, from a topic label file.
pub fn topic_index(path: &Path) -> Result<HashMap<String, Topic>> {
    Ok(LabelStore::load(path, LabelKind::Topic)?.topics().into_iter().map(|l| (l.post_uri, l.topic)).collect())
}

/// One multilayer bundle per topic, with the count of interactions whose
/// target post is missing from the corpus.
pub fn build_networks(
    corpus: &Corpus,
    topic_of: &HashMap<String, Topic>,
    topics: &[Topic],
    window: TimeWindow,
    include_isolated: bool,
) -> Vec<(u64, MultilayerBundle)> {
    topics
        .par_iter()
        .map(|&topic| {
            let b = build_bipartite(&corpus.posts, topic_of, &corpus.reposts, &corpus.likes, topic, &window);
            (b.dangling, build_bundle(&b, &corpus.follows, &corpus.blocks, topic, window, include_isolated))
        })
        .collect()
}

/// Saves every layer of every bundle under `root`.
pub fn save_networks(root: &Path, bundles: &[(u64, MultilayerBundle)]) -> Result<Vec<GraphSummary>> {
    let mut summaries = Vec::new();
    for (dangling, bundle) in bundles {
        let mut layers = BTreeMap::new();
        for tau in Interaction::ALL {
            let g = bundle.layer(tau);
            save_network(root, g)?;
            layers.insert(tau, LayerSummary { stats: network_stats(g), tally: g.tally });
        }
        summaries.push(GraphSummary {
            topic: bundle.topic,
            window: bundle.window.label(),
            participants: bundle.nodes.len() as u64,
            dangling_interactions: *dangling,
            layers,
        });
    }
    Ok(summaries)
}

/// `user<TAB>stance` per network node, `unlabeled` where no label exists.
pub fn write_content_groups(path: &Path, g: &TopicNetwork, s: &StanceGrouping) -> Result<()> {
    let mut out = String::from("user\tstance\n");
    for (u, st) in g.nodes.iter().zip(&s.assignment) {
        out.push_str(&format!("{u}\t{}\n", st.map_or("unlabeled", |s| s.as_str())));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
