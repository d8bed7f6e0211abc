use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{DateTime, NaiveDate, Utc};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::event::{Collection, Payload, RawEvent};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub uri: String,
    pub author: String,
    pub text: String,
    pub langs: Vec<String>,
    pub created_at: DateTime<Utc>,
    /// Number of distinct repost events referencing `uri` in the same stream.
    pub repost_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepostRecord {
    pub uri: Option<String>,
    pub reposter: String,
    pub subject: String,
    pub timestamp: DateTime<Utc>,
}

/// A user-to-user record (follow or block), or a like pointing at a post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserEdgeRecord {
    pub source: String,
    pub subject: String,
    pub timestamp: DateTime<Utc>,
}

/// The create-action content of a stream, split by collection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventCorpus {
    pub posts: Vec<PostRecord>,
    pub reposts: Vec<RepostRecord>,
    pub likes: Vec<UserEdgeRecord>,
    pub follows: Vec<UserEdgeRecord>,
    pub blocks: Vec<UserEdgeRecord>,
    pub duplicate_post_uris: u64,
}

impl EventCorpus {
    /// Collects create events. Repost counts are computed from repost events
    /// of this same stream only; a repost is counted once per distinct
    /// repost record.
    pub fn from_events<'a, I>(events: I) -> Self
    where
        I: IntoIterator<Item = &'a RawEvent>,
    {
        let mut corpus = EventCorpus::default();
        let mut seen_posts = HashSet::new();
        for ev in events.into_iter().filter(|e| e.is_create()) {
            match (&ev.collection, &ev.payload) {
                (Collection::Post, Payload::Post { uri, text, langs }) => {
                    if !seen_posts.insert(uri.clone()) {
                        corpus.duplicate_post_uris += 1;
                        continue;
                    }
                    corpus.posts.push(PostRecord {
                        uri: uri.clone(),
                        author: ev.author.clone(),
                        text: text.clone(),
                        langs: langs.clone(),
                        created_at: ev.timestamp,
                        repost_count: 0,
                    });
                }
                (Collection::Repost, Payload::Reference { uri, subject }) => corpus.reposts.push(RepostRecord {
                    uri: uri.clone(),
                    reposter: ev.author.clone(),
                    subject: subject.clone(),
                    timestamp: ev.timestamp,
                }),
                (Collection::Like, Payload::Reference { subject, .. }) => corpus.likes.push(user_edge(ev, subject)),
                (Collection::Follow, Payload::Reference { subject, .. }) => corpus.follows.push(user_edge(ev, subject)),
                (Collection::Block, Payload::Reference { subject, .. }) => corpus.blocks.push(user_edge(ev, subject)),
                _ => {}
            }
        }

        let mut distinct: HashMap<&str, HashSet<(Option<&str>, &str, DateTime<Utc>)>> = HashMap::new();
        for r in &corpus.reposts {
            let key = match &r.uri {
                Some(uri) => (Some(uri.as_str()), "", DateTime::<Utc>::MIN_UTC),
                None => (None, r.reposter.as_str(), r.timestamp),
            };
            distinct.entry(r.subject.as_str()).or_default().insert(key);
        }
        let counts: HashMap<String, u64> = distinct.into_iter().map(|(k, v)| (k.to_string(), v.len() as u64)).collect();
        for p in &mut corpus.posts {
            p.repost_count = counts.get(&p.uri).copied().unwrap_or(0);
        }
        corpus
    }
}

fn user_edge(ev: &RawEvent, subject: &str) -> UserEdgeRecord {
    UserEdgeRecord { source: ev.author.clone(), subject: subject.to_string(), timestamp: ev.timestamp }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOptions {
    pub min_reposts: u64,
    /// Minimum length in unicode scalar values.
    pub min_chars: usize,
    pub lang: String,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self { min_reposts: 1, min_chars: 5, lang: "en".into() }
    }
}

impl FilterOptions {
    pub fn accepts(&self, post: &PostRecord) -> bool {
        post.repost_count >= self.min_reposts
            && post.text.chars().count() >= self.min_chars
            && post.langs.iter().any(|l| l == &self.lang)
    }
}

pub fn filter_corpus(posts: &[PostRecord], options: &FilterOptions) -> Vec<PostRecord> {
    posts.iter().filter(|p| options.accepts(p)).cloned().collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    #[default]
    Uniform,
    /// Allocates the sample across UTC creation days proportionally
    /// (largest remainder), then samples uniformly within each day.
    StratifiedByDay,
}

/// Number of posts drawn from `n` at `fraction`: the nearest integer to `fraction * n`.
pub fn sample_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).min(n)
}

/// Uniform sample without replacement. Output keeps the input order.
pub fn sample_corpus(posts: &[PostRecord], fraction: f64, seed: u64, mode: SamplingMode) -> Result<Vec<PostRecord>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("sample fraction must be in (0, 1], got {fraction}")));
    }
    if fraction == 1.0 {
        return Ok(posts.to_vec());
    }
    let mut rng = rng_from_seed(seed);
    let mut picked: Vec<usize> = match mode {
        SamplingMode::Uniform => index::sample(&mut rng, posts.len(), sample_size(posts.len(), fraction)).into_vec(),
        SamplingMode::StratifiedByDay => {
            let mut by_day: BTreeMap<NaiveDate, Vec<usize>> = BTreeMap::new();
            for (i, p) in posts.iter().enumerate() {
                by_day.entry(p.created_at.date_naive()).or_default().push(i);
            }
            let total = sample_size(posts.len(), fraction);
            let quotas = largest_remainder(&by_day.values().map(Vec::len).collect::<Vec<_>>(), posts.len(), total);
            by_day
                .values()
                .zip(quotas)
                .flat_map(|(members, q)| {
                    index::sample(&mut rng, members.len(), q).into_iter().map(|j| members[j]).collect::<Vec<_>>()
                })
                .collect()
        }
    };
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| posts[i].clone()).collect())
}

fn largest_remainder(sizes: &[usize], n: usize, total: usize) -> Vec<usize> {
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * total as f64 / n as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total - quotas.iter().sum::<usize>();
    for i in order {
        if missing == 0 {
            break;
        }
        if quotas[i] < sizes[i] {
            quotas[i] += 1;
            missing -= 1;
        }
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::event::Action;

    fn rec(text: &str, reposts: u64, langs: &[&str]) -> PostRecord {
        PostRecord {
            uri: format!("at://{text}"),
            author: "did:plc:a".into(),
            text: text.into(),
            langs: langs.iter().map(|s| s.to_string()).collect(),
            created_at: "2025-01-01T00:00:00Z".parse().unwrap(),
            repost_count: reposts,
        }
    }

    fn posts(n: usize) -> Vec<PostRecord> {
        (0..n)
            .map(|i| {
                let mut p = rec(&format!("post number {i}"), 1, &["en"]);
                p.created_at = DateTime::from_timestamp(1_735_689_600 + (i as i64 % 5) * 86_400, 0).unwrap();
                p
            })
            .collect()
    }

    #[test]
    fn length_rule() {
        let opts = FilterOptions::default();
        assert!(!opts.accepts(&rec("abcd", 3, &["en"])));
        assert!(opts.accepts(&rec("abcde", 1, &["en"])));
        assert!(!opts.accepts(&rec(&"x".repeat(200), 0, &["en"])));
    }

    #[test]
    fn length_counts_scalar_values_not_bytes() {
        let opts = FilterOptions::default();
        // 4 scalar values, 8 bytes
        assert!(!opts.accepts(&rec("ééé!", 1, &["en"])));
        assert!(opts.accepts(&rec("héllo", 1, &["en"])));
    }

    #[test]
    fn language_any_tag_membership() {
        let opts = FilterOptions::default();
        assert!(opts.accepts(&rec("hallo welt", 1, &["de", "en"])));
        assert!(!opts.accepts(&rec("hallo welt", 1, &["de"])));
        assert!(!opts.accepts(&rec("hallo welt", 1, &[])));
    }

    #[test]
    fn filter_is_idempotent() {
        let all = vec![rec("abcd", 3, &["en"]), rec("abcdef", 1, &["en"]), rec("zzzzzz", 0, &["en"])];
        let once = filter_corpus(&all, &FilterOptions::default());
        assert_eq!(filter_corpus(&once, &FilterOptions::default()), once);
        assert_eq!(once.len(), 1);
    }

    #[test]
    fn sample_size_and_reproducibility() {
        let all = posts(1000);
        let a = sample_corpus(&all, 0.03, 11, SamplingMode::Uniform).unwrap();
        let b = sample_corpus(&all, 0.03, 11, SamplingMode::Uniform).unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(a, b);
    }

    #[test]
    fn full_fraction_is_identity() {
        let all = posts(50);
        assert_eq!(sample_corpus(&all, 1.0, 3, SamplingMode::Uniform).unwrap(), all);
    }

    #[test]
    fn fraction_out_of_range_is_rejected() {
        let all = posts(10);
        assert!(sample_corpus(&all, 0.0, 1, SamplingMode::Uniform).is_err());
        assert!(sample_corpus(&all, 1.5, 1, SamplingMode::Uniform).is_err());
        assert!(sample_corpus(&all, f64::NAN, 1, SamplingMode::Uniform).is_err());
    }

    #[test]
    fn sample_size_at_full_corpus_scale() {
        // 3% of the 43,652,579-post filtered corpus.
        assert_eq!(sample_size(43_652_579, 0.03), 1_309_577);
    }

    #[test]
    fn stratified_sample_has_exact_size() {
        let all = posts(1003);
        let s = sample_corpus(&all, 0.1, 5, SamplingMode::StratifiedByDay).unwrap();
        assert_eq!(s.len(), sample_size(1003, 0.1));
        assert!(s.windows(2).all(|w| w[0].uri != w[1].uri));
    }

    #[test]
    fn inclusion_frequency_matches_fraction() {
        let all = posts(20);
        let fraction = 0.2;
        let trials = 5000;
        let mut hits = vec![0u32; all.len()];
        for seed in 0..trials {
            for p in sample_corpus(&all, fraction, seed, SamplingMode::Uniform).unwrap() {
                let i = all.iter().position(|q| q.uri == p.uri).unwrap();
                hits[i] += 1;
            }
        }
        let sigma = (fraction * (1.0 - fraction) / trials as f64).sqrt();
        for h in hits {
            let freq = h as f64 / trials as f64;
            assert!((freq - fraction).abs() <= 3.0 * sigma, "freq {freq}");
        }
    }

    #[test]
    fn repost_counts_from_same_stream() {
        let t = |s: &str| s.parse::<DateTime<Utc>>().unwrap();
        let events = vec![
            RawEvent {
                action: Action::Create,
                collection: Collection::Post,
                author: "did:a".into(),
                timestamp: t("2025-01-01T00:00:00Z"),
                payload: Payload::Post { uri: "p1".into(), text: "hello there".into(), langs: vec!["en".into()] },
            },
            RawEvent {
                action: Action::Create,
                collection: Collection::Repost,
                author: "did:b".into(),
                timestamp: t("2025-01-01T01:00:00Z"),
                payload: Payload::Reference { uri: Some("r1".into()), subject: "p1".into() },
            },
            // the same repost record seen twice
            RawEvent {
                action: Action::Create,
                collection: Collection::Repost,
                author: "did:b".into(),
                timestamp: t("2025-01-01T01:00:00Z"),
                payload: Payload::Reference { uri: Some("r1".into()), subject: "p1".into() },
            },
            RawEvent {
                action: Action::Create,
                collection: Collection::Repost,
                author: "did:c".into(),
                timestamp: t("2025-01-01T02:00:00Z"),
                payload: Payload::Reference { uri: Some("r2".into()), subject: "p1".into() },
            },
        ];
        let corpus = EventCorpus::from_events(&events);
        assert_eq!(corpus.posts[0].repost_count, 2);
        assert_eq!(corpus.reposts.len(), 3);
    }
}
