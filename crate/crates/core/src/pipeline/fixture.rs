//! Deterministic synthetic event dump with planted stances.
//!
//! Users belong to one of two latent camps. The camp drives their stance on
//! the conflict and Trump topics; TikTok and AI stances are drawn
//! independently. Post texts carry the cue phrases the mock provider reads,
//! and reposts, likes and follows are homophilous in stance, so both the
//! content and the structural groupings have a known answer.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::annotate::{Stance, Topic};
use crate::ingest::{Action, Collection, Payload, RawEvent};
use crate::rng::{rng_from_seed, Rng};
use crate::{Error, Result};

pub const FIXTURE_SEED: u64 = 2025;
pub const FIXTURE_EVENTS: usize = 10_000;
pub const FIXTURE_USERS: usize = 120;

pub const FIXTURE_TOPICS: [Topic; 5] =
    [Topic::RussiaUkraine, Topic::IsraelPalestine, Topic::TrumpAdministration, Topic::TiktokBan, Topic::Ai];

const APOLITICAL_POSTS: usize = 500;
const FOREIGN_POSTS: usize = 30;
const SHORT_POSTS: usize = 20;
const DELETES: usize = 100;
const OTHER_COLLECTION: usize = 30;
const FOLLOWS: usize = 1_200;
const BLOCKS: usize = 250;
const REPOSTS: usize = 3_800;
const DANGLING_REPOSTS: usize = 50;
/// Probability that a repost, like or follow stays within the actor's stance.
const HOMOPHILY: f64 = 0.9;

/// Planted answer for a fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureTruth {
    pub seed: u64,
    pub users: Vec<String>,
    pub camps: BTreeMap<String, u8>,
    /// Topic slug to user to stance, for participating users.
    pub stances: BTreeMap<String, BTreeMap<String, Stance>>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub events: Vec<RawEvent>,
    pub truth: FixtureTruth,
}

impl Fixture {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }
}

fn texts(topic: Topic, stance: Stance) -> &'static [&'static str] {
    use Stance::*;
    match (topic, stance) {
        (Topic::RussiaUkraine, For) => &[
            "slava ukraini, kyiv will stand",
            "support ukraine today and every day",
            "standwithukraine, ukraine deserves peace",
        ],
        (Topic::RussiaUkraine, Against) => &[
            "nato provoked this war in ukraine",
            "support russia, putin was right",
            "istandwithrussia against the kyiv regime",
        ],
        (Topic::RussiaUkraine, Neutral) => {
            &["ukraine and russia talks resume", "news from kyiv this morning", "putin and zelensky statements today"]
        }
        (Topic::IsraelPalestine, For) => {
            &["free palestine, ceasefire now", "ceasefire now in gaza", "support palestine and gaza civilians"]
        }
        (Topic::IsraelPalestine, Against) => {
            &["stand with israel, bring them home", "support israel against hamas", "bring them home from gaza"]
        }
        (Topic::IsraelPalestine, Neutral) => {
            &["gaza and israel news update", "netanyahu speech on gaza today", "israel palestine talks continue"]
        }
        (Topic::TrumpAdministration, For) => {
            &["maga, great president trump", "support trump and the white house agenda", "maga all the way with trump"]
        }
        (Topic::TrumpAdministration, Against) => {
            &["resist the trump administration", "oppose trump, worst president ever", "impeach trump now"]
        }
        (Topic::TrumpAdministration, Neutral) => {
            &["trump speaks at the white house today", "new executive order from trump", "trump press briefing recap"]
        }
        (Topic::TiktokBan, For) => {
            &["ban tiktok, support the ban", "ban tiktok for national security", "support the ban on tiktok"]
        }
        (Topic::TiktokBan, Against) => {
            &["save tiktok, oppose the ban", "save tiktok creators", "oppose the ban on tiktok"]
        }
        (Topic::TiktokBan, Neutral) => {
            &["tiktok deadline expected this week", "tiktok app update news", "what happens to tiktok next"]
        }
        (Topic::Ai, For) => &["ai helps research, support ai", "support ai in science", "ai helps doctors every day"],
        (Topic::Ai, Against) => &["ai slop everywhere, ban ai", "oppose ai art", "ban ai in schools"],
        (Topic::Ai, Neutral) => {
            &["new ai model released", "openai announces chatgpt update", "ai research paper published"]
        }
        _ => &[],
    }
}

const APOLITICAL_TEXTS: [&str; 6] = [
    "lovely sunset at the beach tonight",
    "my cat knocked over the plant again",
    "new recipe for lemon cake turned out great",
    "weekend hike photos",
    "listening to a great album today",
    "coffee first then everything else",
];

/// `(participation, P(for), P(neutral))` per camp; the rest is against.
fn stance_model(topic: Topic, camp: u8) -> (f64, f64, f64) {
    match (topic, camp) {
        (Topic::RussiaUkraine, 0) => (0.7, 0.85, 0.15),
        (Topic::RussiaUkraine, _) => (0.45, 0.0, 0.5),
        (Topic::IsraelPalestine, 0) => (0.6, 0.8, 0.2),
        (Topic::IsraelPalestine, _) => (0.5, 0.0, 0.4),
        (Topic::TrumpAdministration, 0) => (0.7, 0.0, 0.1),
        (Topic::TrumpAdministration, _) => (0.7, 0.7, 0.3),
        (Topic::TiktokBan, _) => (0.35, 0.25, 0.55),
        (_, _) => (0.35, 0.2, 0.6),
    }
}

struct Post {
    uri: String,
    author: usize,
    topic: Option<Topic>,
    time: DateTime<Utc>,
}

struct Gen {
    rng: Rng,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    events: Vec<RawEvent>,
    seq: usize,
}

impl Gen {
    fn time(&mut self, lo: DateTime<Utc>, hi: DateTime<Utc>) -> DateTime<Utc> {
        let span = (hi - lo).num_seconds().max(1);
        lo + Duration::seconds(self.rng.gen_range(0..span))
    }

    fn after(&mut self, t: DateTime<Utc>) -> DateTime<Utc> {
        let hi = (t + Duration::days(3)).min(self.end);
        self.time(t + Duration::seconds(60).min(hi - t), hi)
    }

    fn uri(&mut self, did: &str, collection: &str) -> String {
        self.seq += 1;
        format!("at://{did}/{collection}/{:06}", self.seq)
    }

    fn push(
        &mut self,
        action: Action,
        collection: Collection,
        author: &str,
        timestamp: DateTime<Utc>,
        payload: Payload,
    ) {
        self.events.push(RawEvent { action, collection, author: author.to_string(), timestamp, payload });
    }

    fn reference(&mut self, collection: Collection, author: &str, subject: String, t: DateTime<Utc>) {
        let uri = Some(self.uri(author, collection.nsid()));
        self.push(Action::Create, collection, author, t, Payload::Reference { uri, subject });
    }
}

fn pick<'a, T>(rng: &mut Rng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty choice")
}

pub fn generate_fixture(seed: u64) -> Fixture {
    let mut g = Gen {
        rng: rng_from_seed(seed),
        start: Utc.with_ymd_and_hms(2024, 12, 1, 0, 0, 0).unwrap(),
        end: Utc.with_ymd_and_hms(2025, 5, 31, 23, 59, 59).unwrap(),
        events: Vec::with_capacity(FIXTURE_EVENTS),
        seq: 0,
    };
    let users: Vec<String> = (0..FIXTURE_USERS).map(|i| format!("did:plc:fx{i:03}")).collect();
    let camps: Vec<u8> = (0..FIXTURE_USERS).map(|_| u8::from(g.rng.gen_bool(0.35))).collect();

    let mut stances: BTreeMap<Topic, BTreeMap<usize, Stance>> = BTreeMap::new();
    for &topic in &FIXTURE_TOPICS {
        let m = stances.entry(topic).or_default();
        for (u, &camp) in camps.iter().enumerate() {
            let (participate, p_for, p_neutral) = stance_model(topic, camp);
            if g.rng.gen_bool(participate) {
                let x: f64 = g.rng.gen();
                let s = if x < p_for {
                    Stance::For
                } else if x < p_for + p_neutral {
                    Stance::Neutral
                } else {
                    Stance::Against
                };
                m.insert(u, s);
            }
        }
    }

    // Sign-ups in the first ten days.
    let signup_end = g.start + Duration::days(10);
    for u in &users {
        let t = g.time(g.start, signup_end);
        let uri = Some(g.uri(u, Collection::Profile.nsid()));
        g.push(Action::Create, Collection::Profile, u, t, Payload::Empty { uri });
    }

    let post_end = g.end - Duration::days(3);
    let mut posts: Vec<Post> = Vec::new();
    let mut write_post = |g: &mut Gen, author: usize, topic: Option<Topic>, text: String, lang: &str| {
        let t = g.time(signup_end, post_end);
        let uri = g.uri(&users[author], Collection::Post.nsid());
        g.push(
            Action::Create,
            Collection::Post,
            &users[author],
            t,
            Payload::Post { uri: uri.clone(), text, langs: vec![lang.to_string()] },
        );
        posts.push(Post { uri, author, topic, time: t });
    };
    for &topic in &FIXTURE_TOPICS {
        for (&u, &s) in &stances[&topic] {
            for _ in 0..g.rng.gen_range(1..=4) {
                let text = pick(&mut g.rng, texts(topic, s)).to_string();
                write_post(&mut g, u, Some(topic), text, "en");
            }
        }
    }
    for _ in 0..APOLITICAL_POSTS {
        let u = g.rng.gen_range(0..FIXTURE_USERS);
        let text = pick(&mut g.rng, &APOLITICAL_TEXTS).to_string();
        write_post(&mut g, u, None, text, "en");
    }
    for _ in 0..FOREIGN_POSTS {
        let u = g.rng.gen_range(0..FIXTURE_USERS);
        write_post(&mut g, u, None, "bom dia a todos".into(), "pt");
    }
    for _ in 0..SHORT_POSTS {
        let u = g.rng.gen_range(0..FIXTURE_USERS);
        write_post(&mut g, u, None, "ok".into(), "en");
    }

    let participants: BTreeMap<Topic, Vec<usize>> =
        stances.iter().map(|(t, m)| (*t, m.keys().copied().collect())).collect();
    let same_stance: BTreeMap<(Topic, Stance), Vec<usize>> = {
        let mut m: BTreeMap<(Topic, Stance), Vec<usize>> = BTreeMap::new();
        for (t, us) in &stances {
            for (&u, &s) in us {
                m.entry((*t, s)).or_default().push(u);
            }
        }
        m
    };
    // An actor for an interaction with `post`: mostly someone sharing the
    // author's stance on the post's topic, never the author.
    let choose_actor = |rng: &mut Rng, post: &Post| -> usize {
        loop {
            let u = match post.topic {
                Some(t) => {
                    let s = stances[&t][&post.author];
                    let pool = if rng.gen_bool(HOMOPHILY) { &same_stance[&(t, s)] } else { &participants[&t] };
                    *pick(rng, pool)
                }
                None => rng.gen_range(0..FIXTURE_USERS),
            };
            if u != post.author || participants.get(&post.topic.unwrap_or(Topic::Other)).map_or(false, |p| p.len() == 1)
            {
                return u;
            }
        }
    };

    // Every post is reposted at least once, then the rest of the budget
    // goes to political posts.
    let mut reposts = 0;
    for i in 0..posts.len() {
        let u = choose_actor(&mut g.rng, &posts[i]);
        let t = g.after(posts[i].time);
        g.reference(Collection::Repost, &users[u], posts[i].uri.clone(), t);
        reposts += 1;
    }
    let political: Vec<usize> = (0..posts.len()).filter(|&i| posts[i].topic.is_some()).collect();
    while reposts < REPOSTS - DANGLING_REPOSTS {
        let i = *pick(&mut g.rng, &political);
        let u = choose_actor(&mut g.rng, &posts[i]);
        let t = g.after(posts[i].time);
        g.reference(Collection::Repost, &users[u], posts[i].uri.clone(), t);
        reposts += 1;
    }
    for k in 0..DANGLING_REPOSTS {
        let u = g.rng.gen_range(0..FIXTURE_USERS);
        let t = g.time(signup_end, g.end);
        g.reference(Collection::Repost, &users[u], format!("at://did:plc:external/app.bsky.feed.post/{k:04}"), t);
    }

    // Follows within a camp, blocks across camps.
    for _ in 0..FOLLOWS {
        let a = g.rng.gen_range(0..FIXTURE_USERS);
        let b = loop {
            let b = g.rng.gen_range(0..FIXTURE_USERS);
            if b != a && (camps[a] == camps[b] || !g.rng.gen_bool(HOMOPHILY)) {
                break b;
            }
        };
        let t = g.time(signup_end, g.end);
        g.reference(Collection::Follow, &users[a], users[b].clone(), t);
    }
    for _ in 0..BLOCKS {
        let a = g.rng.gen_range(0..FIXTURE_USERS);
        let b = loop {
            let b = g.rng.gen_range(0..FIXTURE_USERS);
            if b != a && camps[a] != camps[b] {
                break b;
            }
        };
        let t = g.time(signup_end, g.end);
        g.reference(Collection::Block, &users[a], users[b].clone(), t);
    }
    for _ in 0..OTHER_COLLECTION {
        let a = g.rng.gen_range(0..FIXTURE_USERS);
        let t = g.time(signup_end, g.end);
        let subject = users[g.rng.gen_range(0..FIXTURE_USERS)].clone();
        g.reference(Collection::Other("app.bsky.graph.listitem".into()), &users[a], subject, t);
    }
    for _ in 0..DELETES {
        let p = &posts[g.rng.gen_range(0..posts.len())];
        let (author, uri, t0) = (users[p.author].clone(), p.uri.clone(), p.time);
        let t = g.after(t0);
        g.push(Action::Delete, Collection::Post, &author, t, Payload::Empty { uri: Some(uri) });
    }
    while g.events.len() < FIXTURE_EVENTS {
        let i = g.rng.gen_range(0..posts.len());
        let u = choose_actor(&mut g.rng, &posts[i]);
        let t = g.after(posts[i].time);
        g.reference(Collection::Like, &users[u], posts[i].uri.clone(), t);
    }
    assert_eq!(g.events.len(), FIXTURE_EVENTS, "fixture event budget overrun");
    g.events.sort_by_key(|e| e.timestamp);

    let truth = FixtureTruth {
        seed,
        users: users.clone(),
        camps: users.iter().cloned().zip(camps.iter().copied()).collect(),
        stances: stances
            .iter()
            .map(|(t, m)| (t.slug().to_string(), m.iter().map(|(&u, &s)| (users[u].clone(), s)).collect()))
            .collect(),
    };
    Fixture { events: g.events, truth }
}

/// Pipeline configuration shipped with the fixture.
pub fn fixture_config(seed: u64) -> String {
    let topics: Vec<String> = FIXTURE_TOPICS.iter().map(|t| format!("\"{}\"", t.slug())).collect();
    format!(
        r#"# Synthetic fixture: {events} events, {users} users, planted stances.
seed = {seed}
workdir = "runs"

[ingest]
inputs = ["events.jsonl"]
min_reposts = 1
min_chars = 5
lang = "en"
sample_fraction = 1.0
collection_window = "2024-12-01:2025-05-31"
downtime = "none"

[annotate]
provider = "mock"
in_flight = 4
stance_sample = 10

[topics]
list = [{topics}]
window = "2024-12:2025-05"

[groups]
max_groups = 5
runs = 15
iters = 50
simple_graph = false

[crosstopic]
threshold = 0.2
strict = true
nmi = "arithmetic"
alignment_neutral = true
"#,
        events = FIXTURE_EVENTS,
        users = FIXTURE_USERS,
        topics = topics.join(", ")
    )
}

/// Writes `events.jsonl`, `truth.json` and `pipeline.toml` into `dir`.
pub fn write_fixture(dir: &Path, seed: u64) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let f = generate_fixture(seed);
    let events = dir.join("events.jsonl");
    fs::write(&events, f.to_jsonl()).map_err(|e| Error::io(&events, e))?;
    let truth = dir.join("truth.json");
    fs::write(&truth, serde_json::to_string_pretty(&f.truth)? + "\n").map_err(|e| Error::io(&truth, e))?;
    let config = dir.join("pipeline.toml");
    fs::write(&config, fixture_config(seed)).map_err(|e| Error::io(&config, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::cues;

    #[test]
    fn event_budget_and_determinism() {
        let a = generate_fixture(FIXTURE_SEED);
        assert_eq!(a.events.len(), FIXTURE_EVENTS);
        assert_eq!(a.truth.users.len(), FIXTURE_USERS);
        let b = generate_fixture(FIXTURE_SEED);
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_ne!(a.to_jsonl(), generate_fixture(FIXTURE_SEED + 1).to_jsonl());
    }

    #[test]
    fn texts_carry_the_intended_labels() {
        for topic in FIXTURE_TOPICS {
            for stance in Stance::ALL {
                for text in texts(topic, stance) {
                    assert!(cues::theme_for(text).is_political(), "{text}");
                    assert_eq!(cues::topic_for(text), topic, "{text}");
                    assert_eq!(cues::stance_for(topic, &[text]), stance, "{text}");
                }
            }
        }
        for text in APOLITICAL_TEXTS {
            assert!(!cues::theme_for(text).is_political(), "{text}");
        }
    }
}
