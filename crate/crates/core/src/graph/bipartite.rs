use std::collections::HashMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::TimeWindow;
use crate::annotate::Topic;
use crate::ingest::{PostRecord, RepostRecord, UserEdgeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BipartiteKind {
    Authorship,
    Repost,
    Like,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteEdge {
    pub user: u32,
    pub post: u32,
    pub kind: BipartiteKind,
    pub timestamp: DateTime<Utc>,
}

/// Users and posts of one (topic, window) with their interactions.
#[derive(Debug, Clone, Default)]
pub struct BipartiteInteractions {
    pub users: Vec<String>,
    pub posts: Vec<String>,
    /// Author index of each post.
    pub post_authors: Vec<u32>,
    pub edges: Vec<BipartiteEdge>,
    /// Reposts and likes whose subject is not in the labelled corpus.
    pub dangling: u64,
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn get(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.ids.get(s) {
            return i;
        }
        let i = self.names.len() as u32;
        self.ids.insert(s.to_string(), i);
        self.names.push(s.to_string());
        i
    }
}

/// Collects authorship, repost and like edges for posts labelled `topic`.
///
/// `topics` maps every labelled post to its topic; interactions with posts
/// absent from it are dropped and tallied as dangling. Interactions with
/// posts of other topics are ignored. Authorship edges are kept for posts
/// created in the window and for older posts that are interacted with in it.
pub fn build_bipartite(
    posts: &[PostRecord],
    topics: &HashMap<String, Topic>,
    reposts: &[RepostRecord],
    likes: &[UserEdgeRecord],
    topic: Topic,
    window: &TimeWindow,
) -> BipartiteInteractions {
    let by_uri: HashMap<&str, &PostRecord> =
        posts.iter().filter(|p| topics.get(&p.uri) == Some(&topic)).map(|p| (p.uri.as_str(), p)).collect();

    let mut users = Interner::default();
    let mut post_ids = Interner::default();
    let mut post_authors = Vec::new();
    let mut edges = Vec::new();
    let mut dangling = 0;

    let mut add_post = |p: &PostRecord, users: &mut Interner, edges: &mut Vec<BipartiteEdge>| {
        let before = post_ids.names.len();
        let id = post_ids.get(&p.uri);
        if post_ids.names.len() > before {
            let author = users.get(&p.author);
            post_authors.push(author);
            edges.push(BipartiteEdge {
                user: author,
                post: id,
                kind: BipartiteKind::Authorship,
                timestamp: p.created_at,
            });
        }
        id
    };

    for p in posts {
        if window.contains(p.created_at) && by_uri.contains_key(p.uri.as_str()) {
            add_post(p, &mut users, &mut edges);
        }
    }

    let interactions = reposts
        .iter()
        .map(|r| (&r.reposter, &r.subject, r.timestamp, BipartiteKind::Repost))
        .chain(likes.iter().map(|l| (&l.source, &l.subject, l.timestamp, BipartiteKind::Like)));
    for (user, subject, timestamp, kind) in interactions {
        if !window.contains(timestamp) {
            continue;
        }
        match by_uri.get(subject.as_str()) {
            Some(p) => {
                let post = add_post(*p, &mut users, &mut edges);
                let user = users.get(user);
                edges.push(BipartiteEdge { user, post, kind, timestamp });
            }
            None if !topics.contains_key(subject) => dangling += 1,
            None => {}
        }
    }

    BipartiteInteractions { users: users.names, posts: post_ids.names, post_authors, edges, dangling }
}
