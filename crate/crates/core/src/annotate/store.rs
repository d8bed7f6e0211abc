use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::RwLock;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::labels::{Stance, StanceLabel, Theme, ThemeLabel, Topic, TopicLabel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Theme,
    Topic,
    Stance,
}

/// One line of a label file. Post labels carry `post_uri`; stance labels
/// carry `user` and `topic`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_uri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    pub label: String,
    pub template_hash: String,
    pub timestamp: DateTime<Utc>,
}

type Key = (String, Option<Topic>);

/// Label file for one label kind.
///
/// Writers are serialized by the lock; readers may run concurrently.
/// Re-inserting an identical label is a no-op, a different label for the
/// same key is rejected.
#[derive(Debug)]
pub struct LabelStore {
    kind: LabelKind,
    records: RwLock<BTreeMap<Key, LabelRecord>>,
}

impl LabelStore {
    pub fn new(kind: LabelKind) -> Self {
        Self { kind, records: RwLock::new(BTreeMap::new()) }
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.records.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn key(&self, record: &LabelRecord) -> Result<Key> {
        match self.kind {
            LabelKind::Theme => {
                Theme::parse(&record.label)?;
            }
            LabelKind::Topic => {
                Topic::parse(&record.label)?;
            }
            LabelKind::Stance => {
                Stance::parse(&record.label)?;
            }
        }
        match self.kind {
            LabelKind::Theme | LabelKind::Topic => {
                let uri = record
                    .post_uri
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("post label without post_uri".into()))?;
                Ok((uri, None))
            }
            LabelKind::Stance => {
                let user =
                    record.user.clone().ok_or_else(|| Error::InvalidArgument("stance label without user".into()))?;
                let topic = record
                    .topic
                    .as_deref()
                    .ok_or_else(|| Error::InvalidArgument("stance label without topic".into()))?;
                Ok((user, Some(Topic::parse(topic)?)))
            }
        }
    }

    pub fn insert(&self, record: LabelRecord) -> Result<()> {
        let key = self.key(&record)?;
        let mut records = self.records.write().unwrap();
        match records.get(&key) {
            Some(existing) if existing.label != record.label => Err(Error::InvalidArgument(format!(
                "conflicting labels for {}: `{}` vs `{}`",
                key.0, existing.label, record.label
            ))),
            Some(_) => Ok(()),
            None => {
                records.insert(key, record);
                Ok(())
            }
        }
    }

    pub fn insert_theme(&self, l: &ThemeLabel, template_hash: &str, at: DateTime<Utc>) -> Result<()> {
        self.insert(LabelRecord {
            post_uri: Some(l.post_uri.clone()),
            user: None,
            topic: None,
            label: l.theme.as_str().into(),
            template_hash: template_hash.into(),
            timestamp: at,
        })
    }

    pub fn insert_topic(&self, l: &TopicLabel, template_hash: &str, at: DateTime<Utc>) -> Result<()> {
        self.insert(LabelRecord {
            post_uri: Some(l.post_uri.clone()),
            user: None,
            topic: None,
            label: l.topic.slug().into(),
            template_hash: template_hash.into(),
            timestamp: at,
        })
    }

    pub fn insert_stance(&self, l: &StanceLabel, template_hash: &str, at: DateTime<Utc>) -> Result<()> {
        self.insert(LabelRecord {
            post_uri: None,
            user: Some(l.user.clone()),
            topic: Some(l.topic.slug().into()),
            label: l.stance.as_str().into(),
            template_hash: template_hash.into(),
            timestamp: at,
        })
    }

    /// All records in key order.
    pub fn records(&self) -> Vec<LabelRecord> {
        self.records.read().unwrap().values().cloned().collect()
    }

    pub fn themes(&self) -> Vec<ThemeLabel> {
        self.collect(LabelKind::Theme, |k, r| Ok(ThemeLabel { post_uri: k.0.clone(), theme: Theme::parse(&r.label)? }))
    }

    pub fn topics(&self) -> Vec<TopicLabel> {
        self.collect(LabelKind::Topic, |k, r| Ok(TopicLabel { post_uri: k.0.clone(), topic: Topic::parse(&r.label)? }))
    }

    pub fn stances(&self) -> Vec<StanceLabel> {
        self.collect(LabelKind::Stance, |k, r| {
            Ok(StanceLabel {
                user: k.0.clone(),
                topic: k.1.expect("stance keys carry a topic"),
                stance: Stance::parse(&r.label)?,
            })
        })
    }

    fn collect<T>(&self, kind: LabelKind, f: impl Fn(&Key, &LabelRecord) -> Result<T>) -> Vec<T> {
        if self.kind != kind {
            return Vec::new();
        }
        // Records were validated on insert.
        self.records.read().unwrap().iter().map(|(k, r)| f(k, r).expect("validated label")).collect()
    }

    pub fn load(path: &Path, kind: LabelKind) -> Result<Self> {
        let store = Self::new(kind);
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: LabelRecord =
                serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            store.insert(record)?;
        }
        Ok(store)
    }

    /// Writes records sorted by key, one JSON object per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for r in self.records.read().unwrap().values() {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
