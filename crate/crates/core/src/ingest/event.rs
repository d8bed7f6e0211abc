use std::borrow::Cow;
use std::fmt;
use std::io::BufRead;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Create,
    Update,
    Delete,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Create => "create",
            Action::Update => "update",
            Action::Delete => "delete",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "create" => Some(Action::Create),
            "update" => Some(Action::Update),
            "delete" => Some(Action::Delete),
            _ => None,
        }
    }
}

/// Record collection (lexicon NSID) of an event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Collection {
    Post,
    Repost,
    Like,
    Block,
    Follow,
    Profile,
    /// Any collection outside the analysed vocabulary; retained but skipped downstream.
    Other(String),
}

impl Collection {
    pub fn nsid(&self) -> &str {
        match self {
            Collection::Post => "app.bsky.feed.post",
            Collection::Repost => "app.bsky.feed.repost",
            Collection::Like => "app.bsky.feed.like",
            Collection::Block => "app.bsky.graph.block",
            Collection::Follow => "app.bsky.graph.follow",
            Collection::Profile => "app.bsky.actor.profile",
            Collection::Other(nsid) => nsid,
        }
    }

    pub fn from_nsid(nsid: &str) -> Self {
        match nsid {
            "app.bsky.feed.post" => Collection::Post,
            "app.bsky.feed.repost" => Collection::Repost,
            "app.bsky.feed.like" => Collection::Like,
            "app.bsky.graph.block" => Collection::Block,
            "app.bsky.graph.follow" => Collection::Follow,
            "app.bsky.actor.profile" => Collection::Profile,
            other => Collection::Other(other.to_string()),
        }
    }
}

impl fmt::Display for Collection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.nsid())
    }
}

/// Collection-specific body of an event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// A post record with its text and language tags.
    Post { uri: String, text: String, langs: Vec<String> },
    /// A record pointing at something else: a post uri for reposts and likes,
    /// a user id for follows and blocks.
    Reference { uri: Option<String>, subject: String },
    /// No body (profiles, deletions, unknown collections).
    Empty { uri: Option<String> },
}

impl Payload {
    pub fn uri(&self) -> Option<&str> {
        match self {
            Payload::Post { uri, .. } => Some(uri),
            Payload::Reference { uri, .. } | Payload::Empty { uri } => uri.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub action: Action,
    pub collection: Collection,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub payload: Payload,
}

impl RawEvent {
    pub fn is_create(&self) -> bool {
        self.action == Action::Create
    }

    /// Serializes the event as one line of the dump format (no trailing newline).
    pub fn to_line(&self) -> String {
        let (uri, text, langs, subject) = match &self.payload {
            Payload::Post { uri, text, langs } => (Some(uri.as_str()), Some(text.as_str()), Some(langs), None),
            Payload::Reference { uri, subject } => (uri.as_deref(), None, None, Some(subject.as_str())),
            Payload::Empty { uri } => (uri.as_deref(), None, None, None),
        };
        let wire = WireEvent {
            action: Cow::Borrowed(self.action.as_str()),
            collection: Cow::Borrowed(self.collection.nsid()),
            did: Cow::Borrowed(&self.author),
            time: Cow::Owned(self.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true)),
            uri: uri.map(Cow::Borrowed),
            text: text.map(Cow::Borrowed),
            langs: langs.map(|l| l.iter().map(|s| Cow::Borrowed(s.as_str())).collect()),
            subject: subject.map(Cow::Borrowed),
        };
        serde_json::to_string(&wire).expect("event serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct WireEvent<'a> {
    #[serde(borrow)]
    action: Cow<'a, str>,
    #[serde(borrow)]
    collection: Cow<'a, str>,
    #[serde(borrow)]
    did: Cow<'a, str>,
    #[serde(borrow)]
    time: Cow<'a, str>,
    #[serde(default, borrow, skip_serializing_if = "Option::is_none")]
    uri: Option<Cow<'a, str>>,
    #[serde(default, borrow, skip_serializing_if = "Option::is_none")]
    text: Option<Cow<'a, str>>,
    #[serde(default, borrow, skip_serializing_if = "Option::is_none")]
    langs: Option<Vec<Cow<'a, str>>>,
    #[serde(default, borrow, skip_serializing_if = "Option::is_none")]
    subject: Option<Cow<'a, str>>,
}

/// Parses one line of the event dump. `line_no` is attached to any error so
/// callers can report it and keep reading.
pub fn parse_event(line: &str, line_no: usize) -> Result<RawEvent> {
    let err = |message: String| Error::Parse { line: line_no, message };
    let wire: WireEvent<'_> = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;

    let action = Action::parse(&wire.action).ok_or_else(|| err(format!("unknown action `{}`", wire.action)))?;
    if wire.did.is_empty() {
        return Err(err("empty author did".into()));
    }
    let timestamp = DateTime::parse_from_rfc3339(&wire.time)
        .map_err(|e| err(format!("bad timestamp `{}`: {e}", wire.time)))?
        .with_timezone(&Utc);
    let collection = Collection::from_nsid(&wire.collection);
    let uri = wire.uri.map(Cow::into_owned);

    let payload = match (&collection, action) {
        (Collection::Post, _) if wire.text.is_some() => Payload::Post {
            uri: uri.ok_or_else(|| err("post without uri".into()))?,
            text: wire.text.map(Cow::into_owned).unwrap_or_default(),
            langs: wire.langs.unwrap_or_default().into_iter().map(Cow::into_owned).collect(),
        },
        (Collection::Post, Action::Create) => return Err(err("post create without text".into())),
        (Collection::Repost | Collection::Like | Collection::Block | Collection::Follow, Action::Create) => {
            Payload::Reference {
                uri,
                subject: wire
                    .subject
                    .map(Cow::into_owned)
                    .ok_or_else(|| err(format!("{collection} create without subject")))?,
            }
        }
        _ => match wire.subject {
            Some(subject) => Payload::Reference { uri, subject: subject.into_owned() },
            None => Payload::Empty { uri },
        },
    };

    Ok(RawEvent { action, collection, author: wire.did.into_owned(), timestamp, payload })
}

/// Line-oriented reader over an event dump. Blank lines are skipped; each
/// item carries either the event or a recoverable parse error.
pub struct EventReader<R> {
    inner: R,
    buf: String,
    line_no: usize,
}

impl<R: BufRead> EventReader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner, buf: String::new(), line_no: 0 }
    }
}

impl<R: BufRead> Iterator for EventReader<R> {
    type Item = Result<RawEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {
                    self.line_no += 1;
                    let line = self.buf.trim_end_matches(['\n', '\r']);
                    if line.trim().is_empty() {
                        continue;
                    }
                    return Some(parse_event(line, self.line_no));
                }
                Err(e) => {
                    self.line_no += 1;
                    return Some(Err(Error::Parse { line: self.line_no, message: e.to_string() }));
                }
            }
        }
    }
}

/// Reads every event from a reader, splitting the good events from the
/// parse errors.
pub fn read_events<R: BufRead>(reader: R) -> (Vec<RawEvent>, Vec<Error>) {
    let mut events = Vec::new();
    let mut errors = Vec::new();
    for item in EventReader::new(reader) {
        match item {
            Ok(ev) => events.push(ev),
            Err(e) => errors.push(e),
        }
    }
    (events, errors)
}

/// Splits a buffer into at most `shards` pieces, each ending on a newline
/// (except possibly the last), so the pieces can be parsed independently.
pub fn split_at_line_boundaries(data: &[u8], shards: usize) -> Vec<&[u8]> {
    let shards = shards.max(1);
    let target = data.len().div_ceil(shards).max(1);
    let mut out = Vec::with_capacity(shards);
    let mut start = 0;
    while start < data.len() {
        let mut end = (start + target).min(data.len());
        while end < data.len() && data[end - 1] != b'\n' {
            end += 1;
        }
        out.push(&data[start..end]);
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const POST: &str = r#"{"action":"create","collection":"app.bsky.feed.post","did":"did:plc:alice","time":"2025-01-05T10:00:00Z","uri":"at://did:plc:alice/app.bsky.feed.post/1","text":"hello world","langs":["en"]}"#;

    #[test]
    fn schema_requires_what_the_parser_requires() {
        let schema: serde_json::Value = serde_json::from_str(include_str!("../../schema/event.schema.json")).unwrap();
        assert_eq!(schema["required"], serde_json::json!(["action", "collection", "did", "time"]));
        for field in ["action", "collection", "did", "time"] {
            let mut v: serde_json::Value = serde_json::from_str(POST).unwrap();
            v.as_object_mut().unwrap().remove(field);
            assert!(parse_event(&v.to_string(), 1).is_err(), "{field} is optional to the parser");
        }
    }

    #[test]
    fn parses_post_create() {
        let ev = parse_event(POST, 1).unwrap();
        assert_eq!(ev.action, Action::Create);
        assert_eq!(ev.collection, Collection::Post);
        assert_eq!(ev.author, "did:plc:alice");
        match ev.payload {
            Payload::Post { text, langs, .. } => {
                assert_eq!(text, "hello world");
                assert_eq!(langs, vec!["en"]);
            }
            other => panic!("unexpected payload {other:?}"),
        }
    }

    #[test]
    fn delete_is_flagged_non_create() {
        let line = r#"{"action":"delete","collection":"app.bsky.feed.post","did":"did:plc:a","time":"2025-01-05T10:00:00Z","uri":"at://x"}"#;
        let ev = parse_event(line, 3).unwrap();
        assert!(!ev.is_create());
        assert_eq!(ev.payload, Payload::Empty { uri: Some("at://x".into()) });
    }

    #[test]
    fn truncated_line_reports_offset_and_stream_continues() {
        let input = format!("{POST}\n{}\n\n{POST}\n", &POST[..40]);
        let items: Vec<_> = EventReader::new(input.as_bytes()).collect();
        assert_eq!(items.len(), 3);
        assert!(items[0].is_ok());
        match &items[1] {
            Err(Error::Parse { line, .. }) => assert_eq!(*line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(items[2].is_ok());
    }

    #[test]
    fn unknown_collection_is_retained() {
        let line = r#"{"action":"create","collection":"app.bsky.feed.threadgate","did":"did:plc:a","time":"2025-01-05T10:00:00Z"}"#;
        let ev = parse_event(line, 1).unwrap();
        assert_eq!(ev.collection, Collection::Other("app.bsky.feed.threadgate".into()));
    }

    #[test]
    fn missing_subject_is_rejected() {
        let line = r#"{"action":"create","collection":"app.bsky.feed.repost","did":"did:plc:a","time":"2025-01-05T10:00:00Z"}"#;
        assert!(parse_event(line, 9).is_err());
    }

    #[test]
    fn bad_timestamp_is_rejected() {
        let line = r#"{"action":"create","collection":"app.bsky.graph.follow","did":"did:plc:a","time":"yesterday","subject":"did:plc:b"}"#;
        assert!(matches!(parse_event(line, 4), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn shards_cover_input_on_line_boundaries() {
        let data = format!("{POST}\n{POST}\n{POST}\n");
        let shards = split_at_line_boundaries(data.as_bytes(), 2);
        assert_eq!(shards.concat(), data.as_bytes());
        assert!(shards.iter().all(|s| s.ends_with(b"\n")));
    }

    fn arb_event() -> impl Strategy<Value = RawEvent> {
        let action = prop_oneof![Just(Action::Create), Just(Action::Update), Just(Action::Delete)];
        let text = "\\PC{0,40}";
        let payload = prop_oneof![
            ("[a-z0-9:/.]{1,20}", text, proptest::collection::vec("[a-z]{2}", 0..3))
                .prop_map(|(uri, text, langs)| Payload::Post { uri, text, langs }),
            (proptest::option::of("[a-z0-9:/.]{1,20}"), "[a-z0-9:/.]{1,20}")
                .prop_map(|(uri, subject)| Payload::Reference { uri, subject }),
            proptest::option::of("[a-z0-9:/.]{1,20}").prop_map(|uri| Payload::Empty { uri }),
        ];
        (action, "did:plc:[a-z0-9]{4,12}", 0i64..2_000_000_000, 0u32..1_000_000_000, payload).prop_map(
            |(action, author, secs, nanos, payload)| {
                let collection = match &payload {
                    Payload::Post { .. } => Collection::Post,
                    Payload::Reference { .. } => Collection::Repost,
                    Payload::Empty { .. } => Collection::Profile,
                };
                RawEvent {
                    action,
                    collection,
                    author,
                    timestamp: DateTime::from_timestamp(secs, nanos).unwrap(),
                    payload,
                }
            },
        )
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(ev in arb_event()) {
            let line = ev.to_line();
            let back = parse_event(&line, 1).unwrap();
            prop_assert_eq!(&back, &ev);
            prop_assert_eq!(back.to_line(), line);
        }
    }
}
