//! Binary graph files.
//!
//! Layout, little-endian: magic `PNETGRF1`, `u32` format version, `u32`
//! header length, JSON header, then `node_count` length-prefixed UTF-8 node
//! ids, then `edge_count` records of `u32 source, u32 target, i64 timestamp`.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat};
use serde::{Deserialize, Serialize};

use super::{Edge, Interaction, ProjectionTally, TimeWindow, TopicNetwork};
use crate::annotate::Topic;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"PNETGRF1";
const VERSION: u32 = 1;
const EDGE_BYTES: usize = 16;

#[derive(Serialize, Deserialize)]
struct Header {
    topic: String,
    window: TimeWindow,
    interaction: Interaction,
    nodes: u64,
    edges: u64,
    tally: ProjectionTally,
}

pub fn graph_path(root: &Path, topic: Topic, window: &TimeWindow, tau: Interaction) -> PathBuf {
    root.join(topic.slug()).join(window.label()).join(format!("{tau}.graph"))
}

pub fn write_graph(path: &Path, g: &TopicNetwork) -> Result<()> {
    let header = serde_json::to_vec(&Header {
        topic: g.topic.slug().to_string(),
        window: g.window,
        interaction: g.interaction,
        nodes: g.nodes.len() as u64,
        edges: g.edges.len() as u64,
        tally: g.tally,
    })?;
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(header.len() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&header).map_err(io)?;
    for n in &g.nodes {
        w.write_all(&(n.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(n.as_bytes()).map_err(io)?;
    }
    for e in &g.edges {
        let mut buf = [0u8; EDGE_BYTES];
        buf[..4].copy_from_slice(&e.source.to_le_bytes());
        buf[4..8].copy_from_slice(&e.target.to_le_bytes());
        buf[8..].copy_from_slice(&e.timestamp.to_le_bytes());
        w.write_all(&buf).map_err(io)?;
    }
    w.flush().map_err(io)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or_else(|| Error::GraphFormat {
            path: self.path.to_path_buf(),
            message: format!("truncated at byte {}", self.pos),
        })?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn read_graph(path: &Path) -> Result<TopicNetwork> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::GraphFormat { path: path.to_path_buf(), message };
    let mut c = Cursor { data: &data, pos: 0, path };
    if c.take(8)? != MAGIC {
        return Err(bad("not a graph file".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let len = c.u32()? as usize;
    let header: Header = serde_json::from_slice(c.take(len)?).map_err(|e| bad(e.to_string()))?;
    let topic = Topic::parse(&header.topic)?;
    let mut nodes = Vec::with_capacity(header.nodes as usize);
    for _ in 0..header.nodes {
        let n = c.u32()? as usize;
        let s = std::str::from_utf8(c.take(n)?).map_err(|e| bad(e.to_string()))?;
        nodes.push(s.to_string());
    }
    let raw = c.take(header.edges as usize * EDGE_BYTES)?;
    let edges: Vec<Edge> = raw
        .chunks_exact(EDGE_BYTES)
        .map(|b| Edge {
            source: u32::from_le_bytes(b[..4].try_into().unwrap()),
            target: u32::from_le_bytes(b[4..8].try_into().unwrap()),
            timestamp: i64::from_le_bytes(b[8..].try_into().unwrap()),
        })
        .collect();
    if c.pos != data.len() {
        return Err(bad(format!("{} trailing bytes", data.len() - c.pos)));
    }
    if let Some(e) = edges.iter().find(|e| e.source as usize >= nodes.len() || e.target as usize >= nodes.len()) {
        return Err(bad(format!("edge {}->{} references a missing node", e.source, e.target)));
    }
    Ok(TopicNetwork {
        topic,
        window: header.window,
        interaction: header.interaction,
        nodes,
        edges,
        tally: header.tally,
    })
}

/// CSV export with columns `source,target,timestamp` (user ids, RFC 3339).
pub fn write_csv(path: &Path, g: &TopicNetwork) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["source", "target", "timestamp"])?;
    for e in &g.edges {
        let ts = DateTime::from_timestamp(e.timestamp, 0)
            .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
            .unwrap_or_default();
        w.write_record([&g.nodes[e.source as usize], &g.nodes[e.target as usize], &ts])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `<root>/<topic>/<window>/<tau>.graph` and `.csv`, and merges the
/// layer's nodes into the directory's `nodes.tsv` dictionary.
pub fn save_network(root: &Path, g: &TopicNetwork) -> Result<PathBuf> {
    let path = graph_path(root, g.topic, &g.window, g.interaction);
    let dir = path.parent().expect("graph path has a parent");
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_graph(&path, g)?;
    write_csv(&path.with_extension("csv"), g)?;

    let dict = dir.join("nodes.tsv");
    let mut names: BTreeSet<String> = match fs::read_to_string(&dict) {
        Ok(s) => s.lines().skip(1).filter_map(|l| l.split('\t').nth(1)).map(str::to_string).collect(),
        Err(_) => BTreeSet::new(),
    };
    names.extend(g.nodes.iter().cloned());
    let mut out = String::from("id\tuser\n");
    for (i, n) in names.iter().enumerate() {
        out.push_str(&format!("{i}\t{n}\n"));
    }
    fs::write(&dict, out).map_err(|e| Error::io(&dict, e))?;
    Ok(path)
}

pub fn load_network(root: &Path, topic: Topic, window: &TimeWindow, tau: Interaction) -> Result<TopicNetwork> {
    read_graph(&graph_path(root, topic, window, tau))
}
