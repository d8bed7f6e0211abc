//! Polarization measurement over topic-conditioned interaction networks.
//!
//! The crate is organised along the stages of the analysis:
//!
//! - [`ingest`]: line-delimited event dumps, activity statistics, corpus filtering and sampling.
//! - [`annotate`]: theme, topic and stance labels, the annotation-provider contract and label stores.
//! - [`graph`]: bipartite user/post structures, repost projection and multilayer bundles.
//! - [`groups`]: planted-partition structural groups and content (stance) groupings.
//! - [`metrics`]: Adaptive EI, assortativity, Coleman homophily and Simpson diversity.
//! - [`crosstopic`]: Jaccard overlap, topic hypergraphs, NMI issue alignment and joint stance tables.
//! - [`pipeline`]: configuration, staged execution with manifests, and report rendering.

pub mod annotate;
pub mod crosstopic;
mod error;
pub mod graph;
pub mod groups;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
