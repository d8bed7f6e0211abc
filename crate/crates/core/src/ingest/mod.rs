//! Event-stream ingestion: parsing archived firehose dumps, accumulating
//! activity statistics, and selecting the text corpus used downstream.
//!
//! The line format is described by `schema/event.schema.json`.

mod corpus;
mod event;
mod stats;

pub use corpus::{
    filter_corpus, sample_corpus, sample_size, EventCorpus, FilterOptions, PostRecord, RepostRecord, SamplingMode,
    UserEdgeRecord,
};
pub use event::{
    parse_event, read_events, split_at_line_boundaries, Action, Collection, EventReader, Payload, RawEvent,
};
pub use stats::{
    accumulate_stats, firehose_outages_2025, stats_from_bytes_parallel, ActionStats, ActionType, ActivityAccumulator,
    ActivityStats, Coverage, DailyRow, Downtime, StatsOptions,
};
