use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Duration, NaiveDate, NaiveTime, TimeZone, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::event::{Collection, EventReader, RawEvent};
use crate::{Error, Result};

/// Create-action categories reported in the activity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionType {
    Likes,
    Posts,
    Reposts,
    Blocks,
    Follows,
    SignUps,
}

impl ActionType {
    pub const ALL: [ActionType; 6] = [
        ActionType::Likes,
        ActionType::Posts,
        ActionType::Reposts,
        ActionType::Blocks,
        ActionType::Follows,
        ActionType::SignUps,
    ];

    pub fn from_collection(collection: &Collection) -> Option<Self> {
        Some(match collection {
            Collection::Like => ActionType::Likes,
            Collection::Post => ActionType::Posts,
            Collection::Repost => ActionType::Reposts,
            Collection::Block => ActionType::Blocks,
            Collection::Follow => ActionType::Follows,
            Collection::Profile => ActionType::SignUps,
            Collection::Other(_) => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionType::Likes => "likes",
            ActionType::Posts => "posts",
            ActionType::Reposts => "reposts",
            ActionType::Blocks => "blocks",
            ActionType::Follows => "follows",
            ActionType::SignUps => "sign_ups",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A half-open UTC interval during which no events were collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Downtime {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Downtime {
    pub fn hours(&self) -> f64 {
        (self.end - self.start).num_seconds().max(0) as f64 / 3600.0
    }

    fn overlap_hours(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> f64 {
        let start = self.start.max(from);
        let end = self.end.min(to);
        if end <= start {
            0.0
        } else {
            (end - start).num_seconds() as f64 / 3600.0
        }
    }
}

/// The two collector outages of the December 2024 – May 2025 collection:
/// 16 Jan 2025 from 16:00 UTC to midnight, and 31 Mar 2025 from 11:00 UTC
/// through the end of 2 Apr 2025. 69 hours in total.
pub fn firehose_outages_2025() -> Vec<Downtime> {
    let at = |y, m, d, h| Utc.with_ymd_and_hms(y, m, d, h, 0, 0).unwrap();
    vec![
        Downtime { start: at(2025, 1, 16, 16), end: at(2025, 1, 17, 0) },
        Downtime { start: at(2025, 3, 31, 11), end: at(2025, 4, 3, 0) },
    ]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsOptions {
    /// Inclusive collection window. When absent the first and last observed
    /// event days are used.
    pub window: Option<(NaiveDate, NaiveDate)>,
    pub downtime: Vec<Downtime>,
}

#[derive(Debug, Clone, Default)]
struct DayCell {
    actions: u64,
    authors: HashSet<String>,
}

/// Mergeable partial aggregate over a shard of the event stream.
///
/// Distinct authors are kept as sets per (day, action) so that shards which
/// split the same day merge exactly.
#[derive(Debug, Clone, Default)]
pub struct ActivityAccumulator {
    cells: BTreeMap<(NaiveDate, ActionType), DayCell>,
    non_create: u64,
    other_collection: u64,
}

impl ActivityAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: &RawEvent) {
        if !event.is_create() {
            self.non_create += 1;
            return;
        }
        let Some(action) = ActionType::from_collection(&event.collection) else {
            self.other_collection += 1;
            return;
        };
        let cell = self.cells.entry((event.timestamp.date_naive(), action)).or_default();
        cell.actions += 1;
        if !cell.authors.contains(&event.author) {
            cell.authors.insert(event.author.clone());
        }
    }

    /// Associative and commutative merge.
    pub fn merge(mut self, other: ActivityAccumulator) -> ActivityAccumulator {
        for (key, cell) in other.cells {
            let mine = self.cells.entry(key).or_default();
            mine.actions += cell.actions;
            mine.authors.extend(cell.authors);
        }
        self.non_create += other.non_create;
        self.other_collection += other.other_collection;
        self
    }

    pub fn finish(&self, options: &StatsOptions) -> ActivityStats {
        let rows = self
            .cells
            .iter()
            .map(|(&(date, action), cell)| DailyRow {
                date,
                action,
                actions: cell.actions,
                distinct_authors: cell.authors.len() as u64,
            })
            .collect();
        let mut stats = ActivityStats::from_daily_rows(rows, options);
        stats.non_create_events = self.non_create;
        stats.other_collection_events = self.other_collection;
        stats
    }
}

/// One row of the per-day activity export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyRow {
    pub date: NaiveDate,
    pub action: ActionType,
    pub actions: u64,
    pub distinct_authors: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub total_actions: u64,
    /// Sum over days of that day's distinct authors.
    pub total_author_days: u64,
    pub daily_average_actions: f64,
    pub daily_average_authors: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub first_day: Option<NaiveDate>,
    pub last_day: Option<NaiveDate>,
    pub calendar_days: u64,
    pub downtime_hours: f64,
    /// Calendar days minus downtime, in days.
    pub observed_days: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActivityStats {
    pub per_action: BTreeMap<ActionType, ActionStats>,
    pub coverage: Coverage,
    pub daily: Vec<DailyRow>,
    pub non_create_events: u64,
    pub other_collection_events: u64,
}

impl ActivityStats {
    /// Rebuilds statistics from per-day rows (for instance a previously
    /// exported daily CSV). Daily averages divide by the observed days, so
    /// days with downtime count only for the fraction actually collected.
    pub fn from_daily_rows(mut rows: Vec<DailyRow>, options: &StatsOptions) -> Self {
        rows.sort_by_key(|r| (r.date, r.action));
        let window = options.window.or_else(|| {
            let first = rows.first()?.date;
            let last = rows.last()?.date;
            Some((first, last))
        });
        let coverage = match window {
            None => Coverage::default(),
            Some((first, last)) => {
                let calendar_days = ((last - first).num_days() + 1).max(0) as u64;
                let from = Utc.from_utc_datetime(&first.and_time(NaiveTime::MIN));
                let to = from + Duration::days(calendar_days as i64);
                let downtime_hours: f64 = options.downtime.iter().map(|d| d.overlap_hours(from, to)).sum();
                Coverage {
                    first_day: Some(first),
                    last_day: Some(last),
                    calendar_days,
                    downtime_hours,
                    observed_days: (calendar_days as f64 - downtime_hours / 24.0).max(0.0),
                }
            }
        };

        let mut per_action: BTreeMap<ActionType, ActionStats> = BTreeMap::new();
        for row in &rows {
            let s = per_action.entry(row.action).or_default();
            s.total_actions += row.actions;
            s.total_author_days += row.distinct_authors;
        }
        for s in per_action.values_mut() {
            if coverage.observed_days > 0.0 {
                s.daily_average_actions = s.total_actions as f64 / coverage.observed_days;
                s.daily_average_authors = s.total_author_days as f64 / coverage.observed_days;
            }
        }

        ActivityStats { per_action, coverage, daily: rows, non_create_events: 0, other_collection_events: 0 }
    }

    pub fn get(&self, action: ActionType) -> ActionStats {
        self.per_action.get(&action).cloned().unwrap_or_default()
    }

    pub fn write_daily_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "action_type", "actions", "distinct_authors"])?;
        for row in &self.daily {
            w.write_record([
                row.date.to_string(),
                row.action.to_string(),
                row.actions.to_string(),
                row.distinct_authors.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<daily csv>", e))?;
        Ok(())
    }

    pub fn read_daily_csv<R: std::io::Read>(reader: R) -> Result<Vec<DailyRow>> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Parse { line: i + 2, message: format!("bad {what} in daily csv") };
            rows.push(DailyRow {
                date: rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("date"))?,
                action: rec.get(1).and_then(ActionType::parse).ok_or_else(|| bad("action_type"))?,
                actions: rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(|| bad("actions"))?,
                distinct_authors: rec.get(3).and_then(|s| s.parse().ok()).ok_or_else(|| bad("distinct_authors"))?,
            });
        }
        Ok(rows)
    }
}

pub fn accumulate_stats<'a, I>(events: I, options: &StatsOptions) -> ActivityStats
where
    I: IntoIterator<Item = &'a RawEvent>,
{
    let mut acc = ActivityAccumulator::new();
    for ev in events {
        acc.push(ev);
    }
    acc.finish(options)
}

/// Parses a dump held in memory on all rayon threads and merges the shard
/// aggregates. Returns the accumulator and the number of malformed lines.
pub fn stats_from_bytes_parallel(data: &[u8], shards: usize) -> (ActivityAccumulator, usize) {
    super::event::split_at_line_boundaries(data, shards)
        .into_par_iter()
        .map(|shard| {
            let mut acc = ActivityAccumulator::new();
            let mut errors = 0;
            for item in EventReader::new(shard) {
                match item {
                    Ok(ev) => acc.push(&ev),
                    Err(_) => errors += 1,
                }
            }
            (acc, errors)
        })
        .reduce(|| (ActivityAccumulator::new(), 0), |(a, ea), (b, eb)| (a.merge(b), ea + eb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::event::{Action, Payload};

    fn post(author: &str, time: &str) -> RawEvent {
        RawEvent {
            action: Action::Create,
            collection: Collection::Post,
            author: author.into(),
            timestamp: time.parse().unwrap(),
            payload: Payload::Post {
                uri: format!("at://{author}/{time}"),
                text: "text".into(),
                langs: vec!["en".into()],
            },
        }
    }

    #[test]
    fn three_posts_two_authors_one_day() {
        let evs = vec![
            post("a", "2025-01-01T01:00:00Z"),
            post("a", "2025-01-01T02:00:00Z"),
            post("b", "2025-01-01T03:00:00Z"),
        ];
        let s = accumulate_stats(&evs, &StatsOptions::default());
        let p = s.get(ActionType::Posts);
        assert_eq!(p.total_actions, 3);
        assert_eq!(p.daily_average_authors, 2.0);
        assert_eq!(p.daily_average_actions, 3.0);
    }

    #[test]
    fn same_author_on_two_days_counts_twice() {
        let evs = vec![post("a", "2025-01-01T23:59:00Z"), post("a", "2025-01-02T00:01:00Z")];
        let s = accumulate_stats(&evs, &StatsOptions::default());
        assert_eq!(s.get(ActionType::Posts).total_author_days, 2);
        assert_eq!(s.coverage.calendar_days, 2);
    }

    #[test]
    fn empty_stream_gives_zeroed_stats() {
        let s = accumulate_stats(std::iter::empty(), &StatsOptions::default());
        assert_eq!(s, ActivityStats::default());
    }

    #[test]
    fn non_create_events_are_counted_but_excluded() {
        let mut del = post("a", "2025-01-01T01:00:00Z");
        del.action = Action::Delete;
        let s = accumulate_stats(&[del, post("b", "2025-01-01T02:00:00Z")], &StatsOptions::default());
        assert_eq!(s.non_create_events, 1);
        assert_eq!(s.get(ActionType::Posts).total_actions, 1);
    }

    #[test]
    fn outages_total_69_hours() {
        let total: f64 = firehose_outages_2025().iter().map(Downtime::hours).sum();
        assert_eq!(total, 69.0);
    }

    #[test]
    fn downtime_reduces_observed_days() {
        let opts = StatsOptions {
            window: Some(("2025-01-16".parse().unwrap(), "2025-01-17".parse().unwrap())),
            downtime: firehose_outages_2025(),
        };
        let s = ActivityStats::from_daily_rows(vec![], &opts);
        assert_eq!(s.coverage.calendar_days, 2);
        assert!((s.coverage.observed_days - (2.0 - 8.0 / 24.0)).abs() < 1e-12);
    }

    #[test]
    fn merge_is_order_independent() {
        let evs: Vec<_> = (0..20)
            .map(|i| post(&format!("u{}", i % 7), &format!("2025-01-0{}T0{}:00:00Z", 1 + i % 3, i % 10)))
            .collect();
        let whole = accumulate_stats(&evs, &StatsOptions::default());
        let mut a = ActivityAccumulator::new();
        let mut b = ActivityAccumulator::new();
        for (i, e) in evs.iter().enumerate() {
            if i % 2 == 0 {
                a.push(e)
            } else {
                b.push(e)
            }
        }
        let ab = a.clone().merge(b.clone()).finish(&StatsOptions::default());
        let ba = b.merge(a).finish(&StatsOptions::default());
        assert_eq!(ab, whole);
        assert_eq!(ba, whole);
    }

    #[test]
    fn daily_csv_round_trip() {
        let evs = vec![post("a", "2025-01-01T01:00:00Z"), post("b", "2025-01-03T01:00:00Z")];
        let s = accumulate_stats(&evs, &StatsOptions::default());
        let mut buf = Vec::new();
        s.write_daily_csv(&mut buf).unwrap();
        let rows = ActivityStats::read_daily_csv(buf.as_slice()).unwrap();
        assert_eq!(ActivityStats::from_daily_rows(rows, &StatsOptions::default()), s);
    }
}
