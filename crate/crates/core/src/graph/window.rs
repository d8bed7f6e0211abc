use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Half-open UTC interval `[start, end)`.
///
/// Parsed from `START:END` where each side is a month (`2024-12`) or a day
/// (`2024-12-17`). The end side is inclusive as written, so `2024-12:2025-05`
/// covers December 2024 through the end of May 2025.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    spec: (Bound, Bound),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Bound {
    Month(i32, u32),
    Day(NaiveDate),
}

impl Bound {
    fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad window bound `{s}`"));
        match s.len() {
            7 => {
                let d = NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d").map_err(|_| bad())?;
                Ok(Bound::Month(d.year(), d.month()))
            }
            10 => Ok(Bound::Day(NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }

    fn first_day(self) -> NaiveDate {
        match self {
            Bound::Month(y, m) => NaiveDate::from_ymd_opt(y, m, 1).unwrap(),
            Bound::Day(d) => d,
        }
    }

    fn day_after(self) -> NaiveDate {
        match self {
            Bound::Month(y, m) if m == 12 => NaiveDate::from_ymd_opt(y + 1, 1, 1).unwrap(),
            Bound::Month(y, m) => NaiveDate::from_ymd_opt(y, m + 1, 1).unwrap(),
            Bound::Day(d) => d + Duration::days(1),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Month(y, m) => write!(f, "{y:04}-{m:02}"),
            Bound::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

fn midnight(d: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).unwrap())
}

impl TimeWindow {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }

    /// Directory-safe label, e.g. `2024-12_2025-05`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.spec.0, self.spec.1)
    }

    pub fn first_day(&self) -> NaiveDate {
        self.start.date_naive()
    }

    /// Last day inside the window.
    pub fn last_day(&self) -> NaiveDate {
        (self.end - Duration::days(1)).date_naive()
    }
}

impl FromStr for TimeWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) =
            s.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("window `{s}` is not START:END")))?;
        let (a, b) = (Bound::parse(a.trim())?, Bound::parse(b.trim())?);
        let (start, end) = (midnight(a.first_day()), midnight(b.day_after()));
        if start >= end {
            return Err(Error::InvalidArgument(format!("window `{s}` is empty")));
        }
        Ok(Self { start, end, spec: (a, b) })
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.spec.0, self.spec.1)
    }
}

impl Serialize for TimeWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeWindow {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_window() {
        let w: TimeWindow = "2024-12:2025-05".parse().unwrap();
        assert_eq!(w.start, "2024-12-01T00:00:00Z".parse::<DateTime<Utc>>().unwrap());
        assert_eq!(w.end, "2025-06-01T00:00:00Z".parse::<DateTime<Utc>>().unwrap());
        assert!(w.contains("2025-05-31T23:59:59Z".parse().unwrap()));
        assert!(!w.contains(w.end));
        assert_eq!(w.to_string(), "2024-12:2025-05");
        assert_eq!(w.label(), "2024-12_2025-05");
    }

    #[test]
    fn day_window() {
        let w: TimeWindow = "2024-12-17:2025-05-31".parse().unwrap();
        assert_eq!((w.end - w.start).num_days(), 166);
        assert_eq!(w.last_day().to_string(), "2025-05-31");
    }

    #[test]
    fn rejects_bad_windows() {
        assert!("2025-05:2024-12".parse::<TimeWindow>().is_err());
        assert!("2025".parse::<TimeWindow>().is_err());
        assert!("2025-13:2025-14".parse::<TimeWindow>().is_err());
    }
}
