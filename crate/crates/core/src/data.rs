//! Demand events, datasets, filtering, train/test splitting, and monthly
//! tabulation.

use core::fmt;
use core::str::FromStr;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::{DateTime, Datelike, TimeZone, Utc};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geo::{wrap_lon_deg, GeoPoint};
use crate::partition::{assign, Partition};

/// A calendar month in UTC, e.g. `2016-01`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    pub year: i32,
    /// 1-based month number.
    pub month: u32,
}

impl Month {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        Month { year, month }
    }

    /// The month containing a UTC instant.
    pub fn containing(t: &DateTime<Utc>) -> Self {
        Month {
            year: t.year(),
            month: t.month(),
        }
    }

    /// Months since year 0; total order and arithmetic handle.
    pub fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_index(i: i64) -> Self {
        Month {
            year: i.div_euclid(12) as i32,
            month: (i.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn next(self) -> Self {
        Month::from_index(self.index() + 1)
    }

    pub fn prev(self) -> Self {
        Month::from_index(self.index() - 1)
    }

    /// First instant of the month (UTC midnight on the 1st).
    pub fn first_instant(self) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(self.year, self.month, 1, 0, 0, 0)
            .single()
            .expect("valid month start")
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| alloc::format!("expected YYYY-MM, got {s:?}"))?;
        let year: i32 = y.parse().map_err(|_| alloc::format!("bad year in {s:?}"))?;
        let month: u32 = m.parse().map_err(|_| alloc::format!("bad month in {s:?}"))?;
        if !(1..=12).contains(&month) {
            return Err(alloc::format!("month out of range in {s:?}"));
        }
        Ok(Month { year, month })
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <&str>::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// An inclusive range of calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub start: Month,
    pub end: Month,
}

impl MonthRange {
    pub fn new(start: Month, end: Month) -> Self {
        assert!(start <= end, "month range start after end");
        MonthRange { start, end }
    }

    pub fn contains(&self, m: Month) -> bool {
        self.start <= m && m <= self.end
    }

    /// Number of months in the range.
    pub fn len(&self) -> usize {
        (self.end.index() - self.start.index() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // start <= end always holds
    }

    pub fn iter(&self) -> impl Iterator<Item = Month> {
        let start = self.start.index();
        let end = self.end.index();
        (start..=end).map(Month::from_index)
    }

    /// Position of `m` within the range, if contained.
    pub fn position(&self, m: Month) -> Option<usize> {
        if self.contains(m) {
            Some((m.index() - self.start.index()) as usize)
        } else {
            None
        }
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// One demand signal: where and when it happened, how heavy it was, and how
/// it is classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandEvent {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub location: GeoPoint,
    /// Complexity proxy used as the clustering/centroid weight; at least 1.
    pub total_activities: u32,
    /// Resources dispatched; weights the weighted distance error.
    pub assets_dispatched: u32,
    /// Optional response-group label, required by hierarchical partitions.
    pub group: Option<String>,
    /// Free-form classification consumed by filters; may be empty.
    pub category: String,
}

impl DemandEvent {
    pub fn month(&self) -> Month {
        Month::containing(&self.timestamp)
    }
}

/// An ordered collection of events plus the month span it covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventDataset {
    pub events: Vec<DemandEvent>,
    /// Inclusive month span; `None` only for an empty dataset of unknown
    /// extent.
    pub time_span: Option<MonthRange>,
    pub provenance: String,
}

impl EventDataset {
    /// Builds a dataset whose span is derived from the events themselves.
    pub fn new(events: Vec<DemandEvent>, provenance: impl Into<String>) -> Self {
        let time_span = match (
            events.iter().map(|e| e.month()).min(),
            events.iter().map(|e| e.month()).max(),
        ) {
            (Some(lo), Some(hi)) => Some(MonthRange::new(lo, hi)),
            _ => None,
        };
        EventDataset {
            events,
            time_span,
            provenance: provenance.into(),
        }
    }

    /// Builds a dataset with an explicit span (which must cover every
    /// event month).
    pub fn with_span(
        events: Vec<DemandEvent>,
        time_span: MonthRange,
        provenance: impl Into<String>,
    ) -> Self {
        debug_assert!(events.iter().all(|e| time_span.contains(e.month())));
        EventDataset {
            events,
            time_span: Some(time_span),
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// An axis-aligned lat/lon box. Longitude bounds are continuous degrees
/// with `lon_min <= lon_max <= lon_min + 360`, so a box may cross the
/// antimeridian (e.g. `lon_min: 140, lon_max: 220`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl RegionBox {
    /// Inclusive containment; longitude is compared in the box's own frame.
    pub fn contains(&self, p: GeoPoint) -> bool {
        if p.lat_deg < self.lat_min || p.lat_deg > self.lat_max {
            return false;
        }
        let rel = {
            let r = (p.lon_deg - wrap_lon_deg(self.lon_min)) % 360.0;
            if r < 0.0 {
                r + 360.0
            } else {
                r
            }
        };
        rel <= self.lon_max - self.lon_min
    }
}

/// Scoping rules: category exclusions plus an optional region made of
/// lat/lon boxes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterRules {
    #[serde(default)]
    pub exclude_categories: Vec<String>,
    #[serde(default)]
    pub region: Option<Vec<RegionBox>>,
}

/// Result of [`filter_events`]: the surviving dataset plus per-rule removal
/// counts. An empty result is reported by the counts, not as an error.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub dataset: EventDataset,
    pub removed_by_category: BTreeMap<String, usize>,
    pub removed_out_of_region: usize,
}

/// Keeps exactly the events passing every rule. Category exclusion is
/// applied first, then the region test; each removal is counted once under
/// the rule that rejected it.
pub fn filter_events(ds: &EventDataset, rules: &FilterRules) -> FilterOutcome {
    let mut removed_by_category: BTreeMap<String, usize> = BTreeMap::new();
    let mut removed_out_of_region = 0usize;
    let mut kept = Vec::with_capacity(ds.events.len());

    for e in &ds.events {
        if rules.exclude_categories.iter().any(|c| c == &e.category) {
            *removed_by_category.entry(e.category.clone()).or_insert(0) += 1;
            continue;
        }
        if let Some(region) = &rules.region {
            if !region.iter().any(|b| b.contains(e.location)) {
                removed_out_of_region += 1;
                continue;
            }
        }
        kept.push(e.clone());
    }

    FilterOutcome {
        dataset: EventDataset {
            events: kept,
            time_span: ds.time_span,
            provenance: ds.provenance.clone(),
        },
        removed_by_category,
        removed_out_of_region,
    }
}

/// Errors from dataset operations.
#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    /// The split cutoff lies outside (or the dataset has no) time span.
    CutoffOutsideSpan {
        cutoff: Month,
        span: Option<MonthRange>,
    },
    /// Events fell outside the tabulation month range.
    EventsOutsideMonths { ids: Vec<String> },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::CutoffOutsideSpan { cutoff, span } => match span {
                Some(s) => write!(f, "cutoff {cutoff} outside dataset span {s}"),
                None => write!(f, "cutoff {cutoff} but dataset has no time span"),
            },
            DataError::EventsOutsideMonths { ids } => {
                write!(f, "{} events outside the month range: ", ids.len())?;
                for (i, id) in ids.iter().take(5).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{id}")?;
                }
                if ids.len() > 5 {
                    write!(f, ", ...")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for DataError {}

/// Splits into (train, test): events strictly before the cutoff month go to
/// train, events at or after go to test. Exhaustive and disjoint.
pub fn split_by_date(
    ds: &EventDataset,
    cutoff: Month,
) -> Result<(EventDataset, EventDataset), DataError> {
    let span = ds.time_span.ok_or(DataError::CutoffOutsideSpan {
        cutoff,
        span: None,
    })?;
    if !span.contains(cutoff) {
        return Err(DataError::CutoffOutsideSpan {
            cutoff,
            span: Some(span),
        });
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for e in &ds.events {
        if e.month() < cutoff {
            train.push(e.clone());
        } else {
            test.push(e.clone());
        }
    }
    let train_span = if cutoff > span.start {
        Some(MonthRange::new(span.start, cutoff.prev()))
    } else {
        None
    };
    let test_span = MonthRange::new(cutoff, span.end);
    Ok((
        EventDataset {
            events: train,
            time_span: train_span,
            provenance: ds.provenance.clone(),
        },
        EventDataset {
            events: test,
            time_span: Some(test_span),
            provenance: ds.provenance.clone(),
        },
    ))
}

/// Per-zone, per-calendar-month event counts over a contiguous month range,
/// zero-filled where no events occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries {
    pub zone_ids: Vec<usize>,
    pub months: MonthRange,
    /// `counts[zone][month]`.
    pub counts: Vec<Vec<u32>>,
}

impl MonthlySeries {
    pub fn total(&self) -> u64 {
        self.counts
            .iter()
            .flat_map(|row| row.iter())
            .map(|&c| c as u64)
            .sum()
    }

    /// Per-month totals summed across zones.
    pub fn monthly_totals(&self) -> Vec<u64> {
        let mut totals = alloc::vec![0u64; self.months.len()];
        for row in &self.counts {
            for (t, &c) in totals.iter_mut().zip(row) {
                *t += c as u64;
            }
        }
        totals
    }
}

/// Tabulates events into a [`MonthlySeries`] under a partition's assignment
/// rule. Events outside `months` are an error, listed by id.
pub fn monthly_counts(
    ds: &EventDataset,
    p: &Partition,
    months: MonthRange,
) -> Result<MonthlySeries, DataError> {
    let outside: Vec<String> = ds
        .events
        .iter()
        .filter(|e| !months.contains(e.month()))
        .map(|e| e.id.clone())
        .collect();
    if !outside.is_empty() {
        return Err(DataError::EventsOutsideMonths { ids: outside });
    }

    let n_zones = p.zones.len();
    let mut counts = alloc::vec![alloc::vec![0u32; months.len()]; n_zones];
    for e in &ds.events {
        let z = assign(p, e);
        let m = months.position(e.month()).expect("checked above");
        counts[z][m] += 1;
    }
    Ok(MonthlySeries {
        zone_ids: (0..n_zones).collect(),
        months,
        counts,
    })
}
