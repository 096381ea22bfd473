//! Hourly power series: CSV ingestion, validation, per-hour slicing and
//! night-hour detection.
//!
//! The on-disk format is a CSV file with header `date,hour,power_mw`. Rows
//! must be strictly hourly; a missing observation is declared by a row whose
//! `power_mw` field is empty.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::SeriesError;

pub const HOURS_PER_DAY: u8 = 24;

/// Share of missing days at an hour above which a warning is logged.
pub const MISSING_WARN_FRACTION: f64 = 0.05;

const HEADER: [&str; 3] = ["date", "hour", "power_mw"];

/// One hourly row. `power` is `None` for a declared gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub date: NaiveDate,
    pub hour: u8,
    pub power: Option<f64>,
}

impl Record {
    pub fn timestamp(&self) -> NaiveDateTime {
        self.date
            .and_hms_opt(u32::from(self.hour), 0, 0)
            .expect("hour validated on construction")
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}T{:02}:00", self.date, self.hour)
    }
}

/// A validated, gap-explicit hourly power series.
///
/// Day ordinals (see [`SolarSeries::day_ordinal`]) are counted from `origin`,
/// which is the first date of the series it was loaded as. Splitting keeps the
/// origin so ordinals stay comparable across the pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarSeries {
    records: Vec<Record>,
    origin: NaiveDate,
}

impl SolarSeries {
    /// Builds a series from records, enforcing ordering, hourly spacing and
    /// nonnegative power.
    pub fn from_records(records: Vec<Record>) -> Result<Self, SeriesError> {
        let first = records.first().ok_or(SeriesError::Empty)?;
        let origin = first.date;
        validate(&records, |i| i + 1)?;
        Ok(Self { records, origin })
    }

    fn with_origin(records: Vec<Record>, origin: NaiveDate) -> Self {
        Self { records, origin }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn origin(&self) -> NaiveDate {
        self.origin
    }

    /// 1-based day number of `date` relative to the series origin.
    pub fn day_ordinal(&self, date: NaiveDate) -> u32 {
        ((date - self.origin).num_days() + 1) as u32
    }

    /// Distinct calendar dates covered, in order.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let mut dates: Vec<NaiveDate> = self.records.iter().map(|r| r.date).collect();
        dates.dedup();
        dates
    }

    /// Observed values in chronological order, gaps dropped.
    pub fn observed_values(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.power).collect()
    }

    /// Splits into records strictly before `first_test_date` and the rest.
    pub fn split_at_date(&self, first_test_date: NaiveDate) -> (SolarSeries, SolarSeries) {
        let cut = self.records.partition_point(|r| r.date < first_test_date);
        (
            Self::with_origin(self.records[..cut].to_vec(), self.origin),
            Self::with_origin(self.records[cut..].to_vec(), self.origin),
        )
    }

    /// First date of the held-out window when the last `fraction` of days is
    /// held out. At least one day is held out and one kept for training.
    pub fn holdout_start(&self, fraction: f64) -> Result<NaiveDate, SeriesError> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(SeriesError::InvalidSplit(format!(
                "holdout fraction {fraction} is outside (0, 1)"
            )));
        }
        let dates = self.dates();
        if dates.len() < 2 {
            return Err(SeriesError::InvalidSplit(
                "need at least two days to split".into(),
            ));
        }
        let held = ((dates.len() as f64 * fraction).round() as usize).clamp(1, dates.len() - 1);
        Ok(dates[dates.len() - held])
    }

    /// Fraction of rows at `hour` that are declared gaps.
    pub fn missing_fraction(&self, hour: u8) -> f64 {
        let (total, missing) = self
            .records
            .iter()
            .filter(|r| r.hour == hour)
            .fold((0usize, 0usize), |(t, m), r| (t + 1, m + usize::from(r.power.is_none())));
        if total == 0 {
            0.0
        } else {
            missing as f64 / total as f64
        }
    }

    /// Writes the series in the ingestion CSV format.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SeriesError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(HEADER)?;
        for r in &self.records {
            let power = r.power.map(|p| p.to_string()).unwrap_or_default();
            out.write_record([r.date.to_string(), r.hour.to_string(), power])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Checks ordering, spacing and sign. `line_of` maps a record index to the
/// source line used in error messages.
fn validate(records: &[Record], line_of: impl Fn(usize) -> usize) -> Result<(), SeriesError> {
    let mut previous: Option<NaiveDateTime> = None;
    for (i, r) in records.iter().enumerate() {
        let line = line_of(i);
        if r.hour >= HOURS_PER_DAY {
            return Err(SeriesError::Malformed {
                line,
                message: format!("hour {} is outside 0..=23", r.hour),
            });
        }
        if let Some(value) = r.power {
            if !value.is_finite() {
                return Err(SeriesError::Malformed {
                    line,
                    message: format!("power {value} is not finite"),
                });
            }
            if value < 0.0 {
                return Err(SeriesError::NegativePower { line, value });
            }
        }
        let ts = r.timestamp();
        if let Some(prev) = previous {
            if ts == prev {
                return Err(SeriesError::Malformed {
                    line,
                    message: format!("duplicate timestamp {r}"),
                });
            }
            if ts < prev {
                return Err(SeriesError::Malformed {
                    line,
                    message: format!("timestamp {r} is out of chronological order"),
                });
            }
            if ts - prev != Duration::hours(1) {
                return Err(SeriesError::Spacing {
                    line,
                    previous: prev.format("%Y-%m-%dT%H:%M").to_string(),
                    found: r.to_string(),
                });
            }
        }
        previous = Some(ts);
    }
    Ok(())
}

/// Parses a series from CSV with header `date,hour,power_mw`.
pub fn load_series<R: Read>(source: R) -> Result<SolarSeries, SeriesError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers()?.clone();
    if header.len() != HEADER.len() || header.iter().zip(HEADER).any(|(a, b)| a != b) {
        return Err(SeriesError::Malformed {
            line: 1,
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| SeriesError::Malformed {
            line,
            message: e.to_string(),
        })?;
        records.push(parse_row(&row, line)?);
    }
    if records.is_empty() {
        return Err(SeriesError::Empty);
    }
    validate(&records, |i| i + 2)?;
    let origin = records[0].date;
    Ok(SolarSeries::with_origin(records, origin))
}

/// Reads a series from a CSV file on disk.
pub fn load_series_file(path: &Path) -> Result<SolarSeries, SeriesError> {
    let file = std::fs::File::open(path)?;
    load_series(std::io::BufReader::new(file))
}

fn parse_row(row: &csv::StringRecord, line: usize) -> Result<Record, SeriesError> {
    let bad = |message: String| SeriesError::Malformed { line, message };
    if row.len() != HEADER.len() {
        return Err(bad(format!("expected 3 fields, found {}", row.len())));
    }
    let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
        .map_err(|e| bad(format!("bad date `{}`: {e}", &row[0])))?;
    let hour: u8 = row[1]
        .parse()
        .map_err(|_| bad(format!("bad hour `{}`", &row[1])))?;
    if hour >= HOURS_PER_DAY {
        return Err(bad(format!("hour {hour} is outside 0..=23")));
    }
    let power = match &row[2] {
        "" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|_| bad(format!("bad power `{s}`")))?,
        ),
    };
    Ok(Record { date, hour, power })
}

/// All observations at one hour of the day, in day order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourSlice {
    pub hour: u8,
    pub values: Vec<f64>,
    /// 1-based day ordinals parallel to `values`.
    pub day_index: Vec<u32>,
}

impl HourSlice {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Extracts the observations at `hour`. Missing days are omitted and show up
/// as jumps in `day_index`. The slice is empty when the hour has no
/// observations.
pub fn slice_by_hour(series: &SolarSeries, hour: u8) -> Result<HourSlice, SeriesError> {
    if hour >= HOURS_PER_DAY {
        return Err(SeriesError::InvalidHour(hour));
    }
    let (values, day_index) = series
        .records
        .iter()
        .filter(|r| r.hour == hour)
        .filter_map(|r| r.power.map(|p| (p, series.day_ordinal(r.date))))
        .unzip();
    Ok(HourSlice {
        hour,
        values,
        day_index,
    })
}

/// Hours of the day whose output is forced to zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NightMask {
    zero_hours: BTreeSet<u8>,
}

impl NightMask {
    pub fn new(hours: impl IntoIterator<Item = u8>) -> Result<Self, SeriesError> {
        let zero_hours: BTreeSet<u8> = hours.into_iter().collect();
        if let Some(&h) = zero_hours.iter().find(|&&h| h >= HOURS_PER_DAY) {
            return Err(SeriesError::InvalidHour(h));
        }
        Ok(Self { zero_hours })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_night(&self, hour: u8) -> bool {
        self.zero_hours.contains(&hour)
    }

    pub fn zero_hours(&self) -> impl Iterator<Item = u8> + '_ {
        self.zero_hours.iter().copied()
    }

    /// Complement of the zero hours, ascending.
    pub fn modeled_hours(&self) -> Vec<u8> {
        (0..HOURS_PER_DAY).filter(|h| !self.is_night(*h)).collect()
    }
}

/// Marks an hour as night when every observation at that hour is at most
/// `threshold` MW. Hours without any observation count as night.
pub fn detect_night_hours(series: &SolarSeries, threshold: f64) -> NightMask {
    let mut lit = [false; HOURS_PER_DAY as usize];
    for r in &series.records {
        if let Some(p) = r.power {
            if p > threshold {
                lit[r.hour as usize] = true;
            }
        }
    }
    NightMask {
        zero_hours: (0..HOURS_PER_DAY).filter(|&h| !lit[h as usize]).collect(),
    }
}

/// Logs a warning for each modeled hour whose share of missing days exceeds
/// [`MISSING_WARN_FRACTION`]; returns the offending hours.
pub fn warn_on_missing(series: &SolarSeries, mask: &NightMask) -> Vec<u8> {
    mask.modeled_hours()
        .into_iter()
        .filter(|&h| {
            let frac = series.missing_fraction(h);
            if frac > MISSING_WARN_FRACTION {
                log::warn!("hour {h:02}: {:.1}% of days missing", 100.0 * frac);
                true
            } else {
                false
            }
        })
        .collect()
}
