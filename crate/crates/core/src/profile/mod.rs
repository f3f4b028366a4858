//! Trimmed-mean hourly profiles per counter, direction, day type and period.

mod cache;
mod volume;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{classify_day, DayType, HolidayCalendar};
use crate::ingest::{CleanDataset, CounterId, Direction, RawCountRecord};
use crate::scalar::{cmp_scalar, Scalar};

pub use cache::{read_profiles, write_profiles, PROFILE_HEADER_PREFIX};
pub use volume::{
    read_volumes, weekly_share, write_volumes, VolumeRow, VolumeSummary, WeeklyShare,
};

pub const HOURS: usize = 24;

/// Lower and upper trimming quantile for cell averages.
pub const TRIM_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot average an empty sequence")]
    EmptyInput,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("degenerate profile")]
    DegenerateProfile,
    #[error("{reason}, line {line}")]
    Cache { line: u64, reason: String },
    #[error("series {counter_id}/{direction}/{day_type} has {found} periods, expected {expected}")]
    IncompleteSeries {
        counter_id: String,
        direction: u8,
        day_type: DayType,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 10/90 trimmed mean.
///
/// Percentile cut points use the nearest rank counted from each end of the
/// sorted sample: with `k = ceil(0.1 n)`, the lower cut is the k-th smallest
/// value and the upper cut the k-th largest. Values strictly outside the cut
/// points are dropped; ties at a cut point are kept.
pub fn trimmed_mean<T: Scalar>(values: &[T]) -> Result<T, ProfileError> {
    if values.is_empty() {
        return Err(ProfileError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ProfileError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(cmp_scalar);
    let n = sorted.len();
    let k = (n * 10).div_ceil(100).max(1);
    let (lo, hi) = (sorted[k - 1], sorted[n - k]);
    let kept = sorted.iter().copied().filter(|&v| v >= lo && v <= hi);
    let (sum, count) = kept.fold((T::zero(), 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        let sum: T = sorted.iter().copied().sum();
        return Ok(sum / T::of_usize(n));
    }
    Ok(sum / T::of_usize(count))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    Monthly,
    DayOfWeek,
}

impl AggregationMode {
    pub fn period_count(self) -> usize {
        match self {
            AggregationMode::Monthly => 12,
            AggregationMode::DayOfWeek => 7,
        }
    }

    pub fn periods(self) -> Vec<Period> {
        match self {
            AggregationMode::Monthly => (1..=12).map(Period::Month).collect(),
            AggregationMode::DayOfWeek => (0..7).map(Period::Weekday).collect(),
        }
    }

    fn period_of(self, date: NaiveDate) -> Period {
        match self {
            AggregationMode::Monthly => Period::Month(date.month() as u8),
            AggregationMode::DayOfWeek => {
                Period::Weekday(date.weekday().num_days_from_monday() as u8)
            }
        }
    }
}

impl FromStr for AggregationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "monthly" | "month" => Ok(AggregationMode::Monthly),
            "day_of_week" | "dow" | "weekday" => Ok(AggregationMode::DayOfWeek),
            other => Err(format!("unknown aggregation mode {other:?}")),
        }
    }
}

const WEEKDAY_NAMES: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

/// Aggregation period: calendar month `1..=12` or weekday `0..=6` (Monday first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Period {
    Month(u8),
    Weekday(u8),
}

impl Period {
    pub fn mode(self) -> AggregationMode {
        match self {
            Period::Month(_) => AggregationMode::Monthly,
            Period::Weekday(_) => AggregationMode::DayOfWeek,
        }
    }

    /// Zero-based position within its mode.
    pub fn index(self) -> usize {
        match self {
            Period::Month(m) => usize::from(m) - 1,
            Period::Weekday(d) => usize::from(d),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Period::Month(m) => write!(f, "{m}"),
            Period::Weekday(d) => f.write_str(WEEKDAY_NAMES[usize::from(d)]),
        }
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(d) = WEEKDAY_NAMES.iter().position(|w| w.eq_ignore_ascii_case(s)) {
            return Ok(Period::Weekday(d as u8));
        }
        match s.parse::<u8>() {
            Ok(m @ 1..=12) => Ok(Period::Month(m)),
            _ => Err(format!("invalid period {s:?}")),
        }
    }
}

impl Serialize for Period {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Identifies one profile series: counter, direction and day type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub counter_id: CounterId,
    pub direction: Direction,
    pub day_type: DayType,
}

impl SeriesKey {
    pub fn new(counter_id: impl Into<CounterId>, direction: Direction, day_type: DayType) -> Self {
        Self {
            counter_id: counter_id.into(),
            direction,
            day_type,
        }
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            self.counter_id, self.direction, self.day_type
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProfileKey {
    #[serde(flatten)]
    pub series: SeriesKey,
    pub period: Period,
}

/// Average vehicles per hour (or percent of daily traffic once normalized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyProfile<T> {
    pub key: ProfileKey,
    pub values: [T; HOURS],
}

impl<T: Scalar> HourlyProfile<T> {
    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Hour of the largest value, first on ties.
    pub fn argmax_hour(&self) -> usize {
        let mut best = 0;
        for h in 1..HOURS {
            if self.values[h] > self.values[best] {
                best = h;
            }
        }
        best
    }
}

/// Rescales a profile to percent of its daily total.
pub fn normalize_profile<T: Scalar>(
    p: &HourlyProfile<T>,
) -> Result<HourlyProfile<T>, ProfileError> {
    Ok(HourlyProfile {
        key: p.key.clone(),
        values: normalize_values(&p.values)?,
    })
}

pub fn normalize_values<T: Scalar>(values: &[T; HOURS]) -> Result<[T; HOURS], ProfileError> {
    let sum: T = values.iter().copied().sum();
    if !(sum > T::zero()) || !sum.is_finite() {
        return Err(ProfileError::DegenerateProfile);
    }
    let hundred = T::lit(100.0);
    Ok(values.map(|v| hundred * v / sum))
}

/// Profiles for every series, each holding all periods of the mode in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet<T> {
    pub mode: AggregationMode,
    pub series: BTreeMap<SeriesKey, Vec<HourlyProfile<T>>>,
}

impl<T: Scalar> ProfileSet<T> {
    pub fn new(mode: AggregationMode) -> Self {
        Self {
            mode,
            series: BTreeMap::new(),
        }
    }

    pub fn get(&self, key: &SeriesKey) -> Option<&[HourlyProfile<T>]> {
        self.series.get(key).map(Vec::as_slice)
    }

    /// Period-by-hour matrix for one series.
    pub fn matrix(&self, key: &SeriesKey) -> Option<Vec<[T; HOURS]>> {
        self.get(key)
            .map(|ps| ps.iter().map(|p| p.values).collect())
    }

    pub fn profiles(&self) -> impl Iterator<Item = &HourlyProfile<T>> {
        self.series.values().flatten()
    }

    pub fn period(&self, period: Period) -> impl Iterator<Item = &HourlyProfile<T>> {
        self.series
            .values()
            .filter_map(move |ps| ps.get(period.index()).filter(|p| p.key.period == period))
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

/// A profile cell with no observations, zero-filled in the output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MissingCell {
    pub key: ProfileKey,
    pub hour: u8,
}

/// Trimmed-mean profiles over all covered years.
pub fn build_profiles<T: Scalar>(
    data: &CleanDataset,
    holidays: &HolidayCalendar,
    mode: AggregationMode,
) -> ProfileSet<T> {
    let (set, missing) = build_profiles_with_report(data, holidays, mode);
    if !missing.is_empty() {
        log::warn!(
            "{} profile cells had no observations and were zero-filled",
            missing.len()
        );
    }
    set
}

/// [`build_profiles`] plus the list of zero-filled cells.
pub fn build_profiles_with_report<T: Scalar>(
    data: &CleanDataset,
    holidays: &HolidayCalendar,
    mode: AggregationMode,
) -> (ProfileSet<T>, Vec<MissingCell>) {
    let mut groups: BTreeMap<(&CounterId, Direction), Vec<&RawCountRecord>> = BTreeMap::new();
    for r in &data.records {
        groups
            .entry((&r.counter_id, r.direction))
            .or_default()
            .push(r);
    }
    let groups: Vec<_> = groups.into_iter().collect();

    let built: Vec<(Vec<(SeriesKey, Vec<HourlyProfile<T>>)>, Vec<MissingCell>)> = groups
        .par_iter()
        .map(|((id, direction), records)| profile_group(id, *direction, records, holidays, mode))
        .collect();

    let mut set = ProfileSet::new(mode);
    let mut missing = Vec::new();
    for (series, gaps) in built {
        set.series.extend(series);
        missing.extend(gaps);
    }
    (set, missing)
}

fn profile_group<T: Scalar>(
    id: &CounterId,
    direction: Direction,
    records: &[&RawCountRecord],
    holidays: &HolidayCalendar,
    mode: AggregationMode,
) -> (Vec<(SeriesKey, Vec<HourlyProfile<T>>)>, Vec<MissingCell>) {
    let periods = mode.period_count();
    let cell = |dt: DayType, p: usize, h: usize| (dt as usize * periods + p) * HOURS + h;
    let mut cells: Vec<Vec<T>> = vec![Vec::new(); 2 * periods * HOURS];
    for r in records {
        let dt = classify_day(r.date, holidays);
        let p = mode.period_of(r.date).index();
        cells[cell(dt, p, usize::from(r.hour))].push(T::lit(r.count() as f64));
    }

    let mut series = Vec::with_capacity(2);
    let mut missing = Vec::new();
    for dt in DayType::ALL {
        let skey = SeriesKey::new(id.clone(), direction, dt);
        let profiles = mode
            .periods()
            .into_iter()
            .map(|period| {
                let key = ProfileKey {
                    series: skey.clone(),
                    period,
                };
                let mut values = [T::zero(); HOURS];
                for (h, v) in values.iter_mut().enumerate() {
                    let obs = &cells[cell(dt, period.index(), h)];
                    match trimmed_mean(obs) {
                        Ok(m) => *v = m,
                        Err(_) => missing.push(MissingCell {
                            key: key.clone(),
                            hour: h as u8,
                        }),
                    }
                }
                HourlyProfile { key, values }
            })
            .collect();
        series.push((skey, profiles));
    }
    (series, missing)
}
