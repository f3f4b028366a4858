//! Monthly traffic volumes split by day type.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::ProfileError;
use crate::calendar::{classify_day, DayType, HolidayCalendar};
use crate::ingest::{CleanDataset, CounterId, Direction};
use crate::meta::OutputMeta;
use crate::scalar::Scalar;

/// Vehicle totals for one counter, direction and calendar month.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VolumeRow {
    pub counter_id: CounterId,
    pub direction: Direction,
    pub year: i32,
    pub month: u32,
    pub workday_total: u64,
    pub workday_days: u32,
    pub weekend_total: u64,
    pub weekend_days: u32,
}

impl VolumeRow {
    pub fn total(&self) -> u64 {
        self.workday_total + self.weekend_total
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VolumeSummary {
    /// Sorted by (counter, direction, year, month).
    pub rows: Vec<VolumeRow>,
}

/// Share of day-type-normalized traffic; the two components sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeeklyShare<T> {
    pub weekend: T,
    pub workday: T,
}

impl<T: Scalar> WeeklyShare<T> {
    /// Shares from average vehicles per weekend day and per workday.
    pub fn from_daily_averages(weekend_avg: T, workday_avg: T) -> Self {
        let total = weekend_avg + workday_avg;
        if !(total > T::zero()) {
            let half = T::lit(0.5);
            return Self {
                weekend: half,
                workday: half,
            };
        }
        let weekend = weekend_avg / total;
        Self {
            weekend,
            workday: T::one() - weekend,
        }
    }
}

impl VolumeSummary {
    pub fn from_dataset(data: &CleanDataset, holidays: &HolidayCalendar) -> Self {
        #[derive(Default)]
        struct Acc {
            totals: [u64; 2],
            days: [BTreeSet<NaiveDate>; 2],
        }
        let mut acc: BTreeMap<(CounterId, Direction, i32, u32), Acc> = BTreeMap::new();
        for r in &data.records {
            let key = (
                r.counter_id.clone(),
                r.direction,
                r.date.year(),
                r.date.month(),
            );
            let slot = classify_day(r.date, holidays) as usize;
            let a = acc.entry(key).or_default();
            a.totals[slot] += r.count();
            a.days[slot].insert(r.date);
        }
        let rows = acc
            .into_iter()
            .map(|((counter_id, direction, year, month), a)| VolumeRow {
                counter_id,
                direction,
                year,
                month,
                workday_total: a.totals[DayType::Workday as usize],
                workday_days: a.days[DayType::Workday as usize].len() as u32,
                weekend_total: a.totals[DayType::Weekend as usize],
                weekend_days: a.days[DayType::Weekend as usize].len() as u32,
            })
            .collect();
        Self { rows }
    }

    pub fn counter_ids(&self) -> BTreeSet<CounterId> {
        self.rows.iter().map(|r| r.counter_id.clone()).collect()
    }

    /// Weekly shares per counter and direction.
    pub fn weekly_shares<T: Scalar>(&self) -> BTreeMap<(CounterId, Direction), WeeklyShare<T>> {
        let mut grouped: BTreeMap<(CounterId, Direction), Vec<&VolumeRow>> = BTreeMap::new();
        for r in &self.rows {
            grouped
                .entry((r.counter_id.clone(), r.direction))
                .or_default()
                .push(r);
        }
        grouped
            .into_iter()
            .map(|(k, rows)| (k, share_of(rows)))
            .collect()
    }

    /// Weekly shares per counter with both directions pooled.
    pub fn weekly_shares_pooled<T: Scalar>(&self) -> BTreeMap<CounterId, WeeklyShare<T>> {
        let mut grouped: BTreeMap<CounterId, Vec<&VolumeRow>> = BTreeMap::new();
        for r in &self.rows {
            grouped.entry(r.counter_id.clone()).or_default().push(r);
        }
        grouped
            .into_iter()
            .map(|(k, rows)| (k, share_of(rows)))
            .collect()
    }
}

fn share_of<T: Scalar>(rows: Vec<&VolumeRow>) -> WeeklyShare<T> {
    let (mut wk_total, mut wk_days, mut wd_total, mut wd_days) = (0u64, 0u64, 0u64, 0u64);
    for r in rows {
        wk_total += r.weekend_total;
        wk_days += u64::from(r.weekend_days);
        wd_total += r.workday_total;
        wd_days += u64::from(r.workday_days);
    }
    let avg = |total: u64, days: u64| {
        if days == 0 {
            T::zero()
        } else {
            T::lit(total as f64) / T::lit(days as f64)
        }
    };
    WeeklyShare::from_daily_averages(avg(wk_total, wk_days), avg(wd_total, wd_days))
}

/// Weekend and workday shares of per-day average traffic.
pub fn weekly_share<T: Scalar>(
    data: &CleanDataset,
    holidays: &HolidayCalendar,
) -> BTreeMap<(CounterId, Direction), WeeklyShare<T>> {
    VolumeSummary::from_dataset(data, holidays).weekly_shares()
}

const VOLUME_HEADER: [&str; 8] = [
    "counter_id",
    "direction",
    "year",
    "month",
    "workday_total",
    "workday_days",
    "weekend_total",
    "weekend_days",
];

pub fn write_volumes<W: Write>(
    summary: &VolumeSummary,
    meta: Option<&OutputMeta>,
    mut sink: W,
) -> Result<(), ProfileError> {
    if let Some(meta) = meta {
        sink.write_all(meta.comment_block("#").as_bytes())?;
    }
    let mut writer = csv::WriterBuilder::new().from_writer(sink);
    writer.write_record(VOLUME_HEADER)?;
    for r in &summary.rows {
        writer.write_record([
            r.counter_id.to_string(),
            r.direction.to_string(),
            r.year.to_string(),
            r.month.to_string(),
            r.workday_total.to_string(),
            r.workday_days.to_string(),
            r.weekend_total.to_string(),
            r.weekend_days.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_volumes<R: Read>(source: R) -> Result<VolumeSummary, ProfileError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(source);
    let mut rows = Vec::new();
    for row in reader.deserialize::<VolumeRow>() {
        rows.push(row?);
    }
    rows.sort();
    Ok(VolumeSummary { rows })
}
