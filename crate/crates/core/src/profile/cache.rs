//! Profile cache CSV: `counter_id,direction,daytype,period,h00..h23`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{
    AggregationMode, HourlyProfile, Period, ProfileError, ProfileKey, ProfileSet, SeriesKey, HOURS,
};
use crate::calendar::DayType;
use crate::ingest::{CounterId, Direction};
use crate::meta::OutputMeta;
use crate::scalar::Scalar;

pub const PROFILE_HEADER_PREFIX: [&str; 4] = ["counter_id", "direction", "daytype", "period"];

fn header() -> Vec<String> {
    PROFILE_HEADER_PREFIX
        .iter()
        .map(|s| s.to_string())
        .chain((0..HOURS).map(|h| format!("h{h:02}")))
        .collect()
}

/// Writes one row per profile with six decimal places.
pub fn write_profiles<T: Scalar, W: Write>(
    set: &ProfileSet<T>,
    meta: Option<&OutputMeta>,
    mut sink: W,
) -> Result<(), ProfileError> {
    if let Some(meta) = meta {
        sink.write_all(meta.comment_block("#").as_bytes())?;
    }
    let mut writer = csv::WriterBuilder::new().from_writer(sink);
    writer.write_record(header())?;
    let mut row: Vec<String> = Vec::with_capacity(4 + HOURS);
    for p in set.profiles() {
        row.clear();
        row.push(p.key.series.counter_id.to_string());
        row.push(p.key.series.direction.to_string());
        row.push(p.key.series.day_type.to_string());
        row.push(p.key.period.to_string());
        row.extend(p.values.iter().map(|v| format!("{:.6}", v.as_f64())));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a profile cache, checking that every series carries all periods.
pub fn read_profiles<T: Scalar, R: Read>(source: R) -> Result<ProfileSet<T>, ProfileError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let expected = header();
    let mut mode: Option<AggregationMode> = None;
    let mut series: BTreeMap<SeriesKey, Vec<HourlyProfile<T>>> = BTreeMap::new();
    let mut first = true;
    let mut row = csv::StringRecord::new();
    while reader.read_record(&mut row)? {
        let line = row.position().map_or(0, |p| p.line());
        let bad = |reason: String| ProfileError::Cache { line, reason };
        if first {
            first = false;
            if row.iter().ne(expected.iter().map(String::as_str)) {
                return Err(bad("unexpected profile cache header".into()));
            }
            continue;
        }
        if row.len() != expected.len() {
            return Err(bad(format!(
                "expected {} fields, found {}",
                expected.len(),
                row.len()
            )));
        }
        let direction: Direction = row[1].parse().map_err(bad)?;
        let day_type: DayType = row[2]
            .parse()
            .map_err(|e: crate::calendar::CalendarError| bad(e.to_string()))?;
        let period: Period = row[3].parse().map_err(bad)?;
        match mode {
            None => mode = Some(period.mode()),
            Some(m) if m != period.mode() => {
                return Err(bad("cache mixes monthly and day-of-week periods".into()));
            }
            _ => {}
        }
        let mut values = [T::zero(); HOURS];
        for (h, v) in values.iter_mut().enumerate() {
            let text = &row[4 + h];
            let x: f64 = text
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid value {text:?} for hour {h}")))?;
            if !x.is_finite() || x < 0.0 {
                return Err(bad(format!(
                    "value {x} for hour {h} must be finite and non-negative"
                )));
            }
            *v = T::lit(x);
        }
        let skey = SeriesKey::new(CounterId::new(row[0].trim()), direction, day_type);
        series.entry(skey.clone()).or_default().push(HourlyProfile {
            key: ProfileKey {
                series: skey,
                period,
            },
            values,
        });
    }

    let mode = mode.unwrap_or(AggregationMode::Monthly);
    let expected_periods = mode.periods();
    for (key, profiles) in series.iter_mut() {
        profiles.sort_by_key(|p| p.key.period);
        let periods: Vec<Period> = profiles.iter().map(|p| p.key.period).collect();
        if periods != expected_periods {
            return Err(ProfileError::IncompleteSeries {
                counter_id: key.counter_id.to_string(),
                direction: key.direction.code(),
                day_type: key.day_type,
                found: periods.len(),
                expected: expected_periods.len(),
            });
        }
    }
    Ok(ProfileSet { mode, series })
}
