//! Hourly count ingestion, counter metadata and longitudinal quality control.
//!
//! Counts CSV layout:
//!
//! ```text
//! counter_id,direction,date,hour,classes
//! C001,1,2016-02-14,08,car=120;bus=4
//! ```
//!
//! Metadata CSV layout: `counter_id,lat,lon,road_name`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const COUNTS_HEADER: [&str; 5] = ["counter_id", "direction", "date", "hour", "classes"];
pub const META_HEADER: [&str; 4] = ["counter_id", "lat", "lon", "road_name"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{reason}, line {line}")]
    Malformed { line: u64, reason: String },
    #[error("unknown vehicle class {class:?}, line {line}")]
    UnknownClass { line: u64, class: String },
    #[error("duplicate observation for {counter_id} direction {direction} at {date} {hour:02}h, line {line}")]
    Duplicate {
        line: u64,
        counter_id: String,
        direction: u8,
        date: NaiveDate,
        hour: u8,
    },
    #[error("vehicle class filter must include at least one class")]
    EmptyFilter,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(line: u64, reason: impl Into<String>) -> IngestError {
    IngestError::Malformed {
        line,
        reason: reason.into(),
    }
}

/// Opaque counter identifier; cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CounterId(Arc<str>);

impl CounterId {
    pub fn new(id: impl AsRef<str>) -> Self {
        Self(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CounterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CounterId {
    fn from(value: &str) -> Self {
        Self::new(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "1")]
    Dir1,
    #[serde(rename = "2")]
    Dir2,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Dir1, Direction::Dir2];

    pub fn code(self) -> u8 {
        match self {
            Direction::Dir1 => 1,
            Direction::Dir2 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Direction::Dir1),
            2 => Some(Direction::Dir2),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .parse::<u8>()
            .ok()
            .and_then(Direction::from_code)
            .ok_or_else(|| format!("direction must be 1 or 2, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Car,
    Motorbike,
    Bus,
    Lorry,
    Truck,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 5] = [
        VehicleClass::Car,
        VehicleClass::Motorbike,
        VehicleClass::Bus,
        VehicleClass::Lorry,
        VehicleClass::Truck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::Car => "car",
            VehicleClass::Motorbike => "motorbike",
            VehicleClass::Bus => "bus",
            VehicleClass::Lorry => "lorry",
            VehicleClass::Truck => "truck",
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VehicleClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VehicleClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Per-class vehicle counts for one hour. Absent classes are distinct from zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ClassCounts([Option<u32>; VehicleClass::ALL.len()]);

impl ClassCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, class: VehicleClass, count: u32) -> Self {
        self.set(class, count);
        self
    }

    pub fn set(&mut self, class: VehicleClass, count: u32) {
        self.0[class as usize] = Some(count);
    }

    pub fn get(&self, class: VehicleClass) -> Option<u32> {
        self.0[class as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (VehicleClass, u32)> + '_ {
        VehicleClass::ALL
            .into_iter()
            .filter_map(|c| self.get(c).map(|n| (c, n)))
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().map(|&n| u64::from(n)).sum()
    }
}

/// One counter/direction/hour observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCountRecord {
    pub counter_id: CounterId,
    pub direction: Direction,
    pub date: NaiveDate,
    /// Hour of day in `0..=23`.
    pub hour: u8,
    pub class_counts: ClassCounts,
}

impl RawCountRecord {
    /// Vehicles per hour summed over the retained classes.
    pub fn count(&self) -> u64 {
        self.class_counts.total()
    }

    fn sort_key(&self) -> (&CounterId, Direction, NaiveDate, u8) {
        (&self.counter_id, self.direction, self.date, self.hour)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleClassFilter {
    included: BTreeSet<VehicleClass>,
}

impl VehicleClassFilter {
    pub fn new(classes: impl IntoIterator<Item = VehicleClass>) -> Result<Self, IngestError> {
        let included: BTreeSet<_> = classes.into_iter().collect();
        if included.is_empty() {
            return Err(IngestError::EmptyFilter);
        }
        Ok(Self { included })
    }

    /// Keeps every known class.
    pub fn all() -> Self {
        Self {
            included: VehicleClass::ALL.into_iter().collect(),
        }
    }

    pub fn includes(&self, class: VehicleClass) -> bool {
        self.included.contains(&class)
    }

    pub fn classes(&self) -> impl Iterator<Item = VehicleClass> + '_ {
        self.included.iter().copied()
    }
}

impl Default for VehicleClassFilter {
    /// Personal mobility only: cars and motorbikes.
    fn default() -> Self {
        Self {
            included: BTreeSet::from([VehicleClass::Car, VehicleClass::Motorbike]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterMeta {
    pub counter_id: CounterId,
    pub latitude: f64,
    pub longitude: f64,
    pub road_name: String,
}

/// Output of quality control.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleanDataset {
    /// Sorted by (counter, direction, date, hour).
    pub records: Vec<RawCountRecord>,
    pub meta: BTreeMap<CounterId, CounterMeta>,
    pub years_covered: BTreeSet<i32>,
}

impl CleanDataset {
    pub fn with_meta(mut self, meta: BTreeMap<CounterId, CounterMeta>) -> Self {
        self.meta = meta;
        self
    }

    pub fn counter_ids(&self) -> BTreeSet<CounterId> {
        self.records.iter().map(|r| r.counter_id.clone()).collect()
    }
}

fn header_matches(found: &csv::StringRecord, expected: &[&str]) -> bool {
    found.len() == expected.len() && found.iter().zip(expected).all(|(a, b)| a.trim() == *b)
}

fn parse_classes(
    field: &str,
    filter: &VehicleClassFilter,
    line: u64,
) -> Result<ClassCounts, IngestError> {
    let mut counts = ClassCounts::new();
    for pair in field.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| malformed(line, format!("class pair {pair:?} is not class=count")))?;
        let class: VehicleClass = name
            .trim()
            .parse()
            .map_err(|class| IngestError::UnknownClass { line, class })?;
        let n: u32 = value.trim().parse().map_err(|_| {
            malformed(
                line,
                format!("count {value:?} is not a non-negative integer"),
            )
        })?;
        if counts.get(class).is_some() {
            return Err(malformed(line, format!("class {class} listed twice")));
        }
        if filter.includes(class) {
            counts.set(class, n);
        }
    }
    Ok(counts)
}

/// Parses a counts CSV, dropping vehicle classes outside `filter`. Lines
/// starting with `#` are skipped.
pub fn parse_counts<R: Read>(
    source: R,
    filter: &VehicleClassFilter,
) -> Result<Vec<RawCountRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut interned: HashMap<String, CounterId> = HashMap::new();
    let mut seen: HashSet<(CounterId, Direction, NaiveDate, u8)> = HashSet::new();
    let mut out = Vec::new();
    let mut row = csv::StringRecord::new();
    let mut first = true;

    while reader.read_record(&mut row)? {
        let line = row.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if !header_matches(&row, &COUNTS_HEADER) {
                return Err(malformed(
                    line,
                    format!("expected header {}", COUNTS_HEADER.join(",")),
                ));
            }
            continue;
        }
        if row.len() != COUNTS_HEADER.len() {
            return Err(malformed(
                line,
                format!("expected 5 fields, found {}", row.len()),
            ));
        }
        let id_text = row[0].trim();
        if id_text.is_empty() {
            return Err(malformed(line, "empty counter_id"));
        }
        let counter_id = interned
            .entry(id_text.to_string())
            .or_insert_with(|| CounterId::new(id_text))
            .clone();
        let direction: Direction = row[1].parse().map_err(|e: String| malformed(line, e))?;
        let date = NaiveDate::parse_from_str(row[2].trim(), "%Y-%m-%d")
            .map_err(|_| malformed(line, format!("invalid date {:?}", &row[2])))?;
        let hour: u8 = row[3]
            .trim()
            .parse()
            .map_err(|_| malformed(line, format!("invalid hour {:?}", &row[3])))?;
        if hour > 23 {
            return Err(malformed(line, "hour out of range"));
        }
        let class_counts = parse_classes(&row[4], filter, line)?;
        if !seen.insert((counter_id.clone(), direction, date, hour)) {
            return Err(IngestError::Duplicate {
                line,
                counter_id: counter_id.to_string(),
                direction: direction.code(),
                date,
                hour,
            });
        }
        out.push(RawCountRecord {
            counter_id,
            direction,
            date,
            hour,
            class_counts,
        });
    }
    Ok(out)
}

/// Writes records in the counts CSV layout accepted by [`parse_counts`].
pub fn write_counts<W: Write>(records: &[RawCountRecord], sink: W) -> Result<(), IngestError> {
    let mut writer = csv::WriterBuilder::new().from_writer(sink);
    writer.write_record(COUNTS_HEADER)?;
    let mut classes = String::new();
    for r in records {
        classes.clear();
        for (i, (class, n)) in r.class_counts.iter().enumerate() {
            if i > 0 {
                classes.push(';');
            }
            classes.push_str(class.as_str());
            classes.push('=');
            classes.push_str(&n.to_string());
        }
        writer.write_record([
            r.counter_id.as_str(),
            &r.direction.code().to_string(),
            &r.date.format("%Y-%m-%d").to_string(),
            &format!("{:02}", r.hour),
            &classes,
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses counter metadata keyed by counter id.
pub fn parse_meta<R: Read>(source: R) -> Result<BTreeMap<CounterId, CounterMeta>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut out = BTreeMap::new();
    let mut row = csv::StringRecord::new();
    let mut first = true;
    while reader.read_record(&mut row)? {
        let line = row.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if !header_matches(&row, &META_HEADER) {
                return Err(malformed(
                    line,
                    format!("expected header {}", META_HEADER.join(",")),
                ));
            }
            continue;
        }
        if row.len() != META_HEADER.len() {
            return Err(malformed(
                line,
                format!("expected 4 fields, found {}", row.len()),
            ));
        }
        let coord = |idx: usize, name: &str, limit: f64| -> Result<f64, IngestError> {
            let v: f64 = row[idx]
                .trim()
                .parse()
                .map_err(|_| malformed(line, format!("invalid {name} {:?}", &row[idx])))?;
            if !v.is_finite() || v.abs() > limit {
                return Err(malformed(line, format!("{name} {v} out of range")));
            }
            Ok(v)
        };
        let latitude = coord(1, "latitude", 90.0)?;
        let longitude = coord(2, "longitude", 180.0)?;
        let counter_id = CounterId::new(row[0].trim());
        out.insert(
            counter_id.clone(),
            CounterMeta {
                counter_id,
                latitude,
                longitude,
                road_name: row[3].trim().to_string(),
            },
        );
    }
    Ok(out)
}

pub fn write_meta<'a, W: Write>(
    meta: impl IntoIterator<Item = &'a CounterMeta>,
    sink: W,
) -> Result<(), IngestError> {
    let mut writer = csv::WriterBuilder::new().from_writer(sink);
    writer.write_record(META_HEADER)?;
    for m in meta {
        writer.write_record([
            m.counter_id.as_str(),
            &format!("{:.6}", m.latitude),
            &format!("{:.6}", m.longitude),
            &m.road_name,
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Why a counter failed quality control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QcReason {
    /// No records at all for a calendar month of a covered year.
    MissingMonth {
        direction: Direction,
        year: i32,
        month: u32,
    },
    /// Every record of a calendar month is zero.
    FallOut {
        direction: Direction,
        year: i32,
        month: u32,
    },
}

impl fmt::Display for QcReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            QcReason::MissingMonth {
                direction,
                year,
                month,
            } => {
                write!(f, "missing month {year}-{month:02} (direction {direction})")
            }
            QcReason::FallOut {
                direction,
                year,
                month,
            } => {
                write!(f, "fall-out {year}-{month:02} (direction {direction})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QcReport {
    pub counters_in: usize,
    pub kept: Vec<CounterId>,
    pub removed: Vec<(CounterId, Vec<QcReason>)>,
}

impl QcReport {
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), IngestError> {
        let mut writer = csv::WriterBuilder::new().from_writer(sink);
        writer.write_record(["counter_id", "status", "reason"])?;
        let mut rows: Vec<(&CounterId, &str, String)> = self
            .kept
            .iter()
            .map(|id| (id, "kept", String::new()))
            .collect();
        for (id, reasons) in &self.removed {
            let text = reasons
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            rows.push((id, "removed", text));
        }
        rows.sort_by(|a, b| a.0.cmp(b.0));
        for (id, status, reason) in rows {
            writer.write_record([id.as_str(), status, &reason])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Month presence and non-zero flags, one bit per calendar month.
#[derive(Default, Clone, Copy)]
struct MonthFlags {
    present: u16,
    nonzero: u16,
}

/// Drops counters that miss a calendar month or have an all-zero month.
pub fn qc_filter(records: Vec<RawCountRecord>) -> CleanDataset {
    let (dataset, report) = qc_filter_with_report(records);
    log::info!(
        "quality control: {} counters in, {} kept",
        report.counters_in,
        report.kept.len()
    );
    for (id, reasons) in &report.removed {
        for reason in reasons {
            log::info!("quality control removed {id}: {reason}");
        }
    }
    dataset
}

/// [`qc_filter`] plus a per-counter account of the decision.
pub fn qc_filter_with_report(mut records: Vec<RawCountRecord>) -> (CleanDataset, QcReport) {
    let years: BTreeSet<i32> = records.iter().map(|r| r.date.year()).collect();
    let mut flags: BTreeMap<(CounterId, Direction), BTreeMap<i32, MonthFlags>> = BTreeMap::new();
    for r in &records {
        let entry = flags
            .entry((r.counter_id.clone(), r.direction))
            .or_default()
            .entry(r.date.year())
            .or_default();
        let bit = 1u16 << (r.date.month0());
        entry.present |= bit;
        if r.count() > 0 {
            entry.nonzero |= bit;
        }
    }

    let mut failures: BTreeMap<CounterId, Vec<QcReason>> = BTreeMap::new();
    let mut all_ids: BTreeSet<CounterId> = BTreeSet::new();
    for ((id, direction), per_year) in &flags {
        all_ids.insert(id.clone());
        let reasons = failures.entry(id.clone()).or_default();
        for &year in &years {
            let f = per_year.get(&year).copied().unwrap_or_default();
            for month in 1..=12u32 {
                let bit = 1u16 << (month - 1);
                if f.present & bit == 0 {
                    reasons.push(QcReason::MissingMonth {
                        direction: *direction,
                        year,
                        month,
                    });
                } else if f.nonzero & bit == 0 {
                    reasons.push(QcReason::FallOut {
                        direction: *direction,
                        year,
                        month,
                    });
                }
            }
        }
    }

    let mut report = QcReport {
        counters_in: all_ids.len(),
        ..QcReport::default()
    };
    let mut kept: BTreeSet<CounterId> = BTreeSet::new();
    for (id, reasons) in failures {
        if reasons.is_empty() {
            kept.insert(id.clone());
            report.kept.push(id);
        } else {
            report.removed.push((id, reasons));
        }
    }

    records.retain(|r| kept.contains(&r.counter_id));
    records.sort_unstable_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let years_covered = records.iter().map(|r| r.date.year()).collect();
    (
        CleanDataset {
            records,
            meta: BTreeMap::new(),
            years_covered,
        },
        report,
    )
}
