//! Synthetic counter corpora with known ground truth.
//!
//! Every counter follows one archetype shape, scaled per counter, with
//! multiplicative lognormal noise. Planted events rescale a date/hour window.

mod presets;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{classify_day, DayType, HolidayCalendar};
use crate::ingest::{ClassCounts, CounterId, CounterMeta, Direction, RawCountRecord, VehicleClass};
use crate::meta::OutputMeta;

pub use presets::{
    closure_scenario, festival_scenario, preset, shapes_scenario, two_magnitude_scenario,
    winter_scenario, PRESET_NAMES,
};

pub const COMMUTER_PEAK: f64 = 500.0;
pub const TOURIST_PEAK: f64 = 150.0;
pub const FLAT_LEVEL: f64 = 50.0;
/// Multiplier applied to the high season of the tourist archetypes.
pub const SEASON_BOOST: f64 = 3.0;
/// Relative amplitude of the annual cycle on every structured archetype.
pub const ANNUAL_AMPLITUDE: f64 = 0.15;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("scenario has no counters")]
    NoCounters,
    #[error("scenario covers no years")]
    NoYears,
    #[error("noise level must be finite and non-negative, got {0}")]
    BadNoise(f64),
    #[error("counter scale must be finite and positive for {0}")]
    BadScale(String),
    #[error("duplicate counter id {0}")]
    DuplicateCounter(String),
    #[error("event {index}: {reason}")]
    BadEvent { index: usize, reason: String },
    #[error("detection {0} is not a counter of this corpus")]
    UnknownDetection(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    /// Workday rush hours, inbound mornings and outbound afternoons.
    Commuter,
    /// June-August high season with late-morning and late-afternoon peaks.
    SummerTourist,
    /// December-February high season; inbound 8h, outbound 13h and 16h.
    WinterResort,
    /// Friday evening and Saturday morning out, Sunday evening back.
    BorderWeekend,
    /// Constant level.
    Flat,
}

impl Archetype {
    pub const ALL: [Archetype; 5] = [
        Archetype::Commuter,
        Archetype::SummerTourist,
        Archetype::WinterResort,
        Archetype::BorderWeekend,
        Archetype::Flat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::Commuter => "commuter",
            Archetype::SummerTourist => "summer_tourist",
            Archetype::WinterResort => "winter_resort",
            Archetype::BorderWeekend => "border_weekend",
            Archetype::Flat => "flat",
        }
    }

    /// Peak (or constant) vehicles per hour before scaling.
    pub fn magnitude(self) -> f64 {
        match self {
            Archetype::Commuter => COMMUTER_PEAK,
            Archetype::Flat => FLAT_LEVEL,
            _ => TOURIST_PEAK,
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Archetype {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown archetype {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterSpec {
    pub id: CounterId,
    pub archetype: Archetype,
    /// Multiplies the archetype magnitude.
    pub scale: f64,
}

impl CounterSpec {
    pub fn new(id: impl AsRef<str>, archetype: Archetype) -> Self {
        Self {
            id: CounterId::new(id),
            archetype,
            scale: 1.0,
        }
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FestivalSpike,
    AccidentDay,
    RoadClosure,
}

/// Multiplies traffic inside an inclusive date and hour window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEvent {
    pub counter_id: CounterId,
    pub kind: EventKind,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub hour_start: u8,
    pub hour_end: u8,
    /// Multiplier; zero for road closures.
    pub magnitude: f64,
    /// `None` affects both directions.
    pub direction: Option<Direction>,
}

impl PlantedEvent {
    fn covers(&self, direction: Direction, date: NaiveDate, hour: u8) -> bool {
        self.direction.is_none_or(|d| d == direction)
            && (self.start..=self.end).contains(&date)
            && (self.hour_start..=self.hour_end).contains(&hour)
    }

    fn validate(
        &self,
        index: usize,
        years: &BTreeSet<i32>,
        ids: &BTreeSet<&CounterId>,
    ) -> Result<(), SynthError> {
        let bad = |reason: String| SynthError::BadEvent { index, reason };
        if !ids.contains(&self.counter_id) {
            return Err(bad(format!("unknown counter {}", self.counter_id)));
        }
        if self.start > self.end {
            return Err(bad(format!(
                "date window {}..{} is reversed",
                self.start, self.end
            )));
        }
        if self.hour_start > self.hour_end || self.hour_end > 23 {
            return Err(bad(format!(
                "hour window {}..{} is invalid",
                self.hour_start, self.hour_end
            )));
        }
        if !years.contains(&self.start.year()) || !years.contains(&self.end.year()) {
            return Err(bad("date window lies outside the covered years".into()));
        }
        let ok = match self.kind {
            EventKind::RoadClosure => self.magnitude == 0.0,
            _ => self.magnitude.is_finite() && self.magnitude > 0.0,
        };
        if !ok {
            return Err(bad(format!(
                "magnitude {} is invalid for {:?}",
                self.magnitude, self.kind
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub years: BTreeSet<i32>,
    pub counters: Vec<CounterSpec>,
    pub events: Vec<PlantedEvent>,
    /// Sigma of the multiplicative lognormal noise.
    pub noise_level: f64,
    /// Holidays get weekend-shaped traffic.
    #[serde(skip, default = "HolidayCalendar::slovenia_2015_2017")]
    pub holidays: HolidayCalendar,
}

impl ScenarioSpec {
    pub fn new(seed: u64, years: impl IntoIterator<Item = i32>) -> Self {
        Self {
            seed,
            years: years.into_iter().collect(),
            counters: Vec::new(),
            events: Vec::new(),
            noise_level: 0.0,
            holidays: HolidayCalendar::slovenia_2015_2017(),
        }
    }

    pub fn counter(mut self, spec: CounterSpec) -> Self {
        self.counters.push(spec);
        self
    }

    pub fn event(mut self, event: PlantedEvent) -> Self {
        self.events.push(event);
        self
    }

    pub fn noise(mut self, sigma: f64) -> Self {
        self.noise_level = sigma;
        self
    }

    pub fn holidays(mut self, holidays: HolidayCalendar) -> Self {
        self.holidays = holidays;
        self
    }

    pub fn n_counters(&self) -> usize {
        self.counters.len()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.counters.is_empty() {
            return Err(SynthError::NoCounters);
        }
        if self.years.is_empty() {
            return Err(SynthError::NoYears);
        }
        if !self.noise_level.is_finite() || self.noise_level < 0.0 {
            return Err(SynthError::BadNoise(self.noise_level));
        }
        let mut ids = BTreeSet::new();
        for c in &self.counters {
            if !ids.insert(&c.id) {
                return Err(SynthError::DuplicateCounter(c.id.to_string()));
            }
            if !c.scale.is_finite() || c.scale <= 0.0 {
                return Err(SynthError::BadScale(c.id.to_string()));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            e.validate(i, &self.years, &ids)?;
        }
        Ok(())
    }
}

/// Constants the generator used, recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub commuter_peak: f64,
    pub tourist_peak: f64,
    pub flat_level: f64,
    pub season_boost: f64,
    pub annual_amplitude: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            commuter_peak: COMMUTER_PEAK,
            tourist_peak: TOURIST_PEAK,
            flat_level: FLAT_LEVEL,
            season_boost: SEASON_BOOST,
            annual_amplitude: ANNUAL_AMPLITUDE,
        }
    }
}

/// Ground-truth manifest written next to a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<OutputMeta>,
    pub seed: u64,
    pub years: Vec<i32>,
    pub noise_level: f64,
    pub counters: Vec<CounterSpec>,
    pub events: Vec<PlantedEvent>,
    pub constants: Constants,
}

impl Truth {
    /// Counters carrying at least one planted event.
    pub fn planted(&self) -> BTreeSet<CounterId> {
        self.events.iter().map(|e| e.counter_id.clone()).collect()
    }

    pub fn archetype_of(&self, id: &CounterId) -> Option<Archetype> {
        self.counters
            .iter()
            .find(|c| &c.id == id)
            .map(|c| c.archetype)
    }

    pub fn write_json<W: Write>(&self, mut sink: W) -> Result<(), SynthError> {
        serde_json::to_writer_pretty(&mut sink, self)?;
        sink.write_all(b"\n")?;
        Ok(())
    }
}

fn bump(hour: f64, centre: f64, width: f64) -> f64 {
    let z = (hour - centre) / width;
    (-0.5 * z * z).exp()
}

/// Noise-free vehicles per hour for one archetype at unit scale.
pub fn archetype_level(
    archetype: Archetype,
    direction: Direction,
    date: NaiveDate,
    day_type: DayType,
    hour: u8,
) -> f64 {
    let h = f64::from(hour);
    let month = date.month();
    let annual = 1.0 + ANNUAL_AMPLITUDE * (2.0 * PI * (f64::from(month) - 7.5) / 12.0).cos();
    let weekend = day_type == DayType::Weekend;
    let dir1 = direction == Direction::Dir1;
    let level = match archetype {
        Archetype::Flat => return FLAT_LEVEL,
        Archetype::Commuter => {
            let shape = match (weekend, dir1) {
                (false, true) => {
                    0.04 + bump(h, 7.0, 0.9) + 0.6 * bump(h, 15.0, 1.0) + 0.15 * bump(h, 11.5, 2.5)
                }
                (false, false) => {
                    0.04 + 0.6 * bump(h, 7.0, 0.9) + bump(h, 15.0, 1.0) + 0.15 * bump(h, 11.5, 2.5)
                }
                (true, true) => 0.04 + 0.35 * bump(h, 12.5, 3.0),
                (true, false) => 0.04 + 0.35 * bump(h, 13.5, 3.0),
            };
            COMMUTER_PEAK * shape
        }
        Archetype::SummerTourist => {
            let shape = if dir1 {
                0.05 + bump(h, 12.0, 1.5) + 0.7 * bump(h, 17.0, 1.5)
            } else {
                0.05 + 0.7 * bump(h, 12.0, 1.5) + bump(h, 17.0, 1.5)
            };
            let season = if (6..=8).contains(&month) {
                SEASON_BOOST
            } else {
                1.0
            };
            let wk = if weekend { 1.3 } else { 1.0 };
            TOURIST_PEAK * shape * season * wk
        }
        Archetype::WinterResort => {
            let shape = if dir1 {
                0.05 + bump(h, 8.0, 1.0)
            } else {
                0.05 + 0.8 * bump(h, 13.0, 1.0) + bump(h, 16.0, 1.0)
            };
            let season = if matches!(month, 12 | 1 | 2) {
                SEASON_BOOST
            } else {
                1.0
            };
            let wk = if weekend { 1.5 } else { 1.0 };
            TOURIST_PEAK * shape * season * wk
        }
        Archetype::BorderWeekend => {
            use chrono::Weekday::*;
            let surge = match (date.weekday(), dir1) {
                (Fri, true) if (17..=21).contains(&hour) => 1.0,
                (Sat, true) if (7..=10).contains(&hour) => 1.0,
                (Sun, false) if (16..=20).contains(&hour) => 1.0,
                _ => 0.0,
            };
            TOURIST_PEAK * (0.08 + 0.1 * bump(h, 13.0, 3.0) + surge)
        }
    };
    level * annual
}

/// Stream id for a counter: FNV-1a over its id, so output does not depend
/// on the order counters are listed or scheduled in.
fn counter_stream(id: &CounterId) -> u64 {
    id.as_str().bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub(crate) fn counter_rng(seed: u64, id: &CounterId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter_stream(id));
    rng
}

fn days_of(years: &BTreeSet<i32>) -> Vec<NaiveDate> {
    years
        .iter()
        .flat_map(|&y| {
            let first = NaiveDate::from_ymd_opt(y, 1, 1).expect("valid year");
            first.iter_days().take_while(move |d| d.year() == y)
        })
        .collect()
}

fn generate_counter(
    spec: &ScenarioSpec,
    counter: &CounterSpec,
    days: &[(NaiveDate, DayType)],
    noise: Option<&LogNormal<f64>>,
) -> Vec<RawCountRecord> {
    let mut rng = counter_rng(spec.seed, &counter.id);
    let events: Vec<&PlantedEvent> = spec
        .events
        .iter()
        .filter(|e| e.counter_id == counter.id)
        .collect();
    let mut out = Vec::with_capacity(2 * days.len() * 24);
    for direction in Direction::BOTH {
        for &(date, day_type) in days {
            for hour in 0..24u8 {
                let mut v = counter.scale
                    * archetype_level(counter.archetype, direction, date, day_type, hour);
                // always draw so that events never shift the noise sequence
                if let Some(dist) = noise {
                    v *= dist.sample(&mut rng);
                }
                for e in &events {
                    if e.covers(direction, date, hour) {
                        v *= e.magnitude;
                    }
                }
                out.push(RawCountRecord {
                    counter_id: counter.id.clone(),
                    direction,
                    date,
                    hour,
                    class_counts: ClassCounts::new()
                        .with(VehicleClass::Car, v.round().max(0.0) as u32),
                });
            }
        }
    }
    out
}

/// Hourly records for every counter, direction and day, plus the manifest.
pub fn generate(spec: &ScenarioSpec) -> Result<(Vec<RawCountRecord>, Truth), SynthError> {
    spec.validate()?;
    let noise = if spec.noise_level > 0.0 {
        let s = spec.noise_level;
        Some(LogNormal::new(-0.5 * s * s, s).map_err(|_| SynthError::BadNoise(s))?)
    } else {
        None
    };
    let days: Vec<(NaiveDate, DayType)> = days_of(&spec.years)
        .into_iter()
        .map(|d| (d, classify_day(d, &spec.holidays)))
        .collect();
    let per_counter: Vec<Vec<RawCountRecord>> = spec
        .counters
        .par_iter()
        .map(|c| generate_counter(spec, c, &days, noise.as_ref()))
        .collect();
    let records = per_counter.into_iter().flatten().collect();
    let truth = Truth {
        meta: None,
        seed: spec.seed,
        years: spec.years.iter().copied().collect(),
        noise_level: spec.noise_level,
        counters: spec.counters.clone(),
        events: spec.events.clone(),
        constants: Constants::default(),
    };
    Ok((records, truth))
}

/// Deterministic coordinates inside a Slovenia-sized box.
pub fn synthetic_meta(spec: &ScenarioSpec) -> BTreeMap<CounterId, CounterMeta> {
    spec.counters
        .iter()
        .map(|c| {
            let mut rng = counter_rng(spec.seed ^ 0x5eed_c0de, &c.id);
            let meta = CounterMeta {
                counter_id: c.id.clone(),
                latitude: (rng.random_range(45.45..46.85_f64) * 1e6).round() / 1e6,
                longitude: (rng.random_range(13.45..16.55_f64) * 1e6).round() / 1e6,
                road_name: format!("{} road {}", c.archetype, c.id),
            };
            (c.id.clone(), meta)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub k: usize,
    pub hits: usize,
    pub precision: f64,
    pub recall: f64,
}

/// Precision and recall at `k` of ranked detections against planted counters.
pub fn manifest_check(
    truth: &Truth,
    detections: &[CounterId],
    k: usize,
) -> Result<PrecisionRecall, SynthError> {
    let known: BTreeSet<&CounterId> = truth.counters.iter().map(|c| &c.id).collect();
    if let Some(bad) = detections.iter().find(|d| !known.contains(d)) {
        return Err(SynthError::UnknownDetection(bad.to_string()));
    }
    let planted = truth.planted();
    let mut seen = BTreeSet::new();
    let hits = detections
        .iter()
        .take(k)
        .filter(|d| seen.insert(*d) && planted.contains(*d))
        .count();
    Ok(PrecisionRecall {
        k,
        hits,
        precision: if k == 0 { 0.0 } else { hits as f64 / k as f64 },
        recall: if planted.is_empty() {
            0.0
        } else {
            hits as f64 / planted.len() as f64
        },
    })
}
