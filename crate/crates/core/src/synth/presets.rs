//! Ready-made scenarios used by the CLI and the end-to-end checks.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Archetype, CounterSpec, EventKind, PlantedEvent, ScenarioSpec, SynthError};
use crate::ingest::{CounterId, Direction};

pub const PRESET_NAMES: [&str; 5] = ["festival", "winter", "closure", "two-magnitude", "shapes"];

const NOISE: f64 = 0.1;

fn scale_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

fn id(i: usize) -> String {
    format!("C{:03}", i + 1)
}

/// Counters `C001..` with the given archetypes and scales drawn from `range`.
fn corpus(
    seed: u64,
    years: &[i32],
    archetypes: &[Archetype],
    range: std::ops::Range<f64>,
) -> ScenarioSpec {
    let mut rng = scale_rng(seed);
    let mut spec = ScenarioSpec::new(seed, years.iter().copied()).noise(NOISE);
    for (i, &a) in archetypes.iter().enumerate() {
        let scale = if a == Archetype::Flat {
            1.0
        } else {
            rng.random_range(range.clone())
        };
        spec = spec.counter(CounterSpec::new(id(i), a).scaled(scale));
    }
    spec
}

fn repeat(parts: &[(Archetype, usize)]) -> Vec<Archetype> {
    parts
        .iter()
        .flat_map(|&(a, n)| std::iter::repeat_n(a, n))
        .collect()
}

/// Saturday of the second full October weekend.
fn october_saturday(year: i32) -> NaiveDate {
    let mut d = NaiveDate::from_ymd_opt(year, 10, 8).expect("valid date");
    while d.weekday() != Weekday::Sat {
        d = d.succ_opt().expect("in range");
    }
    d
}

/// 50 counters over 2015-2017; the last one hosts a yearly October weekend
/// festival multiplying traffic by 8 (inbound 10-13h, outbound 14-17h).
pub fn festival_scenario(seed: u64) -> ScenarioSpec {
    let archetypes = repeat(&[
        (Archetype::Commuter, 40),
        (Archetype::SummerTourist, 5),
        (Archetype::WinterResort, 4),
        (Archetype::Commuter, 1),
    ]);
    let mut spec = corpus(seed, &[2015, 2016, 2017], &archetypes, 0.6..1.6);
    let planted = CounterId::new(id(49));
    for year in [2015, 2016, 2017] {
        let sat = october_saturday(year);
        let sun = sat.succ_opt().expect("in range");
        for (direction, (h0, h1)) in [(Direction::Dir1, (10, 13)), (Direction::Dir2, (14, 17))] {
            spec = spec.event(PlantedEvent {
                counter_id: planted.clone(),
                kind: EventKind::FestivalSpike,
                start: sat,
                end: sun,
                hour_start: h0,
                hour_end: h1,
                magnitude: 8.0,
                direction: Some(direction),
            });
        }
    }
    spec
}

/// 30 commuters, 19 flat counters and one winter resort (`C050`), one year.
pub fn winter_scenario(seed: u64) -> ScenarioSpec {
    let archetypes = repeat(&[
        (Archetype::Commuter, 30),
        (Archetype::Flat, 19),
        (Archetype::WinterResort, 1),
    ]);
    corpus(seed, &[2016], &archetypes, 0.6..1.6)
}

/// Mixed corpus where commuter `C050` is closed for most of March 2016.
pub fn closure_scenario(seed: u64) -> ScenarioSpec {
    let archetypes = repeat(&[
        (Archetype::Commuter, 30),
        (Archetype::Flat, 14),
        (Archetype::SummerTourist, 3),
        (Archetype::WinterResort, 2),
        (Archetype::Commuter, 1),
    ]);
    corpus(seed, &[2016], &archetypes, 0.6..1.6).event(PlantedEvent {
        counter_id: CounterId::new(id(49)),
        kind: EventKind::RoadClosure,
        start: NaiveDate::from_ymd_opt(2016, 3, 1).expect("valid date"),
        end: NaiveDate::from_ymd_opt(2016, 3, 28).expect("valid date"),
        hour_start: 0,
        hour_end: 23,
        magnitude: 0.0,
        direction: None,
    })
}

/// Flat counters in two magnitude classes, alternating: odd ids near 10x
/// the flat level, even ids near 1x.
pub fn two_magnitude_scenario(seed: u64) -> ScenarioSpec {
    let mut rng = scale_rng(seed);
    let mut spec = ScenarioSpec::new(seed, [2016]).noise(NOISE);
    for i in 0..40 {
        let scale = if i % 2 == 0 {
            rng.random_range(9.0..11.0)
        } else {
            rng.random_range(0.9..1.1)
        };
        spec = spec.counter(CounterSpec::new(id(i), Archetype::Flat).scaled(scale));
    }
    spec
}

/// 40 commuters: workday and weekend shapes differ, magnitudes vary.
pub fn shapes_scenario(seed: u64) -> ScenarioSpec {
    corpus(seed, &[2016], &[Archetype::Commuter; 40], 0.5..2.0)
}

pub fn preset(name: &str, seed: u64) -> Result<ScenarioSpec, SynthError> {
    match name {
        "festival" => Ok(festival_scenario(seed)),
        "winter" => Ok(winter_scenario(seed)),
        "closure" => Ok(closure_scenario(seed)),
        "two-magnitude" => Ok(two_magnitude_scenario(seed)),
        "shapes" => Ok(shapes_scenario(seed)),
        other => Err(SynthError::UnknownPreset(other.to_string())),
    }
}
