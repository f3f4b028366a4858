mod common;

use chrono::NaiveDate;
use counterscope_core::calendar::{DayType, Season};
use counterscope_core::cluster::{
    kmeans_model, ClusterError, FeatureMatrix, FeatureScale, KChoice,
};
use counterscope_core::ingest::{CounterId, Direction};
use counterscope_core::profile::{Period, SeriesKey, HOURS};
use counterscope_core::render::{plot_series, PlotOptions};
use counterscope_core::scoring::{rank, seasonal_score_from_volumes, ScoreName};
use counterscope_core::synth::{
    manifest_check, Archetype, CounterSpec, EventKind, PlantedEvent, ScenarioSpec,
};

fn corpus(seed: u64, years: &[i32], archetypes: &[Archetype]) -> ScenarioSpec {
    archetypes.iter().enumerate().fold(
        ScenarioSpec::new(seed, years.iter().copied()),
        |s, (i, &a)| s.counter(CounterSpec::new(format!("T{:02}", i + 1), a)),
    )
}

#[test]
fn ten_counter_corpus_gives_two_directions_each() {
    let spec = corpus(3, &[2016], &[Archetype::Commuter; 10]).noise(0.1);
    let run = common::run(&spec);
    let keys: std::collections::BTreeSet<(CounterId, Direction)> = run
        .profiles
        .series
        .keys()
        .map(|k| (k.counter_id.clone(), k.direction))
        .collect();
    assert_eq!(keys.len(), 20);
    assert_eq!(run.profiles.len(), 40);
}

#[test]
fn commuter_workday_peaks_morning_and_afternoon() {
    let run = common::run(&corpus(4, &[2016], &[Archetype::Commuter]).noise(0.1));
    for direction in Direction::BOTH {
        let key = SeriesKey::new("T01", direction, DayType::Workday);
        for p in run.profiles.get(&key).unwrap() {
            let v = &p.values;
            let peak =
                |range: std::ops::RangeInclusive<usize>| range.map(|h| v[h]).fold(0.0, f64::max);
            let trough = v[10..=12].iter().copied().fold(f64::MAX, f64::min);
            assert!((6..=8).contains(&p.argmax_hour()) || (14..=16).contains(&p.argmax_hour()));
            assert!(
                peak(6..=8) > 2.0 * trough && peak(14..=16) > 2.0 * trough,
                "{:?}",
                p.key
            );
        }
    }
}

#[test]
fn accident_spike_is_trimmed_away() {
    let base = corpus(
        5,
        &[2015, 2016, 2017],
        &[Archetype::Commuter, Archetype::Flat],
    );
    let spiked = base.clone().event(PlantedEvent {
        counter_id: CounterId::new("T01"),
        kind: EventKind::AccidentDay,
        start: NaiveDate::from_ymd_opt(2016, 5, 11).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 5, 11).unwrap(),
        hour_start: 0,
        hour_end: 23,
        magnitude: 10.0,
        direction: None,
    });
    let (a, b) = (common::run(&base), common::run(&spiked));
    assert_ne!(a.data.records, b.data.records);
    assert_eq!(a.profiles, b.profiles);
}

#[test]
fn noiseless_flat_counter_scores_zero() {
    let run = common::run(&corpus(6, &[2016], &[Archetype::Flat, Archetype::Flat]));
    for card in &run.cards {
        for name in ScoreName::ALL {
            assert_eq!(card.value(name), 0.0, "{} {}", card.key, name);
        }
    }
}

#[test]
fn noiseless_winter_resort_peaks_in_winter() {
    let run = common::run(&corpus(
        7,
        &[2016],
        &[
            Archetype::WinterResort,
            Archetype::Commuter,
            Archetype::Flat,
        ],
    ));
    let cards = seasonal_score_from_volumes::<f64>(&run.volumes);
    for c in cards.iter().filter(|c| c.counter_id.as_str() == "T01") {
        assert_eq!(c.argmax_season, Season::Winter);
    }
}

#[test]
fn winter_resort_february_has_afternoon_peaks() {
    let run = common::run(&corpus(8, &[2016], &[Archetype::WinterResort]).noise(0.1));
    let key = SeriesKey::new("T01", Direction::Dir2, DayType::Weekend);
    let opts = PlotOptions {
        baseline: true,
        emphasize: Some(Period::Month(2)),
    };
    let data = plot_series(&run.profiles, &key, &opts).unwrap();
    assert_eq!(data.lines.len(), 12);
    let feb = data
        .lines
        .iter()
        .find(|l| l.period == Period::Month(2))
        .unwrap();
    let v = &feb.values;
    let local_max = |h: usize| v[h] > v[h - 1] && v[h] > v[h + 1];
    let peaks: Vec<usize> = (1..HOURS - 1)
        .filter(|&h| local_max(h) && v[h] > 0.5 * v[16])
        .collect();
    assert_eq!(peaks, vec![13, 16]);
}

#[test]
fn flat_only_corpus_ranks_everything_at_zero() {
    let run = common::run(&corpus(9, &[2016], &[Archetype::Flat; 4]));
    for name in ScoreName::ALL {
        let top = rank(&run.cards, name, 10).unwrap();
        assert_eq!(top.len(), 4);
        assert!(top.iter().all(|r| r.score == 0.0));
        let ids: Vec<&str> = top.iter().map(|r| r.counter_id.as_str()).collect();
        assert_eq!(ids, ["T01", "T02", "T03", "T04"]);
    }
}

#[test]
fn k_of_one_is_rejected_on_kmeans_path() {
    let run = common::run(&corpus(10, &[2016], &[Archetype::Commuter, Archetype::Flat]).noise(0.1));
    let x =
        FeatureMatrix::from_profiles(&run.profiles, Period::Month(5), FeatureScale::Raw).unwrap();
    let err = kmeans_model(&x, KChoice::Fixed(1), 42, 10).unwrap_err();
    assert!(matches!(err, ClusterError::TooFewClusters(1)));
    assert_eq!(err.to_string(), "k must be ≥ 2 for silhouette");
}

#[test]
fn festival_detection_scores_perfect_precision() {
    let spec = counterscope_core::synth::festival_scenario(42);
    let run = common::run(&spec);
    let top: Vec<CounterId> = rank(&run.cards, ScoreName::E, 10)
        .unwrap()
        .into_iter()
        .map(|r| r.counter_id)
        .collect();
    let pr = manifest_check(&run.truth, &top, 1).unwrap();
    assert_eq!((pr.hits, pr.precision, pr.recall), (1, 1.0, 1.0));
}
