//! Small fixed corpus and the text outputs compared against `tests/golden/`.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the stored files.

use std::path::PathBuf;

use counterscope_core::calendar::DayType;
use counterscope_core::cluster::{
    kmeans_model, ward_model, write_cluster_json, FeatureMatrix, FeatureScale, KChoice,
};
use counterscope_core::ingest::{qc_filter, Direction};
use counterscope_core::meta::OutputMeta;
use counterscope_core::profile::{
    build_profiles, write_profiles, AggregationMode, Period, SeriesKey, VolumeSummary,
};
use counterscope_core::render::{
    feature_collection, plot_series, render_svg, week_tag_properties, MapLayer, PlotOptions,
};
use counterscope_core::scoring::{score_profile_set, write_scores};
use counterscope_core::synth::{generate, synthetic_meta, Archetype, CounterSpec, ScenarioSpec};

pub const SEED: u64 = 7;

pub fn fixture() -> ScenarioSpec {
    ScenarioSpec::new(SEED, [2016])
        .noise(0.1)
        .counter(CounterSpec::new("G1", Archetype::Commuter))
        .counter(CounterSpec::new("G2", Archetype::Commuter).scaled(1.5))
        .counter(CounterSpec::new("G3", Archetype::SummerTourist))
        .counter(CounterSpec::new("G4", Archetype::WinterResort))
        .counter(CounterSpec::new("G5", Archetype::BorderWeekend))
        .counter(CounterSpec::new("G6", Archetype::Flat))
}

/// (file name, rendered text) for every golden output.
pub fn outputs() -> Vec<(&'static str, String)> {
    let spec = fixture();
    let meta = OutputMeta::new(SEED, "golden");
    let (records, _) = generate(&spec).expect("fixture is valid");
    let data = qc_filter(records);
    let profiles = build_profiles::<f64>(&data, &spec.holidays, AggregationMode::Monthly);
    let cards = score_profile_set(&profiles).expect("scores");

    let mut cache = Vec::new();
    write_profiles(&profiles, Some(&meta), &mut cache).unwrap();
    let mut scores = Vec::new();
    write_scores(&cards, Some(&meta), &mut scores).unwrap();

    let period = Period::Month(5);
    let pct = FeatureMatrix::from_profiles(&profiles, period, FeatureScale::Percent).unwrap();
    let mut ward = Vec::new();
    write_cluster_json(
        &ward_model(&pct, 2).unwrap(),
        period,
        Some(&meta),
        &mut ward,
    )
    .unwrap();
    let raw = FeatureMatrix::from_profiles(&profiles, period, FeatureScale::Raw).unwrap();
    let mut km = Vec::new();
    let model = kmeans_model(&raw, KChoice::Range(2..=4), SEED, 10).unwrap();
    write_cluster_json(&model, period, Some(&meta), &mut km).unwrap();

    let key = SeriesKey::new("G4", Direction::Dir2, DayType::Workday);
    let opts = PlotOptions {
        baseline: true,
        emphasize: Some(Period::Month(2)),
    };
    let svg = render_svg(&plot_series(&profiles, &key, &opts).unwrap(), Some(&meta));

    let volumes = VolumeSummary::from_dataset(&data, &spec.holidays);
    let props = week_tag_properties(&volumes.weekly_shares_pooled::<f64>());
    let (fc, _) = feature_collection(
        MapLayer::WeekTag,
        &synthetic_meta(&spec),
        &props,
        Some(&meta),
    );

    let text = |b: Vec<u8>| String::from_utf8(b).unwrap();
    vec![
        ("profiles.csv", text(cache)),
        ("scores.csv", text(scores)),
        ("cluster_ward.json", text(ward)),
        ("cluster_kmeans.json", text(km)),
        ("plot.svg", svg),
        (
            "map_weektag.geojson",
            serde_json::to_string_pretty(&fc).unwrap() + "\n",
        ),
    ]
}

pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Compares one output with its stored copy, or rewrites it under `UPDATE_GOLDEN`.
pub fn check(name: &str, actual: &str) -> Result<(), String> {
    let path = dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| {
        format!(
            "{}: {e} (run with UPDATE_GOLDEN=1 to create)",
            path.display()
        )
    })?;
    if expected == actual {
        return Ok(());
    }
    let line = expected
        .lines()
        .zip(actual.lines())
        .position(|(a, b)| a != b)
        .map_or_else(
            || expected.lines().count().min(actual.lines().count()),
            |i| i,
        );
    Err(format!(
        "{name} differs from golden copy at line {}",
        line + 1
    ))
}
