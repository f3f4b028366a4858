use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::calendar::Season;
use crate::cluster::ClusterModel;
use crate::ingest::{CounterId, CounterMeta};
use crate::meta::OutputMeta;
use crate::profile::WeeklyShare;
use crate::scalar::Scalar;
use crate::scoring::{tag_share, SeasonalScoreCard};

/// Marker size range for the weekly layer, in share units.
pub const WEEK_SIZE_MIN: f64 = 0.5;
pub const WEEK_SIZE_MAX: f64 = 0.7;

pub type Properties = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapLayer {
    WeekTag,
    SeasonShare,
    ClusterLabel,
}

impl fmt::Display for MapLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapLayer::WeekTag => "weektag",
            MapLayer::SeasonShare => "season",
            MapLayer::ClusterLabel => "cluster",
        })
    }
}

impl FromStr for MapLayer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weektag" | "week" => Ok(MapLayer::WeekTag),
            "season" | "seasonshare" => Ok(MapLayer::SeasonShare),
            "cluster" | "clusterlabel" => Ok(MapLayer::ClusterLabel),
            other => Err(format!("unknown map layer {other:?}")),
        }
    }
}

fn num(v: f64) -> Value {
    json!((v * 1e6).round() / 1e6)
}

/// Tag, share and clamped marker size from pooled weekly shares.
pub fn week_tag_properties<T: Scalar>(
    shares: &BTreeMap<CounterId, WeeklyShare<T>>,
) -> BTreeMap<CounterId, Properties> {
    shares
        .iter()
        .map(|(id, &s)| {
            let (tag, share) = tag_share(s);
            let share = share.as_f64();
            let mut p = Properties::new();
            p.insert("tag".into(), json!(tag.as_str()));
            p.insert("share".into(), num(share));
            p.insert("weekend_share".into(), num(s.weekend.as_f64()));
            p.insert(
                "size".into(),
                num(share.clamp(WEEK_SIZE_MIN, WEEK_SIZE_MAX)),
            );
            (id.clone(), p)
        })
        .collect()
}

/// Season shares averaged over directions, with the largest deviation.
pub fn season_properties<T: Scalar>(
    cards: &[SeasonalScoreCard<T>],
) -> BTreeMap<CounterId, Properties> {
    let mut grouped: BTreeMap<&CounterId, Vec<&SeasonalScoreCard<T>>> = BTreeMap::new();
    for c in cards {
        grouped.entry(&c.counter_id).or_default().push(c);
    }
    grouped
        .into_iter()
        .map(|(id, cs)| {
            let n = cs.len() as f64;
            let avg =
                |f: &dyn Fn(&SeasonalScoreCard<T>) -> f64| cs.iter().map(|c| f(c)).sum::<f64>() / n;
            let mut p = Properties::new();
            let mut best = (Season::Spring, f64::NEG_INFINITY);
            for s in Season::ALL {
                let share = avg(&|c| c.share(s).as_f64());
                let dev = avg(&|c| c.deviation(s).as_f64());
                p.insert(s.as_str().into(), num(share));
                p.insert(format!("dev_{s}"), num(dev));
                if dev > best.1 {
                    best = (s, dev);
                }
            }
            p.insert("argmax_season".into(), json!(best.0.as_str()));
            p.insert("max_deviation".into(), num(best.1));
            (id.clone(), p)
        })
        .collect()
}

/// Majority cluster over a counter's rows, ties to the smaller label.
pub fn cluster_properties<T: Scalar>(model: &ClusterModel<T>) -> BTreeMap<CounterId, Properties> {
    let mut counts: BTreeMap<&CounterId, BTreeMap<usize, usize>> = BTreeMap::new();
    for (key, &label) in model.keys.iter().zip(&model.labels) {
        *counts
            .entry(&key.series.counter_id)
            .or_default()
            .entry(label)
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(id, by_label)| {
            let rows: usize = by_label.values().sum();
            let (label, n) = by_label.iter().fold(
                (0, 0),
                |best, (&l, &c)| if c > best.1 { (l, c) } else { best },
            );
            let mut p = Properties::new();
            p.insert("cluster".into(), json!(label));
            p.insert("method".into(), json!(model.method.to_string()));
            p.insert("rows".into(), json!(rows));
            p.insert("agreement".into(), num(n as f64 / rows as f64));
            (id.clone(), p)
        })
        .collect()
}

/// One point per counter with coordinates; the rest are skipped and returned.
pub fn feature_collection(
    layer: MapLayer,
    meta: &BTreeMap<CounterId, CounterMeta>,
    properties: &BTreeMap<CounterId, Properties>,
    output_meta: Option<&OutputMeta>,
) -> (Value, Vec<CounterId>) {
    let mut features = Vec::new();
    let mut skipped = Vec::new();
    for (id, props) in properties {
        let Some(m) = meta.get(id) else {
            skipped.push(id.clone());
            continue;
        };
        let mut p = Properties::new();
        p.insert("counter_id".into(), json!(id.as_str()));
        p.insert("road_name".into(), json!(m.road_name));
        p.insert("layer".into(), json!(layer.to_string()));
        p.extend(props.iter().map(|(k, v)| (k.clone(), v.clone())));
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": [m.longitude, m.latitude] },
            "properties": p,
        }));
    }
    if !skipped.is_empty() {
        log::warn!(
            "{} counters without coordinates left off the map",
            skipped.len()
        );
    }
    if features.is_empty() {
        log::warn!("map layer {layer} has no features");
    }
    let mut fc = json!({ "type": "FeatureCollection", "features": features });
    if let Some(om) = output_meta {
        fc["meta"] = serde_json::to_value(om).expect("meta serializes");
    }
    (fc, skipped)
}
