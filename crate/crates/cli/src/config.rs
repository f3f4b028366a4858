//! Run configuration: defaults, then the `--config` file, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use counterscope_core::cluster::{
    ClusterMethod, FeatureScale, DEFAULT_K_RANGE, DEFAULT_MONTH, DEFAULT_WARD_K,
};
use counterscope_core::cluster::{DEFAULT_RESTARTS, DEFAULT_SEED};
use counterscope_core::ingest::{VehicleClass, VehicleClassFilter};
use counterscope_core::meta::OutputMeta;
use counterscope_core::profile::{AggregationMode, Period};
use counterscope_core::render::MapLayer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Keys accepted in the config file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub counts: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub holidays: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub classes: Option<Vec<String>>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub top_k: Option<usize>,
    pub method: Option<String>,
    pub month: Option<u8>,
    pub k: Option<usize>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub restarts: Option<usize>,
    pub scale: Option<String>,
    pub layer: Option<String>,
    pub preset: Option<String>,
    pub scenario: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            counts, meta, holidays, cache, out, classes, mode, seed, top_k, method, month, k,
            k_min, k_max, restarts, scale, layer, preset, scenario
        )
    }
}

/// Fully resolved settings. Paths are left out of the hash so that moving a
/// run to another directory does not change its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    #[serde(skip)]
    pub counts: Option<PathBuf>,
    #[serde(skip)]
    pub meta: Option<PathBuf>,
    #[serde(skip)]
    pub holidays: Option<PathBuf>,
    #[serde(skip)]
    pub cache: PathBuf,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub scenario: Option<PathBuf>,
    pub classes: Vec<VehicleClass>,
    pub mode: AggregationMode,
    pub seed: u64,
    pub top_k: usize,
    pub method: ClusterMethod,
    pub month: u8,
    pub k: Option<usize>,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub scale: FeatureScale,
    #[serde(serialize_with = "as_text")]
    pub layer: MapLayer,
    pub preset: Option<String>,
}

fn as_text<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn parse<T: std::str::FromStr>(key: &str, value: Option<String>, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match value {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|e| anyhow::anyhow!("invalid {key} {v:?}: {e}")),
    }
}

impl Settings {
    pub fn resolve(c: FileConfig) -> Result<Self> {
        let out = c.out.unwrap_or_else(|| PathBuf::from("."));
        let classes = match c.classes {
            None => VehicleClassFilter::default().classes().collect(),
            Some(names) => names
                .iter()
                .flat_map(|n| n.split(','))
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .map(|n| {
                    n.parse::<VehicleClass>()
                        .map_err(|e| anyhow::anyhow!("invalid class {n:?}: {e}"))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if classes.is_empty() {
            bail!("classes must name at least one vehicle class");
        }
        let method: ClusterMethod = parse("method", c.method, ClusterMethod::KMeans)?;
        let month = c.month.unwrap_or(DEFAULT_MONTH);
        if !(1..=12).contains(&month) {
            bail!("month must be in 1..=12, got {month}");
        }
        let (k_min, k_max) = (
            c.k_min.unwrap_or(*DEFAULT_K_RANGE.start()),
            c.k_max.unwrap_or(*DEFAULT_K_RANGE.end()),
        );
        if k_min > k_max {
            bail!("k_min {k_min} exceeds k_max {k_max}");
        }
        let top_k = c.top_k.unwrap_or(10);
        if top_k == 0 {
            bail!("top_k must be positive");
        }
        Ok(Settings {
            cache: c.cache.unwrap_or_else(|| out.join("profiles.csv")),
            counts: c.counts,
            meta: c.meta,
            holidays: c.holidays,
            scenario: c.scenario,
            out,
            classes,
            mode: parse("mode", c.mode, AggregationMode::Monthly)?,
            seed: c.seed.unwrap_or(DEFAULT_SEED),
            top_k,
            k: c.k.or(match method {
                ClusterMethod::WardSpearman => Some(DEFAULT_WARD_K),
                ClusterMethod::KMeans => None,
            }),
            method,
            month,
            k_min,
            k_max,
            restarts: c.restarts.unwrap_or(DEFAULT_RESTARTS).max(1),
            scale: parse("scale", c.scale, FeatureScale::Percent)?,
            layer: parse("layer", c.layer, MapLayer::WeekTag)?,
            preset: c.preset,
        })
    }

    /// Short SHA-256 of the resolved analysis parameters.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("settings serialize");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    pub fn output_meta(&self) -> OutputMeta {
        OutputMeta::new(self.seed, self.hash())
    }

    pub fn filter(&self) -> VehicleClassFilter {
        VehicleClassFilter::new(self.classes.iter().copied()).expect("non-empty by construction")
    }

    /// Clustering period for a cache built in `mode`.
    pub fn period(&self, mode: AggregationMode) -> Period {
        match mode {
            AggregationMode::Monthly => Period::Month(self.month),
            // day-of-week caches have no months; cluster on Wednesday
            AggregationMode::DayOfWeek => Period::Weekday(2),
        }
    }
}
