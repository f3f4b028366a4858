use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use counterscope_core::calendar::{DayType, HolidayCalendar, Season};
use counterscope_core::cluster::{
    kmeans_model, ward_model, write_cluster_json, write_dendrogram_csv, write_silhouette_csv,
    ClusterError, ClusterMethod, ClusterModel, FeatureMatrix, KChoice,
};
use counterscope_core::ingest::{
    parse_counts, parse_meta, qc_filter_with_report, write_counts, write_meta, CounterId,
    CounterMeta, Direction,
};
use counterscope_core::meta::OutputMeta;
use counterscope_core::profile::{
    build_profiles, read_profiles, read_volumes, write_profiles, write_volumes, Period, ProfileSet,
    SeriesKey, VolumeSummary,
};
use counterscope_core::render::{
    cluster_properties, feature_collection, plot_series, render_svg, season_properties,
    week_tag_properties, MapLayer, PlotOptions, RenderError,
};
use counterscope_core::scoring::{
    rank, rank_seasonal, score_profile_set, seasonal_score_from_volumes, week_tag, write_rankings,
    write_scores, write_seasonal, write_week_tags, ScoreName, SeasonalRankBy,
};
use counterscope_core::synth::{generate, preset, synthetic_meta, ScenarioSpec, SynthError};

use crate::config::Settings;

/// Exit status 1 for bad requests, 2 for bad or unusable data.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) => e,
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn data(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn data(self) -> Outcome<T> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}

fn usage_error<T>(msg: String) -> Outcome<T> {
    Err(Failure::Usage(anyhow!(msg)))
}

fn existing(path: Option<&Path>, what: &str) -> Outcome<PathBuf> {
    let Some(path) = path else {
        return usage_error(format!("no {what} file given"));
    };
    if !path.is_file() {
        return usage_error(format!("{what} file {} does not exist", path.display()));
    }
    Ok(path.to_path_buf())
}

fn open(path: &Path) -> Outcome<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .data()
}

/// Renders into memory, then writes the file in one go.
fn emit<E: Into<anyhow::Error>>(
    path: &Path,
    render: impl FnOnce(&mut Vec<u8>) -> Result<(), E>,
) -> Outcome {
    let mut buf = Vec::new();
    render(&mut buf)
        .map_err(Into::into)
        .with_context(|| format!("cannot render {}", path.display()))
        .data()?;
    std::fs::write(path, buf)
        .with_context(|| format!("cannot write {}", path.display()))
        .data()?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn prepare_out(settings: &Settings) -> Outcome {
    std::fs::create_dir_all(&settings.out)
        .with_context(|| format!("cannot create {}", settings.out.display()))
        .data()
}

fn holidays(settings: &Settings) -> Outcome<HolidayCalendar> {
    match &settings.holidays {
        None => Ok(HolidayCalendar::slovenia_2015_2017()),
        Some(p) => {
            let p = existing(Some(p), "holiday")?;
            HolidayCalendar::from_path(&p)
                .with_context(|| p.display().to_string())
                .data()
        }
    }
}

fn volumes_path(settings: &Settings) -> PathBuf {
    settings.cache.with_file_name("volumes.csv")
}

fn load_cache(settings: &Settings) -> Outcome<ProfileSet<f64>> {
    let path = existing(Some(&settings.cache), "profile cache")?;
    read_profiles(open(&path)?)
        .with_context(|| path.display().to_string())
        .data()
}

fn load_volumes(settings: &Settings) -> Outcome<VolumeSummary> {
    let path = existing(Some(&volumes_path(settings)), "volume summary")?;
    read_volumes(open(&path)?)
        .with_context(|| path.display().to_string())
        .data()
}

fn load_meta(settings: &Settings) -> Outcome<BTreeMap<CounterId, CounterMeta>> {
    let path = settings
        .meta
        .clone()
        .unwrap_or_else(|| settings.out.join("meta.csv"));
    let path = existing(Some(&path), "metadata")?;
    parse_meta(open(&path)?)
        .with_context(|| path.display().to_string())
        .data()
}

fn comment(meta: &OutputMeta, buf: &mut Vec<u8>) -> std::io::Result<()> {
    buf.write_all(meta.comment_block("#").as_bytes())
}

pub fn ingest(settings: &Settings) -> Outcome {
    let counts = existing(settings.counts.as_deref(), "counts")?;
    let calendar = holidays(settings)?;
    let meta = settings
        .meta
        .as_deref()
        .map(|p| existing(Some(p), "metadata"))
        .transpose()?;
    prepare_out(settings)?;

    let records = parse_counts(open(&counts)?, &settings.filter())
        .with_context(|| counts.display().to_string())
        .data()?;
    let (data, report) = qc_filter_with_report(records);
    let meta = match meta {
        Some(path) => Some(
            parse_meta(open(&path)?)
                .with_context(|| path.display().to_string())
                .data()?,
        ),
        None => None,
    };
    log::info!("{} in, {} kept", report.counters_in, report.kept.len());

    let om = settings.output_meta();
    emit(&settings.out.join("qc_log.csv"), |buf| {
        comment(&om, buf)?;
        report.write_csv(buf).map_err(anyhow::Error::from)
    })?;
    if report.kept.is_empty() {
        return Err(Failure::Data(anyhow!("no counter passed quality control")));
    }

    let profiles = build_profiles::<f64>(&data, &calendar, settings.mode);
    let volumes = VolumeSummary::from_dataset(&data, &calendar);
    if let Some(dir) = settings
        .cache
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .data()?;
    }
    emit(&settings.cache, |buf| {
        write_profiles(&profiles, Some(&om), buf)
    })?;
    emit(&volumes_path(settings), |buf| {
        write_volumes(&volumes, Some(&om), buf)
    })?;
    if let Some(all) = meta {
        let kept = data.counter_ids();
        emit(&settings.out.join("meta.csv"), |buf| {
            comment(&om, buf)?;
            write_meta(all.values().filter(|m| kept.contains(&m.counter_id)), buf)
                .map_err(anyhow::Error::from)
        })?;
    }
    log::info!(
        "{} profile series for {} counters",
        profiles.series.len(),
        report.kept.len()
    );
    Ok(())
}

pub fn score(settings: &Settings) -> Outcome {
    let profiles = load_cache(settings)?;
    let volumes = load_volumes(settings)?;
    prepare_out(settings)?;
    let om = settings.output_meta();
    let k = settings.top_k;

    let cards = score_profile_set(&profiles).data()?;
    let seasonal = seasonal_score_from_volumes::<f64>(&volumes);
    let tags = week_tag(&volumes.weekly_shares::<f64>());

    let by_score = ScoreName::ALL
        .iter()
        .map(|&n| rank(&cards, n, k).map(|r| (n, r)))
        .collect::<Result<Vec<_>, _>>()
        .usage()?;
    let mut by_season = vec![(
        "max_deviation".to_string(),
        rank_seasonal(&seasonal, SeasonalRankBy::MaxDeviation, k).usage()?,
    )];
    for s in Season::ALL {
        by_season.push((
            s.to_string(),
            rank_seasonal(&seasonal, SeasonalRankBy::Season(s), k).usage()?,
        ));
    }

    emit(&settings.out.join("scores.csv"), |buf| {
        write_scores(&cards, Some(&om), buf)
    })?;
    emit(&settings.out.join("seasonal.csv"), |buf| {
        write_seasonal(&seasonal, Some(&om), buf)
    })?;
    emit(&settings.out.join("weektags.csv"), |buf| {
        write_week_tags(&tags, Some(&om), buf)
    })?;
    emit(&settings.out.join("rankings.csv"), |buf| {
        write_rankings(&by_score, &by_season, Some(&om), buf)
    })?;
    Ok(())
}

fn cluster_error(e: ClusterError) -> Failure {
    match e {
        ClusterError::TooFewClusters(_) | ClusterError::InvalidK { .. } => Failure::Usage(e.into()),
        _ => Failure::Data(e.into()),
    }
}

fn fit(settings: &Settings, profiles: &ProfileSet<f64>) -> Outcome<(ClusterModel<f64>, Period)> {
    let period = settings.period(profiles.mode);
    let x =
        FeatureMatrix::from_profiles(profiles, period, settings.scale).map_err(cluster_error)?;
    let model = match settings.method {
        ClusterMethod::KMeans => {
            let choice = match settings.k {
                Some(k) => KChoice::Fixed(k),
                None => KChoice::Range(settings.k_min..=settings.k_max),
            };
            kmeans_model(&x, choice, settings.seed, settings.restarts)
        }
        ClusterMethod::WardSpearman => ward_model(&x, settings.k.expect("ward k has a default")),
    }
    .map_err(cluster_error)?;
    Ok((model, period))
}

pub fn cluster(settings: &Settings) -> Outcome {
    let profiles = load_cache(settings)?;
    prepare_out(settings)?;
    let (model, period) = fit(settings, &profiles)?;
    let om = settings.output_meta();
    log::info!("{} rows in {} clusters", model.labels.len(), model.k);

    let json = settings
        .out
        .join(format!("cluster_{}.json", settings.method));
    emit(&json, |buf| {
        write_cluster_json(&model, period, Some(&om), buf)
    })?;
    if let Some(tree) = &model.dendrogram {
        emit(&settings.out.join("dendrogram.csv"), |buf| {
            write_dendrogram_csv(tree, Some(&om), buf)
        })?;
    }
    if !model.k_table.is_empty() {
        emit(&settings.out.join("silhouette.csv"), |buf| {
            write_silhouette_csv(&model.k_table, Some(&om), buf)
        })?;
    }
    Ok(())
}

pub struct PlotRequest {
    pub counter: String,
    pub direction: Direction,
    pub day_type: DayType,
    pub baseline: bool,
    pub emphasize: Option<Period>,
    pub output: Option<PathBuf>,
}

pub fn plot(settings: &Settings, req: &PlotRequest) -> Outcome {
    let profiles = load_cache(settings)?;
    let key = SeriesKey::new(req.counter.as_str(), req.direction, req.day_type);
    let options = PlotOptions {
        baseline: req.baseline,
        emphasize: req.emphasize,
    };
    let data = plot_series(&profiles, &key, &options).map_err(|e| match e {
        RenderError::Scoring(_) => Failure::Data(e.into()),
        _ => Failure::Usage(e.into()),
    })?;
    let path = match &req.output {
        Some(p) => p.clone(),
        None => {
            prepare_out(settings)?;
            settings.out.join(format!(
                "plot_{}_{}_{}.svg",
                req.counter,
                req.direction.code(),
                req.day_type
            ))
        }
    };
    let svg = render_svg(&data, Some(&settings.output_meta()));
    emit(&path, |buf| buf.write_all(svg.as_bytes()))
}

pub fn map(settings: &Settings) -> Outcome {
    let meta = load_meta(settings)?;
    let props = match settings.layer {
        MapLayer::WeekTag => {
            week_tag_properties(&load_volumes(settings)?.weekly_shares_pooled::<f64>())
        }
        MapLayer::SeasonShare => season_properties(&seasonal_score_from_volumes::<f64>(
            &load_volumes(settings)?,
        )),
        MapLayer::ClusterLabel => cluster_properties(&fit(settings, &load_cache(settings)?)?.0),
    };
    prepare_out(settings)?;
    let (fc, skipped) =
        feature_collection(settings.layer, &meta, &props, Some(&settings.output_meta()));
    for id in &skipped {
        log::warn!("counter {id} has no coordinates");
    }
    let path = settings.out.join(format!("map_{}.geojson", settings.layer));
    emit(&path, |buf| {
        serde_json::to_writer_pretty(&mut *buf, &fc)?;
        buf.push(b'\n');
        Ok::<_, anyhow::Error>(())
    })
}

fn scenario(settings: &Settings) -> Outcome<ScenarioSpec> {
    match (&settings.preset, &settings.scenario) {
        (Some(_), Some(_)) => {
            usage_error("give either a preset or a scenario file, not both".into())
        }
        (None, None) => usage_error("synth needs a preset or a scenario file".into()),
        (Some(name), None) => preset(name, settings.seed).map_err(|e| match e {
            SynthError::UnknownPreset(_) => Failure::Usage(e.into()),
            _ => Failure::Data(e.into()),
        }),
        (None, Some(path)) => {
            let path = existing(Some(path), "scenario")?;
            let spec: ScenarioSpec = serde_json::from_reader(open(&path)?)
                .with_context(|| path.display().to_string())
                .data()?;
            Ok(spec)
        }
    }
}

pub fn synth(settings: &Settings) -> Outcome {
    let spec = scenario(settings)?;
    prepare_out(settings)?;
    let (records, mut truth) = generate(&spec).data()?;
    // a scenario file carries its own seed
    let om = OutputMeta::new(spec.seed, settings.hash());
    truth.meta = Some(om.clone());
    log::info!(
        "{} counters, {} hourly records",
        spec.counters.len(),
        records.len()
    );

    let meta = synthetic_meta(&spec);
    emit(&settings.out.join("counts.csv"), |buf| {
        comment(&om, buf)?;
        write_counts(&records, buf).map_err(anyhow::Error::from)
    })?;
    emit(&settings.out.join("meta.csv"), |buf| {
        comment(&om, buf)?;
        write_meta(meta.values(), buf).map_err(anyhow::Error::from)
    })?;
    emit(&settings.out.join("truth.json"), |buf| {
        truth.write_json(buf)
    })
}
