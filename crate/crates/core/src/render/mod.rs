//! Text renderings: SVG line charts and GeoJSON point layers.

mod geojson;
mod svg;

use thiserror::Error;

pub use geojson::{
    cluster_properties, feature_collection, season_properties, week_tag_properties, MapLayer,
    Properties, WEEK_SIZE_MAX, WEEK_SIZE_MIN,
};
pub use svg::{plot_series, render_svg, PlotData, PlotLine, PlotOptions};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("unknown counter {0}")]
    UnknownCounter(String),
    #[error("counter {counter} has no {day_type} profiles for direction {direction}")]
    MissingSeries {
        counter: String,
        direction: u8,
        day_type: String,
    },
    #[error("period {0} is not in the profile set")]
    MissingPeriod(String),
    #[error(transparent)]
    Scoring(#[from] crate::scoring::ScoringError),
}
