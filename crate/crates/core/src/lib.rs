//! Traffic-counter analytics: hourly profiles from roadside counts,
//! interestingness scores, profile clustering and synthetic corpora with
//! planted ground truth.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision for callers that do not care.

pub mod calendar;
pub mod cluster;
pub mod ingest;
pub mod meta;
pub mod profile;
pub mod render;
pub mod scalar;
pub mod scoring;
pub mod synth;

pub use scalar::Scalar;

pub type HourlyProfileF64 = profile::HourlyProfile<f64>;
pub type ProfileSetF64 = profile::ProfileSet<f64>;
pub type ScoreCardF64 = scoring::ScoreCard<f64>;
pub type SeasonalScoreCardF64 = scoring::SeasonalScoreCard<f64>;
pub type FeatureMatrixF64 = cluster::FeatureMatrix<f64>;
pub type ClusterModelF64 = cluster::ClusterModel<f64>;
pub type DendrogramF64 = cluster::Dendrogram<f64>;

pub type HourlyProfileF32 = profile::HourlyProfile<f32>;
pub type ProfileSetF32 = profile::ProfileSet<f32>;
pub type ScoreCardF32 = scoring::ScoreCard<f32>;
pub type SeasonalScoreCardF32 = scoring::SeasonalScoreCard<f32>;
pub type FeatureMatrixF32 = cluster::FeatureMatrix<f32>;
pub type ClusterModelF32 = cluster::ClusterModel<f32>;
pub type DendrogramF32 = cluster::Dendrogram<f32>;
