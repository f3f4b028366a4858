use std::io::Write;

use serde::Serialize;

use super::{ClusterError, ClusterMethod, ClusterModel, ClusterProfile, Dendrogram, KScore, Merge};
use crate::calendar::DayType;
use crate::ingest::{CounterId, Direction};
use crate::meta::OutputMeta;
use crate::profile::Period;
use crate::scalar::Scalar;

#[derive(Debug, Serialize)]
pub struct Assignment {
    pub counter_id: CounterId,
    pub direction: Direction,
    pub daytype: DayType,
    pub cluster: usize,
}

/// JSON layout of `cluster` output.
#[derive(Debug, Serialize)]
pub struct ClusterReport<'a, T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<&'a OutputMeta>,
    pub method: ClusterMethod,
    pub period: String,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wcss: Option<T>,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    pub k_table: &'a [KScore<T>],
    pub clusters: &'a [ClusterProfile<T>],
    pub assignments: Vec<Assignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merges: Option<&'a [Merge<T>]>,
}

impl<'a, T: Scalar> ClusterReport<'a, T> {
    pub fn new(model: &'a ClusterModel<T>, period: Period, meta: Option<&'a OutputMeta>) -> Self {
        Self {
            meta,
            method: model.method,
            period: period.to_string(),
            k: model.k,
            silhouette: model.silhouette,
            wcss: model.wcss,
            k_table: &model.k_table,
            clusters: &model.profiles,
            assignments: model
                .keys
                .iter()
                .zip(&model.labels)
                .map(|(key, &cluster)| Assignment {
                    counter_id: key.series.counter_id.clone(),
                    direction: key.series.direction,
                    daytype: key.series.day_type,
                    cluster,
                })
                .collect(),
            merges: model.dendrogram.as_ref().map(|d| d.merges.as_slice()),
        }
    }
}

pub fn write_cluster_json<T: Scalar, W: Write>(
    model: &ClusterModel<T>,
    period: Period,
    meta: Option<&OutputMeta>,
    mut sink: W,
) -> Result<(), ClusterError> {
    serde_json::to_writer_pretty(&mut sink, &ClusterReport::new(model, period, meta))?;
    sink.write_all(b"\n")?;
    Ok(())
}

fn csv_writer<W: Write>(
    meta: Option<&OutputMeta>,
    mut sink: W,
) -> Result<csv::Writer<W>, ClusterError> {
    if let Some(meta) = meta {
        sink.write_all(meta.comment_block("#").as_bytes())?;
    }
    Ok(csv::Writer::from_writer(sink))
}

/// Merge list: `step,left,right,height,size`.
pub fn write_dendrogram_csv<T: Scalar, W: Write>(
    tree: &Dendrogram<T>,
    meta: Option<&OutputMeta>,
    sink: W,
) -> Result<(), ClusterError> {
    let mut w = csv_writer(meta, sink)?;
    w.write_record(["step", "left", "right", "height", "size"])?;
    for (step, m) in tree.merges.iter().enumerate() {
        w.write_record([
            step.to_string(),
            m.left.to_string(),
            m.right.to_string(),
            format!("{:.9}", m.height.as_f64()),
            m.size.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_silhouette_csv<T: Scalar, W: Write>(
    table: &[KScore<T>],
    meta: Option<&OutputMeta>,
    sink: W,
) -> Result<(), ClusterError> {
    let mut w = csv_writer(meta, sink)?;
    w.write_record(["k", "silhouette", "wcss"])?;
    for row in table {
        w.write_record([
            row.k.to_string(),
            format!("{:.6}", row.silhouette.as_f64()),
            format!("{:.6}", row.wcss.as_f64()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
