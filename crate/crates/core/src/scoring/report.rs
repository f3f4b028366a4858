//! CSV reports for scores, seasonal deviations, week tags and rankings.

use std::io::Write;

use super::{
    RankedCounter, ScoreCard, ScoreName, ScoringError, SeasonalRank, SeasonalScoreCard, WeekTag,
};
use crate::calendar::Season;
use crate::meta::OutputMeta;
use crate::scalar::Scalar;

pub const SCORE_HEADER: [&str; 10] = [
    "counter_id",
    "direction",
    "daytype",
    "score_a",
    "score_b",
    "score_c",
    "score_d",
    "score_e",
    "argmax_month",
    "argmax_hour",
];

fn fmt6<T: Scalar>(v: T) -> String {
    format!("{:.6}", v.as_f64())
}

fn writer<W: Write>(
    meta: Option<&OutputMeta>,
    mut sink: W,
) -> Result<csv::Writer<W>, ScoringError> {
    if let Some(meta) = meta {
        sink.write_all(meta.comment_block("#").as_bytes())?;
    }
    Ok(csv::WriterBuilder::new().from_writer(sink))
}

/// One row per series. The argmax columns locate the score E extreme, the
/// cell used when ranking by the highest z-score per month.
pub fn write_scores<T: Scalar, W: Write>(
    cards: &[ScoreCard<T>],
    meta: Option<&OutputMeta>,
    sink: W,
) -> Result<(), ScoringError> {
    let mut w = writer(meta, sink)?;
    w.write_record(SCORE_HEADER)?;
    for c in cards {
        let mut row = vec![
            c.key.counter_id.to_string(),
            c.key.direction.to_string(),
            c.key.day_type.to_string(),
        ];
        row.extend(ScoreName::ALL.iter().map(|&n| fmt6(c.value(n))));
        row.push(c.score_e.at.period.to_string());
        row.push(c.score_e.at.hour.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_seasonal<T: Scalar, W: Write>(
    cards: &[SeasonalScoreCard<T>],
    meta: Option<&OutputMeta>,
    sink: W,
) -> Result<(), ScoringError> {
    let mut w = writer(meta, sink)?;
    let mut header = vec!["counter_id".to_string(), "direction".to_string()];
    header.extend(Season::ALL.iter().map(|s| s.to_string()));
    header.extend(Season::ALL.iter().map(|s| format!("dev_{s}")));
    header.push("max_deviation".into());
    header.push("argmax_season".into());
    w.write_record(&header)?;
    for c in cards {
        let mut row = vec![c.counter_id.to_string(), c.direction.to_string()];
        row.extend(c.shares.iter().map(|&v| fmt6(v)));
        row.extend(c.deviations.iter().map(|&v| fmt6(v)));
        row.push(fmt6(c.max_deviation));
        row.push(c.argmax_season.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_week_tags<T: Scalar, W: Write>(
    tags: &[WeekTag<T>],
    meta: Option<&OutputMeta>,
    sink: W,
) -> Result<(), ScoringError> {
    let mut w = writer(meta, sink)?;
    w.write_record(["counter_id", "direction", "tag", "share"])?;
    for t in tags {
        w.write_record([
            t.counter_id.to_string(),
            t.direction.to_string(),
            t.tag.to_string(),
            fmt6(t.share),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format rankings: one block per score, then seasonal rankings.
pub fn write_rankings<T: Scalar, W: Write>(
    by_score: &[(ScoreName, Vec<RankedCounter<T>>)],
    seasonal: &[(String, Vec<SeasonalRank<T>>)],
    meta: Option<&OutputMeta>,
    sink: W,
) -> Result<(), ScoringError> {
    let mut w = writer(meta, sink)?;
    w.write_record([
        "ranking",
        "rank",
        "counter_id",
        "direction",
        "daytype",
        "value",
        "period",
        "hour",
    ])?;
    for (name, ranked) in by_score {
        for (i, r) in ranked.iter().enumerate() {
            w.write_record([
                name.to_string(),
                (i + 1).to_string(),
                r.counter_id.to_string(),
                r.key.direction.to_string(),
                r.key.day_type.to_string(),
                fmt6(r.score),
                r.at.period.to_string(),
                r.at.hour.to_string(),
            ])?;
        }
    }
    for (name, ranked) in seasonal {
        for (i, r) in ranked.iter().enumerate() {
            w.write_record([
                name.clone(),
                (i + 1).to_string(),
                r.counter_id.to_string(),
                r.direction.to_string(),
                String::new(),
                fmt6(r.deviation),
                r.season.to_string(),
                String::new(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
