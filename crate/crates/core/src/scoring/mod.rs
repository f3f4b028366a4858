//! Interestingness scores over a counter's period-by-hour profile matrix.
//!
//! Every score compares a series' periods (months, or weekdays) against each
//! other or against the baseline, the per-hour mean of the four lowest
//! period values.

mod report;
mod seasonal;
mod week;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CounterId;
use crate::profile::{HourlyProfile, Period, ProfileSet, SeriesKey, HOURS};
use crate::scalar::{cmp_scalar, mean, sample_std, Scalar};

pub use report::{write_rankings, write_scores, write_seasonal, write_week_tags, SCORE_HEADER};
pub use seasonal::{
    rank_seasonal, seasonal_score, seasonal_score_from_volumes, SeasonalRank, SeasonalRankBy,
    SeasonalScoreCard,
};
pub use week::{tag_share, week_tag, WeekTag};

/// Number of lowest period values averaged into the baseline.
pub const BASELINE_LOWEST: usize = 4;
/// Floor on the baseline in the relative-deviation denominator, vehicles/hour.
pub const RELATIVE_EPSILON: f64 = 1.0;
/// Floor on the per-hour standard deviation in the adjusted z-score.
pub const STD_EPSILON: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("need at least {needed} periods, found {found}")]
    TooFewPeriods { needed: usize, found: usize },
    #[error("unknown score {0:?}; expected one of a, b, c, d, e")]
    UnknownScore(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Period-by-hour matrix: one row per month (or weekday).
pub type ProfileMatrix<T> = [[T; HOURS]];

/// Per-hour floor of "everyday" traffic for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineProfile<T> {
    pub key: SeriesKey,
    pub values: [T; HOURS],
}

/// Mean of the four smallest values.
pub fn baseline_at_hour<T: Scalar>(values: &[T]) -> Result<T, ScoringError> {
    if values.len() < BASELINE_LOWEST {
        return Err(ScoringError::TooFewPeriods {
            needed: BASELINE_LOWEST,
            found: values.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(cmp_scalar);
    Ok(mean(&sorted[..BASELINE_LOWEST]).expect("non-empty"))
}

/// Baseline computed independently for every hour across periods.
pub fn baseline_of<T: Scalar>(matrix: &ProfileMatrix<T>) -> Result<[T; HOURS], ScoringError> {
    let mut out = [T::zero(); HOURS];
    let mut column = Vec::with_capacity(matrix.len());
    for (h, slot) in out.iter_mut().enumerate() {
        column.clear();
        column.extend(matrix.iter().map(|row| row[h]));
        *slot = baseline_at_hour(&column)?;
    }
    Ok(out)
}

/// A score value with the (period index, hour) cell that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellScore<T> {
    pub value: T,
    pub period: usize,
    pub hour: usize,
}

fn max_cell<T: Scalar>(
    matrix: &ProfileMatrix<T>,
    f: impl Fn(usize, usize, T) -> T,
) -> CellScore<T> {
    let mut best = CellScore {
        value: T::neg_infinity(),
        period: 0,
        hour: 0,
    };
    for (m, row) in matrix.iter().enumerate() {
        for (h, &v) in row.iter().enumerate() {
            let s = f(m, h, v);
            if s > best.value {
                best = CellScore {
                    value: s,
                    period: m,
                    hour: h,
                };
            }
        }
    }
    best
}

fn clamp_nonneg<T: Scalar>(mut s: CellScore<T>) -> CellScore<T> {
    if !(s.value > T::zero()) {
        s.value = T::zero();
    }
    s
}

/// Score A: largest excess of any cell over the baseline, in vehicles/hour.
pub fn score_a<T: Scalar>(matrix: &ProfileMatrix<T>, baseline: &[T; HOURS]) -> CellScore<T> {
    clamp_nonneg(max_cell(matrix, |_, h, v| v - baseline[h]))
}

/// Score B: largest excess over the baseline relative to the baseline.
pub fn score_b<T: Scalar>(matrix: &ProfileMatrix<T>, baseline: &[T; HOURS]) -> CellScore<T> {
    let eps = T::lit(RELATIVE_EPSILON);
    clamp_nonneg(max_cell(matrix, |_, h, v| {
        (v - baseline[h]) / baseline[h].max(eps)
    }))
}

/// Score C: coefficient of variation across periods, averaged over hours.
///
/// The reported cell is the hour with the largest CV and the period furthest
/// from that hour's mean.
pub fn score_c<T: Scalar>(matrix: &ProfileMatrix<T>) -> Result<CellScore<T>, ScoringError> {
    if matrix.len() < 2 {
        return Err(ScoringError::TooFewPeriods {
            needed: 2,
            found: matrix.len(),
        });
    }
    let mut column = Vec::with_capacity(matrix.len());
    let mut total = T::zero();
    let (mut best_hour, mut best_cv) = (0usize, T::neg_infinity());
    for h in 0..HOURS {
        column.clear();
        column.extend(matrix.iter().map(|row| row[h]));
        let m = mean(&column).expect("non-empty");
        let cv = if m == T::zero() {
            T::zero()
        } else {
            sample_std(&column) / m
        };
        total = total + cv;
        if cv > best_cv {
            best_cv = cv;
            best_hour = h;
        }
    }
    column.clear();
    column.extend(matrix.iter().map(|row| row[best_hour]));
    let m = mean(&column).expect("non-empty");
    let mut period = 0;
    for (i, &v) in column.iter().enumerate() {
        if (v - m).abs() > (column[period] - m).abs() {
            period = i;
        }
    }
    Ok(CellScore {
        value: total / T::of_usize(HOURS),
        period,
        hour: best_hour,
    })
}

/// Score D: sum of absolute deviations from the baseline over all cells.
pub fn score_d<T: Scalar>(matrix: &ProfileMatrix<T>, baseline: &[T; HOURS]) -> CellScore<T> {
    let mut sum = T::zero();
    for row in matrix {
        for (h, &v) in row.iter().enumerate() {
            sum = sum + (v - baseline[h]).abs();
        }
    }
    let cell = max_cell(matrix, |_, h, v| (v - baseline[h]).abs());
    CellScore { value: sum, ..cell }
}

/// Score E: adjusted z-score, centred on the baseline instead of the mean.
pub fn score_e<T: Scalar>(
    matrix: &ProfileMatrix<T>,
    baseline: &[T; HOURS],
) -> Result<CellScore<T>, ScoringError> {
    if matrix.len() < 2 {
        return Err(ScoringError::TooFewPeriods {
            needed: 2,
            found: matrix.len(),
        });
    }
    let eps = T::lit(STD_EPSILON);
    let mut std = [T::zero(); HOURS];
    let mut column = Vec::with_capacity(matrix.len());
    for (h, s) in std.iter_mut().enumerate() {
        column.clear();
        column.extend(matrix.iter().map(|row| row[h]));
        *s = sample_std(&column).max(eps);
    }
    Ok(clamp_nonneg(max_cell(matrix, |_, h, v| {
        (v - baseline[h]) / std[h]
    })))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScoreName {
    #[serde(rename = "score_a")]
    A,
    #[serde(rename = "score_b")]
    B,
    #[serde(rename = "score_c")]
    C,
    #[serde(rename = "score_d")]
    D,
    #[serde(rename = "score_e")]
    E,
}

impl ScoreName {
    pub const ALL: [ScoreName; 5] = [
        ScoreName::A,
        ScoreName::B,
        ScoreName::C,
        ScoreName::D,
        ScoreName::E,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreName::A => "score_a",
            ScoreName::B => "score_b",
            ScoreName::C => "score_c",
            ScoreName::D => "score_d",
            ScoreName::E => "score_e",
        }
    }
}

impl fmt::Display for ScoreName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreName {
    type Err = ScoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let letter = t.strip_prefix("score_").unwrap_or(&t);
        match letter {
            "a" => Ok(ScoreName::A),
            "b" => Ok(ScoreName::B),
            "c" => Ok(ScoreName::C),
            "d" => Ok(ScoreName::D),
            "e" => Ok(ScoreName::E),
            _ => Err(ScoringError::UnknownScore(s.to_string())),
        }
    }
}

/// A profile cell: period plus hour of day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRef {
    pub period: Period,
    pub hour: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score<T> {
    pub value: T,
    pub at: CellRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard<T> {
    pub key: SeriesKey,
    pub score_a: Score<T>,
    pub score_b: Score<T>,
    pub score_c: Score<T>,
    pub score_d: Score<T>,
    pub score_e: Score<T>,
}

impl<T: Scalar> ScoreCard<T> {
    pub fn get(&self, name: ScoreName) -> &Score<T> {
        match name {
            ScoreName::A => &self.score_a,
            ScoreName::B => &self.score_b,
            ScoreName::C => &self.score_c,
            ScoreName::D => &self.score_d,
            ScoreName::E => &self.score_e,
        }
    }

    pub fn value(&self, name: ScoreName) -> T {
        self.get(name).value
    }
}

/// Baseline plus all five scores for one series.
pub fn score_series<T: Scalar>(
    key: &SeriesKey,
    profiles: &[HourlyProfile<T>],
) -> Result<(BaselineProfile<T>, ScoreCard<T>), ScoringError> {
    let matrix: Vec<[T; HOURS]> = profiles.iter().map(|p| p.values).collect();
    let baseline = baseline_of(&matrix)?;
    let cell = |s: CellScore<T>| Score {
        value: s.value,
        at: CellRef {
            period: profiles[s.period].key.period,
            hour: s.hour as u8,
        },
    };
    let card = ScoreCard {
        key: key.clone(),
        score_a: cell(score_a(&matrix, &baseline)),
        score_b: cell(score_b(&matrix, &baseline)),
        score_c: cell(score_c(&matrix)?),
        score_d: cell(score_d(&matrix, &baseline)),
        score_e: cell(score_e(&matrix, &baseline)?),
    };
    Ok((
        BaselineProfile {
            key: key.clone(),
            values: baseline,
        },
        card,
    ))
}

/// Score cards for every series, in series-key order.
pub fn score_profile_set<T: Scalar>(
    set: &ProfileSet<T>,
) -> Result<Vec<ScoreCard<T>>, ScoringError> {
    let series: Vec<_> = set.series.iter().collect();
    series
        .par_iter()
        .map(|(key, profiles)| score_series(key, profiles).map(|(_, card)| card))
        .collect()
}

/// One entry of a top-k ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCounter<T> {
    pub counter_id: CounterId,
    pub score: T,
    /// Series (direction and day type) that produced the score.
    pub key: SeriesKey,
    pub at: CellRef,
}

/// Top-k unique counters by the chosen score, best series per counter.
///
/// Ties are broken by counter id ascending.
pub fn rank<T: Scalar>(
    cards: &[ScoreCard<T>],
    by: ScoreName,
    k: usize,
) -> Result<Vec<RankedCounter<T>>, ScoringError> {
    if k == 0 {
        return Err(ScoringError::InvalidK);
    }
    let mut best: BTreeMap<&CounterId, &ScoreCard<T>> = BTreeMap::new();
    for card in cards {
        let entry = best.entry(&card.key.counter_id).or_insert(card);
        let (cur, new) = (entry.value(by), card.value(by));
        if new > cur || (new == cur && card.key < entry.key) {
            *entry = card;
        }
    }
    let mut ranked: Vec<RankedCounter<T>> = best
        .into_values()
        .map(|card| RankedCounter {
            counter_id: card.key.counter_id.clone(),
            score: card.value(by),
            key: card.key.clone(),
            at: card.get(by).at,
        })
        .collect();
    ranked.sort_by(|a, b| {
        cmp_scalar(&b.score, &a.score).then_with(|| a.counter_id.cmp(&b.counter_id))
    });
    ranked.truncate(k);
    Ok(ranked)
}
