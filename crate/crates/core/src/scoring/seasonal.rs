use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::calendar::{season_of_month, HolidayCalendar, Season};
use crate::ingest::{CleanDataset, CounterId, Direction};
use crate::profile::VolumeSummary;
use crate::scalar::{cmp_scalar, Scalar};

/// Seasonal traffic shares of one counter direction against the pooled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalScoreCard<T> {
    pub counter_id: CounterId,
    pub direction: Direction,
    /// Indexed by [`Season::index`].
    pub shares: [T; 4],
    /// Counter share minus corpus share, per season.
    pub deviations: [T; 4],
    pub max_deviation: T,
    pub argmax_season: Season,
}

impl<T: Scalar> SeasonalScoreCard<T> {
    pub fn share(&self, season: Season) -> T {
        self.shares[season.index()]
    }

    pub fn deviation(&self, season: Season) -> T {
        self.deviations[season.index()]
    }
}

fn shares_of<T: Scalar>(totals: &[u64; 4]) -> [T; 4] {
    let annual: u64 = totals.iter().sum();
    if annual == 0 {
        return [T::lit(0.25); 4];
    }
    let annual = T::lit(annual as f64);
    totals.map(|t| T::lit(t as f64) / annual)
}

/// Season share deviation of every counter direction from the pooled corpus share.
pub fn seasonal_score<T: Scalar>(data: &CleanDataset) -> Vec<SeasonalScoreCard<T>> {
    seasonal_score_from_volumes(&VolumeSummary::from_dataset(
        data,
        &HolidayCalendar::empty(),
    ))
}

pub fn seasonal_score_from_volumes<T: Scalar>(
    volumes: &VolumeSummary,
) -> Vec<SeasonalScoreCard<T>> {
    let mut per_series: BTreeMap<(CounterId, Direction), [u64; 4]> = BTreeMap::new();
    let mut corpus = [0u64; 4];
    for row in &volumes.rows {
        let season = season_of_month(row.month).expect("volume rows carry valid months");
        per_series
            .entry((row.counter_id.clone(), row.direction))
            .or_default()[season.index()] += row.total();
        corpus[season.index()] += row.total();
    }
    let corpus_shares: [T; 4] = shares_of(&corpus);

    per_series
        .into_iter()
        .map(|((counter_id, direction), totals)| {
            let shares: [T; 4] = shares_of(&totals);
            let deviations: [T; 4] = std::array::from_fn(|i| shares[i] - corpus_shares[i]);
            let mut argmax = Season::ALL[0];
            for season in Season::ALL {
                if deviations[season.index()] > deviations[argmax.index()] {
                    argmax = season;
                }
            }
            SeasonalScoreCard {
                counter_id,
                direction,
                shares,
                deviations,
                max_deviation: deviations[argmax.index()],
                argmax_season: argmax,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeasonalRankBy {
    /// Largest deviation over the four seasons.
    MaxDeviation,
    /// Deviation for one season.
    Season(Season),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalRank<T> {
    pub counter_id: CounterId,
    pub direction: Direction,
    pub season: Season,
    pub deviation: T,
}

/// Top-k unique counters by seasonal deviation; ties by counter id.
pub fn rank_seasonal<T: Scalar>(
    cards: &[SeasonalScoreCard<T>],
    by: SeasonalRankBy,
    k: usize,
) -> Result<Vec<SeasonalRank<T>>, ScoringError> {
    if k == 0 {
        return Err(ScoringError::InvalidK);
    }
    let entry = |c: &SeasonalScoreCard<T>| {
        let season = match by {
            SeasonalRankBy::MaxDeviation => c.argmax_season,
            SeasonalRankBy::Season(s) => s,
        };
        SeasonalRank {
            counter_id: c.counter_id.clone(),
            direction: c.direction,
            season,
            deviation: c.deviation(season),
        }
    };
    let mut best: BTreeMap<CounterId, SeasonalRank<T>> = BTreeMap::new();
    for card in cards {
        let candidate = entry(card);
        match best.get(&card.counter_id) {
            Some(cur) if cur.deviation >= candidate.deviation => {}
            _ => {
                best.insert(card.counter_id.clone(), candidate);
            }
        }
    }
    let mut ranked: Vec<_> = best.into_values().collect();
    ranked.sort_by(|a, b| {
        cmp_scalar(&b.deviation, &a.deviation).then_with(|| a.counter_id.cmp(&b.counter_id))
    });
    ranked.truncate(k);
    Ok(ranked)
}
