use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calendar::DayType;
use crate::ingest::{CounterId, Direction};
use crate::profile::WeeklyShare;
use crate::scalar::Scalar;

/// Part of the week in which a counter direction carries most of its traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekTag<T> {
    pub counter_id: CounterId,
    pub direction: Direction,
    pub tag: DayType,
    /// `max(weekend, workday)`, in `[0.5, 1]`.
    pub share: T,
}

/// Larger of the two shares; an exact tie goes to workday.
pub fn tag_share<T: Scalar>(share: WeeklyShare<T>) -> (DayType, T) {
    if share.weekend > share.workday {
        (DayType::Weekend, share.weekend)
    } else {
        (DayType::Workday, share.workday)
    }
}

pub fn week_tag<T: Scalar>(
    shares: &BTreeMap<(CounterId, Direction), WeeklyShare<T>>,
) -> Vec<WeekTag<T>> {
    shares
        .iter()
        .map(|((counter_id, direction), &s)| {
            let (tag, share) = tag_share(s);
            WeekTag {
                counter_id: counter_id.clone(),
                direction: *direction,
                tag,
                share,
            }
        })
        .collect()
}
