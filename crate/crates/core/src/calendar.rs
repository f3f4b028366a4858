//! Day-type and season classification.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_HOLIDAYS: &str = include_str!("../data/holidays_si_2015_2017.txt");

#[derive(Debug, Error)]
pub enum CalendarError {
    #[error("month {0} out of range 1..=12")]
    InvalidMonth(u32),
    #[error("invalid holiday date {text:?}, line {line}")]
    BadHolidayLine { line: usize, text: String },
    #[error("unknown day type {0:?}")]
    UnknownDayType(String),
    #[error("unknown season {0:?}")]
    UnknownSeason(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayType {
    Workday,
    Weekend,
}

impl DayType {
    pub const ALL: [DayType; 2] = [DayType::Workday, DayType::Weekend];

    pub fn as_str(self) -> &'static str {
        match self {
            DayType::Workday => "workday",
            DayType::Weekend => "weekend",
        }
    }
}

impl fmt::Display for DayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DayType {
    type Err = CalendarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "workday" => Ok(DayType::Workday),
            "weekend" => Ok(DayType::Weekend),
            other => Err(CalendarError::UnknownDayType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Spring,
    Summer,
    Autumn,
    Winter,
}

impl Season {
    /// Report column order.
    pub const ALL: [Season; 4] = [
        Season::Spring,
        Season::Summer,
        Season::Autumn,
        Season::Winter,
    ];

    pub fn months(self) -> [u32; 3] {
        match self {
            Season::Spring => [3, 4, 5],
            Season::Summer => [6, 7, 8],
            Season::Autumn => [9, 10, 11],
            Season::Winter => [12, 1, 2],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Autumn => "autumn",
            Season::Winter => "winter",
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Season {
    type Err = CalendarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Season::ALL
            .into_iter()
            .find(|season| season.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CalendarError::UnknownSeason(s.to_string()))
    }
}

/// Maps a calendar month to its meteorological season.
pub fn season_of_month(month: u32) -> Result<Season, CalendarError> {
    match month {
        3..=5 => Ok(Season::Spring),
        6..=8 => Ok(Season::Summer),
        9..=11 => Ok(Season::Autumn),
        12 | 1 | 2 => Ok(Season::Winter),
        other => Err(CalendarError::InvalidMonth(other)),
    }
}

/// Set of public holidays treated as weekend days.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolidayCalendar {
    dates: BTreeSet<NaiveDate>,
}

impl HolidayCalendar {
    pub fn new(dates: impl IntoIterator<Item = NaiveDate>) -> Self {
        Self {
            dates: dates.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Slovenian public holidays for 2015-2017, shipped with the crate.
    pub fn slovenia_2015_2017() -> Self {
        Self::parse(DEFAULT_HOLIDAYS).expect("bundled holiday file is well formed")
    }

    /// Parses one ISO date per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CalendarError> {
        let mut dates = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let date = NaiveDate::parse_from_str(line, "%Y-%m-%d").map_err(|_| {
                CalendarError::BadHolidayLine {
                    line: idx + 1,
                    text: line.to_string(),
                }
            })?;
            dates.insert(date);
        }
        Ok(Self { dates })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CalendarError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.contains(&date)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.dates.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Keeps only holidays that fall within `years`.
    pub fn within_years(&self, years: &BTreeSet<i32>) -> Self {
        Self {
            dates: self
                .dates
                .iter()
                .copied()
                .filter(|d| years.contains(&d.year()))
                .collect(),
        }
    }
}

/// Saturdays, Sundays and listed holidays are weekend days.
pub fn classify_day(date: NaiveDate, holidays: &HolidayCalendar) -> DayType {
    let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
    if weekend || holidays.contains(date) {
        DayType::Weekend
    } else {
        DayType::Workday
    }
}
