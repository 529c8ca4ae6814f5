//! Calendar months, the unit every temporal aggregation is bucketed on.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

/// A calendar month. Ordered by calendar; serialized as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month(i32);

impl Month {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        if !(1..=12).contains(&month) || !(0..=9999).contains(&year) {
            return None;
        }
        Some(Month(year * 12 + month as i32 - 1))
    }

    pub fn of_date(date: NaiveDate) -> Self {
        Month(date.year() * 12 + date.month0() as i32)
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    /// 1-based month of year.
    pub fn month(self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    /// Months since year 0, January.
    pub fn ordinal(self) -> i32 {
        self.0
    }

    pub fn from_ordinal(ordinal: i32) -> Self {
        Month(ordinal)
    }

    pub fn succ(self) -> Self {
        Month(self.0 + 1)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: Month) -> i32 {
        other.0 - self.0
    }

    pub fn offset(self, months: i32) -> Self {
        Month(self.0 + months)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for Month {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Month(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        Month::new(year, month).ok_or_else(bad)
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive interval of months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonthSpan {
    pub start: Month,
    pub end: Month,
}

impl MonthSpan {
    pub fn new(start: Month, end: Month) -> Result<Self, ParseError> {
        if start > end {
            return Err(ParseError::Span(format!("{start}..{end}")));
        }
        Ok(MonthSpan { start, end })
    }

    pub fn single(month: Month) -> Self {
        MonthSpan {
            start: month,
            end: month,
        }
    }

    /// Number of months covered.
    pub fn len(&self) -> usize {
        (self.start.months_until(self.end) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, month: Month) -> bool {
        self.start <= month && month <= self.end
    }

    /// Position of `month` within the span, if inside.
    pub fn position(&self, month: Month) -> Option<usize> {
        self.contains(month)
            .then(|| self.start.months_until(month) as usize)
    }

    pub fn months(&self) -> impl Iterator<Item = Month> {
        (self.start.ordinal()..=self.end.ordinal()).map(Month::from_ordinal)
    }

    /// Intersection with `other`, `None` when disjoint.
    pub fn intersect(&self, other: &MonthSpan) -> Option<MonthSpan> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(MonthSpan { start, end })
    }

    /// Smallest span covering both.
    pub fn union(&self, other: &MonthSpan) -> MonthSpan {
        MonthSpan {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for MonthSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Parses `YYYY-MM..YYYY-MM`; a bare `YYYY-MM` is a single-month span.
impl FromStr for MonthSpan {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once("..") {
            Some((a, b)) => MonthSpan::new(a.trim().parse()?, b.trim().parse()?),
            None => Ok(MonthSpan::single(s.trim().parse()?)),
        }
    }
}
