use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Calendar month, written `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Result<Self, Error> {
        if !(1..=12).contains(&month) || !(0..=9999).contains(&year) {
            return Err(Error::Validation(format!("invalid year-month {year}-{month}")));
        }
        Ok(Self { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    /// The following calendar month.
    pub fn succ(&self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// `count` consecutive months starting at `self`.
    pub fn range(self, count: usize) -> impl Iterator<Item = YearMonth> {
        std::iter::successors(Some(self), |d| Some(d.succ())).take(count)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Validation(format!("expected YYYY-MM, got '{s}'"));
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u8 = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive range of months, written `YYYY-MM..YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonthRange {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl MonthRange {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self, Error> {
        if start > end {
            return Err(Error::Validation(format!(
                "exclusion range start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, d: YearMonth) -> bool {
        self.start <= d && d <= self.end
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for MonthRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (a, b) = s
            .trim()
            .split_once("..")
            .ok_or_else(|| Error::Validation(format!("expected YYYY-MM..YYYY-MM, got '{s}'")))?;
        MonthRange::new(a.parse()?, b.parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let d: YearMonth = "2008-03".parse().unwrap();
        assert_eq!((d.year(), d.month()), (2008, 3));
        assert_eq!(d.to_string(), "2008-03");
        assert!("2008-13".parse::<YearMonth>().is_err());
        assert!("2008-3".parse::<YearMonth>().is_err());
        assert!("2008/03".parse::<YearMonth>().is_err());
    }

    #[test]
    fn successor_wraps_year() {
        let d: YearMonth = "2019-12".parse().unwrap();
        assert_eq!(d.succ().to_string(), "2020-01");
        assert_eq!(d.range(14).last().unwrap().to_string(), "2021-01");
    }

    #[test]
    fn month_range() {
        let r: MonthRange = "2008-01..2008-12".parse().unwrap();
        assert!(r.contains("2008-06".parse().unwrap()));
        assert!(!r.contains("2009-01".parse().unwrap()));
        assert!("2009-01..2008-12".parse::<MonthRange>().is_err());
        assert_eq!(r.to_string(), "2008-01..2008-12");
    }
}
