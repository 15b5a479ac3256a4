//! Monthly time axis.
//!
//! Months are represented as an absolute ordinal (`year * 12 + month - 1`)
//! so arithmetic across year boundaries is plain integer arithmetic. A
//! [`MonthWindow`] pins the analysis range (Jan-2010..Dec-2017 by default,
//! 96 months) and maps absolute months to zero-based ordinals within it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month, stored as `year * 12 + (month - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MonthIndex(i32);

impl MonthIndex {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidMonth(format!("{year}-{month:02}")));
        }
        Ok(MonthIndex(year * 12 + month as i32 - 1))
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    pub fn month(self) -> u32 {
        (self.0.rem_euclid(12) + 1) as u32
    }

    pub fn offset(self, months: i32) -> MonthIndex {
        MonthIndex(self.0 + months)
    }

    /// Signed number of months from `other` to `self`.
    pub fn months_since(self, other: MonthIndex) -> i32 {
        self.0 - other.0
    }
}

impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for MonthIndex {
    type Err = Error;

    /// Parses `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidMonth(s.to_string()))?;
        if y.len() != 4 || m.len() != 2 || !y.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidMonth(s.to_string()));
        }
        let year: i32 = y.parse().map_err(|_| Error::InvalidMonth(s.to_string()))?;
        let month: u32 = m.parse().map_err(|_| Error::InvalidMonth(s.to_string()))?;
        MonthIndex::new(year, month)
    }
}

impl TryFrom<String> for MonthIndex {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MonthIndex> for String {
    fn from(m: MonthIndex) -> String {
        m.to_string()
    }
}

/// Inclusive month range defining the analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthWindow {
    pub start: MonthIndex,
    pub end: MonthIndex,
}

impl MonthWindow {
    pub fn new(start: MonthIndex, end: MonthIndex) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidWindow {
                start: start.to_string(),
                end: end.to_string(),
            });
        }
        Ok(MonthWindow { start, end })
    }

    /// The default analysis window: Jan-2010 through Dec-2017, 96 months.
    pub fn default_analysis() -> Self {
        MonthWindow {
            start: MonthIndex::new(2010, 1).unwrap(),
            end: MonthIndex::new(2017, 12).unwrap(),
        }
    }

    pub fn len(&self) -> usize {
        (self.end.months_since(self.start) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: MonthIndex) -> bool {
        self.start <= m && m <= self.end
    }

    /// Zero-based position of `m` within the window, if inside.
    pub fn ordinal(&self, m: MonthIndex) -> Option<usize> {
        self.contains(m)
            .then(|| m.months_since(self.start) as usize)
    }

    pub fn at(&self, ordinal: usize) -> MonthIndex {
        self.start.offset(ordinal as i32)
    }

    pub fn iter(&self) -> impl Iterator<Item = MonthIndex> + '_ {
        (0..self.len()).map(|i| self.at(i))
    }
}
