//! Calendar dates of partial precision.
//!
//! Civil-registry extracts frequently record only a year, or a year and a
//! month. [`PartialDate`] keeps exactly what was recorded and resolves the
//! missing parts with fixed mid-period conventions, so that age arithmetic
//! downstream is deterministic:
//!
//! * year only → July 1 of that year,
//! * year and month → the 15th of that month,
//! * full date → itself.
//!
//! Ages are measured in fractional years of 365.25 days.

use crate::error::{Error, Result};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Average length of a calendar year in days; used to convert day counts to
/// fractional years and back.
pub const DAYS_PER_YEAR: f64 = 365.25;

/// A date known to year, year-month, or full precision.
///
/// Invariant: a day is never present without a month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialDate {
    year: i32,
    month: Option<u8>,
    day: Option<u8>,
}

impl PartialDate {
    /// Build a partial date, validating calendar consistency.
    pub fn new(year: i32, month: Option<u8>, day: Option<u8>) -> Result<Self> {
        if day.is_some() && month.is_none() {
            return Err(Error::InvalidInput(format!(
                "date {year} has a day but no month"
            )));
        }
        if !(1..=9999).contains(&year) {
            return Err(Error::InvalidInput(format!("year {year} out of range")));
        }
        if let Some(m) = month {
            if !(1..=12).contains(&m) {
                return Err(Error::InvalidInput(format!("month {m} out of range")));
            }
            if let Some(d) = day {
                if NaiveDate::from_ymd_opt(year, m as u32, d as u32).is_none() {
                    return Err(Error::InvalidInput(format!(
                        "{year}-{m:02}-{d:02} is not a calendar date"
                    )));
                }
            }
        }
        Ok(PartialDate { year, month, day })
    }

    /// Parse `YYYY`, `YYYY-MM`, or `YYYY-MM-DD`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("malformed date {text:?}"));
        let mut parts = text.trim().split('-');
        let year = parts
            .next()
            .filter(|p| !p.is_empty())
            .and_then(|p| p.parse::<i32>().ok())
            .ok_or_else(bad)?;
        let month = match parts.next() {
            None => None,
            Some(p) => Some(p.parse::<u8>().map_err(|_| bad())?),
        };
        let day = match parts.next() {
            None => None,
            Some(p) => Some(p.parse::<u8>().map_err(|_| bad())?),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        PartialDate::new(year, month, day)
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> Option<u8> {
        self.month
    }

    pub fn day(&self) -> Option<u8> {
        self.day
    }

    /// Resolve to a concrete calendar date using the mid-period conventions.
    pub fn resolve(&self) -> NaiveDate {
        let (m, d) = match (self.month, self.day) {
            (Some(m), Some(d)) => (m as u32, d as u32),
            (Some(m), None) => (m as u32, 15),
            (None, _) => (7, 1),
        };
        NaiveDate::from_ymd_opt(self.year, m, d).expect("validated at construction")
    }

    /// Day count of the resolved date (days from the common-era epoch).
    pub fn resolve_days(&self) -> i64 {
        self.resolve().num_days_from_ce() as i64
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.month, self.day) {
            (Some(m), Some(d)) => write!(f, "{:04}-{:02}-{:02}", self.year, m, d),
            (Some(m), None) => write!(f, "{:04}-{:02}", self.year, m),
            _ => write!(f, "{:04}", self.year),
        }
    }
}

/// Elapsed time from `from` to `to` in fractional years of 365.25 days.
pub fn years_between(from: NaiveDate, to: NaiveDate) -> f64 {
    let days = to.num_days_from_ce() as i64 - from.num_days_from_ce() as i64;
    days as f64 / DAYS_PER_YEAR
}
