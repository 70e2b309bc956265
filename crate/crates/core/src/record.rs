use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError};
use crate::icd::CodeSet;

/// Opaque patient identifier; compared and sorted as a plain string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClientId(String);

impl ClientId {
    pub fn new(id: impl Into<String>) -> Result<Self, Error> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(Error::InvalidParams(vec![FieldError::new(
                "client_id",
                "must be non-empty",
            )]));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ClientId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ClientId> for String {
    fn from(id: ClientId) -> Self {
        id.0
    }
}

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One hospital or physician encounter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub client_id: ClientId,
    pub visit_date: NaiveDate,
    pub hospital_codes: CodeSet,
    pub physician_codes: CodeSet,
}

impl VisitRecord {
    pub fn new(
        client_id: ClientId,
        visit_date: NaiveDate,
        hospital_codes: CodeSet,
        physician_codes: CodeSet,
    ) -> Self {
        Self {
            client_id,
            visit_date,
            hospital_codes,
            physician_codes,
        }
    }

    pub fn day(&self) -> i64 {
        day_number(self.visit_date)
    }
}

/// Days since the common era; differences give exact day counts.
pub fn day_number(date: NaiveDate) -> i64 {
    i64::from(date.num_days_from_ce())
}

/// Inverse of [`day_number`].
pub fn date_from_day(day: i64) -> NaiveDate {
    let day = i32::try_from(day).expect("day number out of range");
    NaiveDate::from_num_days_from_ce_opt(day).expect("day number out of range")
}

/// Earliest and latest visit dates, or `None` for an empty slice.
pub fn date_range(records: &[VisitRecord]) -> Option<(NaiveDate, NaiveDate)> {
    let min = records.iter().map(|r| r.visit_date).min()?;
    let max = records.iter().map(|r| r.visit_date).max()?;
    Some((min, max))
}

/// Inclusive number of calendar days covered by `[min, max]`.
pub fn span_days(min: NaiveDate, max: NaiveDate) -> i64 {
    day_number(max) - day_number(min) + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_id_must_be_non_empty() {
        assert!(ClientId::new("").is_err());
        assert!(ClientId::new("  ").is_err());
        assert_eq!(ClientId::new("011").unwrap().as_str(), "011");
    }

    #[test]
    fn span_is_inclusive() {
        let d = |m, day| NaiveDate::from_ymd_opt(2024, m, day).unwrap();
        assert_eq!(span_days(d(1, 1), d(1, 1)), 1);
        assert_eq!(span_days(d(1, 1), d(12, 31)), 366);
        assert_eq!(date_from_day(day_number(d(2, 29))), d(2, 29));
    }
}
