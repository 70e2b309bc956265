//! Trend analysis over calendar buckets: `[Unit, Span]` pairs such as
//! `[Month, Year]` (twelve monthly buckets per calendar year).

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::detect::{day_range, ClientIndex, SpanCheck};
use crate::error::{Error, FieldError, Result};
use crate::params::DddmParams;
use crate::record::{date_range, span_days, VisitRecord};

/// Calendar units, ordered finest to coarsest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Day,
    Week,
    Month,
    Quarter,
    Year,
    Decade,
}

impl TimeUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Day => "day",
            TimeUnit::Week => "week",
            TimeUnit::Month => "month",
            TimeUnit::Quarter => "quarter",
            TimeUnit::Year => "year",
            TimeUnit::Decade => "decade",
        }
    }

    /// Start of the period containing `date`. Weeks start on Monday.
    fn floor(self, date: NaiveDate) -> NaiveDate {
        let ymd = |y, m| NaiveDate::from_ymd_opt(y, m, 1).expect("valid date");
        match self {
            TimeUnit::Day => date,
            TimeUnit::Week => {
                date - Duration::days(i64::from(date.weekday().num_days_from_monday()))
            }
            TimeUnit::Month => ymd(date.year(), date.month()),
            TimeUnit::Quarter => ymd(date.year(), (date.month0() / 3) * 3 + 1),
            TimeUnit::Year => ymd(date.year(), 1),
            TimeUnit::Decade => ymd(date.year() - date.year().rem_euclid(10), 1),
        }
    }

    /// Start of the next period after one starting at `start`.
    fn advance(self, start: NaiveDate) -> NaiveDate {
        match self {
            TimeUnit::Day => start + Duration::days(1),
            TimeUnit::Week => start + Duration::days(7),
            TimeUnit::Month => start + Months::new(1),
            TimeUnit::Quarter => start + Months::new(3),
            TimeUnit::Year => start + Months::new(12),
            TimeUnit::Decade => start + Months::new(120),
        }
    }

    fn label(self, start: NaiveDate) -> String {
        match self {
            TimeUnit::Day => start.format("%Y-%m-%d").to_string(),
            TimeUnit::Week => format!("week of {}", start.format("%Y-%m-%d")),
            TimeUnit::Month => start.format("%Y-%m").to_string(),
            TimeUnit::Quarter => format!("{}-Q{}", start.year(), start.month0() / 3 + 1),
            TimeUnit::Year => start.year().to_string(),
            TimeUnit::Decade => format!("{}s", start.year()),
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimeUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "day" => Ok(TimeUnit::Day),
            "week" => Ok(TimeUnit::Week),
            "month" => Ok(TimeUnit::Month),
            "quarter" => Ok(TimeUnit::Quarter),
            "year" => Ok(TimeUnit::Year),
            "decade" => Ok(TimeUnit::Decade),
            other => Err(format!("unknown time unit {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[default]
    Frequency,
    Rate,
}

impl FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "frequency" => Ok(Statistic::Frequency),
            "rate" => Ok(Statistic::Rate),
            other => Err(format!(
                "unknown statistic {other:?} (expected frequency or rate)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalSpec {
    pub unit: TimeUnit,
    pub span: TimeUnit,
    #[serde(default)]
    pub statistic: Statistic,
}

impl TemporalSpec {
    pub fn month_of_year() -> Self {
        Self {
            unit: TimeUnit::Month,
            span: TimeUnit::Year,
            statistic: Statistic::Frequency,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.unit >= self.span {
            return Err(Error::InvalidParams(vec![FieldError::new(
                "unit",
                format!("unit {} must be finer than span {}", self.unit, self.span),
            )]));
        }
        Ok(())
    }

    /// Buckets tiling every span period that overlaps `[min, max]`.
    ///
    /// Buckets restart at each span boundary; a week bucket straddling one
    /// is cut short.
    pub fn buckets(&self, min: NaiveDate, max: NaiveDate) -> Vec<(NaiveDate, NaiveDate)> {
        let mut buckets = Vec::new();
        let mut period = self.span.floor(min);
        while period <= max {
            let period_end = self.span.advance(period) - Duration::days(1);
            let mut start = period;
            while start <= period_end {
                let end = (self.unit.advance(start) - Duration::days(1)).min(period_end);
                buckets.push((start, end));
                start = end + Duration::days(1);
            }
            period = period_end + Duration::days(1);
        }
        buckets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalBucket {
    pub index: usize,
    pub label: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Clients with at least one visit in the bucket; denominator of the rates.
    pub active_clients: usize,
    pub mh_count: usize,
    pub su_count: usize,
    pub mhsu_count: usize,
    pub mh_rate: f64,
    pub su_rate: f64,
    pub mhsu_rate: f64,
}

impl TemporalBucket {
    /// The (mh, su, mhsu) values selected by `statistic`.
    pub fn values(&self, statistic: Statistic) -> [f64; 3] {
        match statistic {
            Statistic::Frequency => [
                self.mh_count as f64,
                self.su_count as f64,
                self.mhsu_count as f64,
            ],
            Statistic::Rate => [self.mh_rate, self.su_rate, self.mhsu_rate],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalResult {
    pub spec: TemporalSpec,
    pub buckets: Vec<TemporalBucket>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Runs the basic concurrent detection separately inside each bucket.
///
/// With [`SpanCheck::Enforce`], buckets wider than `t_mhsu` days are an
/// error, since the basic semantics assume the data fits in one span.
pub fn temporal_analysis(
    records: &[VisitRecord],
    params: &DddmParams,
    spec: &TemporalSpec,
    span_check: SpanCheck,
) -> Result<TemporalResult> {
    spec.validate()?;
    params.validate()?;
    let Some((min, max)) = date_range(records) else {
        return Ok(TemporalResult {
            spec: *spec,
            buckets: Vec::new(),
            warnings: vec!["no visit records".to_string()],
        });
    };
    let ranges = spec.buckets(min, max);
    if span_check == SpanCheck::Enforce {
        if let Some(&(s, e)) = ranges
            .iter()
            .find(|(s, e)| span_days(*s, *e) > i64::from(params.t_mhsu))
        {
            return Err(Error::SpanExceedsConcurrentWindow {
                span_days: span_days(s, e),
                t_mhsu: params.t_mhsu,
            });
        }
    }

    let index = ClientIndex::build(records, &params.icd_mh, &params.icd_su);
    let mut warnings = Vec::new();
    let buckets = ranges
        .into_iter()
        .enumerate()
        .map(|(i, (start, end))| {
            let (lo, hi) = day_range(start, end);
            let rows = index.evaluate_concurrent(params, Some((lo, hi)), None);
            let active = index
                .clients
                .iter()
                .filter(|c| c.has_visit_in(lo, hi))
                .count();
            let mh_count = rows.iter().filter(|r| r.mh_yes()).count();
            let su_count = rows.iter().filter(|r| r.su_yes()).count();
            let mhsu_count = rows.iter().filter(|r| r.mhsu_yes()).count();
            let label = spec.unit.label(start);
            if active == 0 {
                warnings.push(format!("bucket {label} has no visits; rates reported as 0"));
            }
            let rate = |c: usize| {
                if active == 0 {
                    0.0
                } else {
                    c as f64 / active as f64
                }
            };
            TemporalBucket {
                index: i + 1,
                label,
                start,
                end,
                active_clients: active,
                mh_count,
                su_count,
                mhsu_count,
                mh_rate: rate(mh_count),
                su_rate: rate(su_count),
                mhsu_rate: rate(mhsu_count),
            }
        })
        .collect();
    Ok(TemporalResult {
        spec: *spec,
        buckets,
        warnings,
    })
}
