//! Simulated 200-patient administrative dataset.
//!
//! Seven cohorts, each with a fixed date span and fixed per-patient hospital
//! and physician visit counts; every visit of a stream carries the same code
//! set (e.g. physician visits of group 2 carry `F063,J10`). Groups 1-4 have
//! both MH and SU codes, group 5 only SU, group 6 only MH, group 7 neither.

use chrono::{Duration, NaiveDate};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::icd::{code_set, CodeSet};
use crate::record::{span_days, ClientId, VisitRecord};

/// Codes assigned to every visit of a stream, with their stated frequency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodePlanEntry {
    pub codes: CodeSet,
    pub frequency: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub group_id: u32,
    pub size: u32,
    pub span_start: NaiveDate,
    pub span_end: NaiveDate,
    pub hospital_visits: u32,
    pub physician_visits: u32,
    pub hospital_code_plan: Vec<CodePlanEntry>,
    pub physician_code_plan: Vec<CodePlanEntry>,
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |message: String| Error::InvalidCohort {
            group_id: self.group_id,
            message,
        };
        if self.span_start > self.span_end {
            return Err(err("span_start is after span_end".into()));
        }
        for (stream, visits, plan) in [
            ("hospital", self.hospital_visits, &self.hospital_code_plan),
            (
                "physician",
                self.physician_visits,
                &self.physician_code_plan,
            ),
        ] {
            if let Some(entry) = plan.iter().find(|e| e.frequency != visits) {
                return Err(err(format!(
                    "{stream} code frequency {} differs from {visits} visits",
                    entry.frequency
                )));
            }
        }
        Ok(())
    }

    /// Inclusive number of days in the cohort's span.
    pub fn span_days(&self) -> i64 {
        span_days(self.span_start, self.span_end)
    }

    fn stream_codes(plan: &[CodePlanEntry]) -> CodeSet {
        plan.iter().flat_map(|e| e.codes.iter().cloned()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "placement")]
pub enum Placement {
    /// The j-th of c visits goes at `start + floor((j - 0.5) * D / c)`.
    #[default]
    Deterministic,
    /// c distinct uniformly drawn days per stream.
    SeededUniform { seed: u64 },
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

fn plan(entries: &[(&[&str], u32)]) -> Vec<CodePlanEntry> {
    entries
        .iter()
        .map(|&(codes, frequency)| CodePlanEntry {
            codes: code_set(codes.iter().copied()),
            frequency,
        })
        .collect()
}

/// The seven simulated cohorts. Group 3 ends on 2024-06-30.
pub fn default_cohorts() -> Vec<CohortSpec> {
    let group = |group_id, size, start, end, h, p, hp: &[(&[&str], u32)], pp: &[(&[&str], u32)]| {
        CohortSpec {
            group_id,
            size,
            span_start: start,
            span_end: end,
            hospital_visits: h,
            physician_visits: p,
            hospital_code_plan: plan(hp),
            physician_code_plan: plan(pp),
        }
    };
    vec![
        group(
            1,
            10,
            ymd(2024, 1, 1),
            ymd(2024, 1, 31),
            1,
            2,
            &[(&["F100"], 1)],
            &[(&["F060"], 2)],
        ),
        group(
            2,
            20,
            ymd(2024, 2, 1),
            ymd(2024, 3, 31),
            2,
            4,
            &[(&["T4041"], 2)],
            &[(&["F063"], 4), (&["J10"], 4)],
        ),
        group(
            3,
            30,
            ymd(2024, 4, 1),
            ymd(2024, 6, 30),
            3,
            6,
            &[(&["F120"], 3), (&["I10"], 3)],
            &[(&["F064"], 6)],
        ),
        group(
            4,
            40,
            ymd(2024, 7, 1),
            ymd(2024, 12, 31),
            6,
            12,
            &[(&["F140"], 6), (&["I10"], 6)],
            &[(&["F067"], 12), (&["J10"], 12)],
        ),
        group(
            5,
            25,
            ymd(2024, 11, 1),
            ymd(2024, 12, 31),
            3,
            6,
            &[(&["F100"], 3)],
            &[(&["J10"], 6)],
        ),
        group(
            6,
            25,
            ymd(2024, 11, 1),
            ymd(2024, 12, 31),
            2,
            4,
            &[(&["I10"], 2)],
            &[(&["F060"], 4)],
        ),
        group(
            7,
            50,
            ymd(2024, 11, 1),
            ymd(2024, 12, 31),
            1,
            2,
            &[(&["I10"], 1)],
            &[(&["J10"], 2)],
        ),
    ]
}

/// Day offsets (0-based from the span start) for `count` visits in a span
/// of `span` days under deterministic placement.
pub fn deterministic_offsets(count: u32, span: i64) -> Vec<i64> {
    let c = i64::from(count);
    // floor((j - 0.5) * D / c) == floor((2j - 1) * D / 2c) for j = 1..=c
    (1..=c)
        .map(|j| ((2 * j - 1) * span).div_euclid(2 * c))
        .collect()
}

/// Expands cohort specs into visit records.
///
/// Client ids are zero-padded sequence numbers across groups (`001`...).
/// Each client's hospital visits come first, then physician visits, each in
/// date order.
pub fn generate_sample(specs: &[CohortSpec], placement: Placement) -> Result<Vec<VisitRecord>> {
    for spec in specs {
        spec.validate()?;
    }
    let total: u32 = specs.iter().map(|s| s.size).sum();
    let width = total.to_string().len().max(3);
    let mut rng = match placement {
        Placement::SeededUniform { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Placement::Deterministic => None,
    };

    let mut records = Vec::new();
    let mut next_id = 1u32;
    for spec in specs {
        let span = spec.span_days();
        let streams = [
            (
                spec.hospital_visits,
                CohortSpec::stream_codes(&spec.hospital_code_plan),
                true,
            ),
            (
                spec.physician_visits,
                CohortSpec::stream_codes(&spec.physician_code_plan),
                false,
            ),
        ];
        for _ in 0..spec.size {
            let client_id = ClientId::new(format!("{next_id:0width$}"))?;
            next_id += 1;
            for (count, codes, hospital) in &streams {
                let offsets = match rng.as_mut() {
                    None => deterministic_offsets(*count, span),
                    Some(rng) => {
                        let available = usize::try_from(span).unwrap_or(0);
                        if *count as usize > available {
                            return Err(Error::InvalidCohort {
                                group_id: spec.group_id,
                                message: format!(
                                    "{count} distinct visit dates do not fit in {span} days"
                                ),
                            });
                        }
                        let mut picked: Vec<i64> = index::sample(rng, available, *count as usize)
                            .into_iter()
                            .map(|i| i as i64)
                            .collect();
                        picked.sort_unstable();
                        picked
                    }
                };
                for offset in offsets {
                    let (h, p) = if *hospital {
                        (codes.clone(), CodeSet::new())
                    } else {
                        (CodeSet::new(), codes.clone())
                    };
                    records.push(VisitRecord::new(
                        client_id.clone(),
                        spec.span_start + Duration::days(offset),
                        h,
                        p,
                    ));
                }
            }
        }
    }
    Ok(records)
}

/// The default cohorts under deterministic placement.
pub fn sample_dataset() -> Vec<VisitRecord> {
    generate_sample(&default_cohorts(), Placement::Deterministic)
        .expect("built-in cohorts are valid")
}
