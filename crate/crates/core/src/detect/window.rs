use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{day_range, ClientIndex};
use crate::error::{Error, Result};
use crate::params::DddmParams;
use crate::record::{date_range, span_days, ClientId, VisitRecord};
use crate::status::{Status, StatusRecord};

/// Inclusive date interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

/// The sliding `t_mhsu`-day windows used by the broad detection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub window_count: usize,
    pub windows: Vec<DateWindow>,
}

/// Plans `k = max(1, span - t_mhsu + 1)` windows of `t_mhsu` days whose
/// starts advance one day at a time from `min_date`.
pub fn plan_windows(min_date: NaiveDate, max_date: NaiveDate, t_mhsu: u32) -> WindowPlan {
    assert!(min_date <= max_date, "min_date must not exceed max_date");
    assert!(t_mhsu >= 1, "t_mhsu must be positive");
    let span = span_days(min_date, max_date);
    let width = i64::from(t_mhsu);
    let k = (span - width + 1).max(1);
    let windows: Vec<_> = (0..k)
        .map(|w| {
            let start = min_date + Duration::days(w);
            DateWindow {
                start,
                end: start + Duration::days(width - 1),
            }
        })
        .collect();
    WindowPlan {
        window_count: windows.len(),
        windows,
    }
}

/// Concurrent detection on every window of [`plan_windows`].
///
/// Emits one row per `(window, client)` for every client of the input,
/// ordered by window then client; clients idle in a window get NO.
pub fn mhsu_status_broad(
    records: &[VisitRecord],
    params: &DddmParams,
) -> Result<Vec<StatusRecord>> {
    params.validate()?;
    let (min, max) = date_range(records).ok_or(Error::EmptyInput)?;
    let plan = plan_windows(min, max, params.t_mhsu);
    let index = ClientIndex::build(records, &params.icd_mh, &params.icd_su);
    let per_window: Vec<Vec<StatusRecord>> = plan
        .windows
        .par_iter()
        .enumerate()
        .map(|(w, window)| {
            let range = day_range(window.start, window.end);
            index.evaluate_concurrent(params, Some(range), Some(w as u32 + 1))
        })
        .collect();
    Ok(per_window.into_iter().flatten().collect())
}

/// Collapses windowed rows to one row per client: a status is YES when it
/// is YES in any window, dates span every window that reported them.
pub fn aggregate_windows(rows: &[StatusRecord]) -> Vec<StatusRecord> {
    let mut by_client: BTreeMap<&ClientId, StatusRecord> = BTreeMap::new();
    for row in rows {
        let merged = by_client
            .entry(&row.client_id)
            .or_insert_with(|| StatusRecord::empty(row.client_id.clone()));
        merged.mh_earliest = min_opt(merged.mh_earliest, row.mh_earliest);
        merged.mh_latest = max_opt(merged.mh_latest, row.mh_latest);
        merged.su_earliest = min_opt(merged.su_earliest, row.su_earliest);
        merged.su_latest = max_opt(merged.su_latest, row.su_latest);
        merged.mh_status = or_status(merged.mh_status, row.mh_status);
        merged.su_status = or_status(merged.su_status, row.su_status);
        merged.mhsu_status = or_status(merged.mhsu_status, row.mhsu_status);
    }
    by_client.into_values().collect()
}

fn min_opt(a: Option<NaiveDate>, b: Option<NaiveDate>) -> Option<NaiveDate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

fn max_opt(a: Option<NaiveDate>, b: Option<NaiveDate>) -> Option<NaiveDate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    }
}

fn or_status(a: Option<Status>, b: Option<Status>) -> Option<Status> {
    match (a, b) {
        (Some(a), Some(b)) => Some(Status::from_bool(a.is_yes() || b.is_yes())),
        (a, b) => a.or(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{mhsu_status_basic, SpanCheck};
    use crate::icd::code_set;

    fn d(offset: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap() + Duration::days(offset)
    }

    #[test]
    fn window_count_from_span() {
        assert_eq!(plan_windows(d(0), d(362), 360).window_count, 4);
        let single = plan_windows(d(0), d(9), 10);
        assert_eq!(single.window_count, 1);
        assert_eq!(
            single.windows[0],
            DateWindow {
                start: d(0),
                end: d(9)
            }
        );
        assert_eq!(plan_windows(d(0), d(3), 100).window_count, 1);
    }

    #[test]
    fn windows_slide_by_one_day() {
        let plan = plan_windows(d(0), d(9), 8);
        let offsets: Vec<_> = plan
            .windows
            .iter()
            .map(|w| ((w.start - d(0)).num_days(), (w.end - d(0)).num_days()))
            .collect();
        assert_eq!(offsets, [(0, 7), (1, 8), (2, 9)]);
        assert_eq!(plan.windows.last().unwrap().end, d(9));
    }

    #[test]
    fn broad_rejects_empty_input() {
        assert!(matches!(
            mhsu_status_broad(&[], &DddmParams::default()),
            Err(Error::EmptyInput)
        ));
    }

    fn visit(client: &str, offset: i64, hospital: &[&str], physician: &[&str]) -> VisitRecord {
        VisitRecord::new(
            ClientId::new(client).unwrap(),
            d(offset),
            code_set(hospital.iter().copied()),
            code_set(physician.iter().copied()),
        )
    }

    #[test]
    fn broad_emits_full_roster_per_window() {
        let records = vec![
            visit("A", 0, &["F100"], &[]),
            visit("A", 1, &[], &["F060"]),
            visit("B", 9, &[], &["F060"]),
        ];
        let params = DddmParams {
            t_mhsu: 8,
            ..DddmParams::default()
        };
        let rows = mhsu_status_broad(&records, &params).unwrap();
        assert_eq!(rows.len(), 3 * 2);
        let summary: Vec<_> = rows
            .iter()
            .map(|r| {
                (
                    r.window_index.unwrap(),
                    r.client_id.as_str(),
                    r.mhsu_yes(),
                    r.mh_yes(),
                )
            })
            .collect();
        assert_eq!(
            summary,
            [
                (1, "A", true, true),
                (1, "B", false, false),
                (2, "A", false, true),
                (2, "B", false, false),
                (3, "A", false, false),
                (3, "B", false, true),
            ]
        );
        // B is idle in window 1 so it has no dates there.
        assert_eq!(rows[1].mh_earliest, None);
    }

    #[test]
    fn single_window_matches_basic() {
        let records = vec![visit("A", 0, &["F100"], &[]), visit("B", 4, &[], &["F060"])];
        let params = DddmParams::default();
        let broad = mhsu_status_broad(&records, &params).unwrap();
        let mut basic = mhsu_status_basic(&records, &params, SpanCheck::Enforce).unwrap();
        basic.iter_mut().for_each(|r| r.window_index = Some(1));
        assert_eq!(broad, basic);
    }

    #[test]
    fn aggregate_ors_across_windows() {
        let records = vec![
            visit("A", 0, &["F100"], &[]),
            visit("A", 9, &[], &["F060"]),
            visit("A", 9, &["F100"], &[]),
        ];
        let params = DddmParams {
            t_mhsu: 8,
            ..DddmParams::default()
        };
        let rows = mhsu_status_broad(&records, &params).unwrap();
        assert!(!rows[0].mhsu_yes());
        assert!(rows[2].mhsu_yes());
        let agg = aggregate_windows(&rows);
        assert_eq!(agg.len(), 1);
        assert!(agg[0].mhsu_yes());
        assert_eq!(agg[0].window_index, None);
        assert_eq!(agg[0].su_earliest, Some(d(0)));
        assert_eq!(agg[0].su_latest, Some(d(9)));
    }

    #[test]
    fn aggregate_of_single_window_is_identity() {
        let records = vec![visit("A", 0, &["F100"], &[]), visit("B", 4, &[], &["F060"])];
        let rows = mhsu_status_broad(&records, &DddmParams::default()).unwrap();
        let mut expected = rows.clone();
        expected.iter_mut().for_each(|r| r.window_index = None);
        assert_eq!(aggregate_windows(&rows), expected);
    }
}
