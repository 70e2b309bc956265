//! Per-patient detection of MH, SU and concurrent MHSU status.
//!
//! A condition is present when enough coded visits of one kind (hospital or
//! physician) fall inside a closed span of at most `t` days. The two visit
//! streams are evaluated separately and joined by OR; they never pool toward
//! one threshold. A visit carrying several matching codes counts once.

mod window;

pub use window::{aggregate_windows, mhsu_status_broad, plan_windows, WindowPlan};

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::icd::CodeSet;
use crate::params::{Condition, DddmParams, StreamCriteria};
use crate::record::{date_from_day, date_range, span_days, ClientId, VisitRecord};
use crate::status::{Status, StatusRecord};

/// Whether the basic concurrent detection checks that the data fits inside
/// one `t_mhsu` span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpanCheck {
    #[default]
    Enforce,
    /// Compute MH AND SU regardless of the data span.
    Force,
}

/// True iff some `n` entries of the ascending `days` lie within `t` days of
/// each other (latest minus earliest at most `t`).
///
/// Same-day entries count separately.
pub fn qualifying_window_exists(days: &[i64], n: u32, t: u32) -> bool {
    let n = n as usize;
    if n == 0 {
        return true;
    }
    if days.len() < n {
        return false;
    }
    let t = i64::from(t);
    days.windows(n).any(|w| w[n - 1] - w[0] <= t)
}

pub fn mh_status(records: &[VisitRecord], criteria: &StreamCriteria) -> Result<Vec<StatusRecord>> {
    debug_assert_eq!(criteria.condition, Condition::Mh);
    condition_status(records, criteria)
}

pub fn su_status(records: &[VisitRecord], criteria: &StreamCriteria) -> Result<Vec<StatusRecord>> {
    debug_assert_eq!(criteria.condition, Condition::Su);
    condition_status(records, criteria)
}

/// Single-condition detection; which columns are filled follows
/// `criteria.condition`. One row per client, sorted by client id.
pub fn condition_status(
    records: &[VisitRecord],
    criteria: &StreamCriteria,
) -> Result<Vec<StatusRecord>> {
    criteria.validate()?;
    let index = ClientIndex::build(records, &criteria.codes, &criteria.codes);
    Ok(index
        .clients
        .iter()
        .map(|client| {
            let streams = match criteria.condition {
                Condition::Mh => &client.mh,
                Condition::Su => &client.su,
            };
            let outcome = streams.evaluate(criteria, None);
            let mut row = StatusRecord::empty(client.id.clone());
            match criteria.condition {
                Condition::Mh => outcome.write_mh(&mut row),
                Condition::Su => outcome.write_su(&mut row),
            }
            row
        })
        .collect())
}

/// Concurrent detection assuming the whole input fits in one `t_mhsu` span.
pub fn mhsu_status_basic(
    records: &[VisitRecord],
    params: &DddmParams,
    span_check: SpanCheck,
) -> Result<Vec<StatusRecord>> {
    params.validate()?;
    if span_check == SpanCheck::Enforce {
        if let Some((min, max)) = date_range(records) {
            let span = span_days(min, max);
            if span > i64::from(params.t_mhsu) {
                return Err(Error::SpanExceedsConcurrentWindow {
                    span_days: span,
                    t_mhsu: params.t_mhsu,
                });
            }
        }
    }
    let index = ClientIndex::build(records, &params.icd_mh, &params.icd_su);
    Ok(index.evaluate_concurrent(params, None, None))
}

/// Earliest/latest coded dates and status of one condition for one client.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Outcome {
    earliest: Option<i64>,
    latest: Option<i64>,
    status: Status,
}

impl Outcome {
    fn write_mh(self, row: &mut StatusRecord) {
        row.mh_earliest = self.earliest.map(date_from_day);
        row.mh_latest = self.latest.map(date_from_day);
        row.mh_status = Some(self.status);
    }

    fn write_su(self, row: &mut StatusRecord) {
        row.su_earliest = self.earliest.map(date_from_day);
        row.su_latest = self.latest.map(date_from_day);
        row.su_status = Some(self.status);
    }
}

/// Sorted day numbers of a client's coded hospital and physician visits.
#[derive(Debug, Default, Clone)]
pub(crate) struct Streams {
    hospital: Vec<i64>,
    physician: Vec<i64>,
}

impl Streams {
    fn sort(&mut self) {
        self.hospital.sort_unstable();
        self.physician.sort_unstable();
    }

    /// Evaluates the criteria over visits whose day lies in `range`
    /// (inclusive), or over every visit when `range` is `None`.
    fn evaluate(&self, criteria: &StreamCriteria, range: Option<(i64, i64)>) -> Outcome {
        let hospital = restrict(&self.hospital, range);
        let physician = restrict(&self.physician, range);
        let earliest = [hospital.first(), physician.first()]
            .into_iter()
            .flatten()
            .min()
            .copied();
        let latest = [hospital.last(), physician.last()]
            .into_iter()
            .flatten()
            .max()
            .copied();
        let yes =
            qualifying_window_exists(hospital, criteria.hospital_visits, criteria.max_span_days)
                || qualifying_window_exists(
                    physician,
                    criteria.physician_visits,
                    criteria.max_span_days,
                );
        Outcome {
            earliest,
            latest,
            status: Status::from_bool(yes),
        }
    }
}

fn restrict(days: &[i64], range: Option<(i64, i64)>) -> &[i64] {
    match range {
        None => days,
        Some((lo, hi)) => {
            let start = days.partition_point(|&d| d < lo);
            let end = days.partition_point(|&d| d <= hi);
            &days[start..end.max(start)]
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ClientEntry {
    pub(crate) id: ClientId,
    mh: Streams,
    su: Streams,
    /// Every visit day of the client, coded or not.
    visits: Vec<i64>,
}

impl ClientEntry {
    pub(crate) fn has_visit_in(&self, lo: i64, hi: i64) -> bool {
        !restrict(&self.visits, Some((lo, hi))).is_empty()
    }
}

/// Records regrouped per client, sorted by client id.
#[derive(Debug, Clone)]
pub(crate) struct ClientIndex {
    pub(crate) clients: Vec<ClientEntry>,
}

impl ClientIndex {
    pub(crate) fn build(records: &[VisitRecord], mh_codes: &CodeSet, su_codes: &CodeSet) -> Self {
        let mut by_client: BTreeMap<&ClientId, ClientEntry> = BTreeMap::new();
        for record in records {
            let entry = by_client
                .entry(&record.client_id)
                .or_insert_with(|| ClientEntry {
                    id: record.client_id.clone(),
                    mh: Streams::default(),
                    su: Streams::default(),
                    visits: Vec::new(),
                });
            let day = record.day();
            entry.visits.push(day);
            let matches = |codes: &CodeSet, set: &CodeSet| !codes.is_disjoint(set);
            if matches(&record.hospital_codes, mh_codes) {
                entry.mh.hospital.push(day);
            }
            if matches(&record.physician_codes, mh_codes) {
                entry.mh.physician.push(day);
            }
            if matches(&record.hospital_codes, su_codes) {
                entry.su.hospital.push(day);
            }
            if matches(&record.physician_codes, su_codes) {
                entry.su.physician.push(day);
            }
        }
        let clients = by_client
            .into_values()
            .map(|mut entry| {
                entry.mh.sort();
                entry.su.sort();
                entry.visits.sort_unstable();
                entry
            })
            .collect();
        Self { clients }
    }

    /// One concurrent row per client, restricted to `range` when given.
    pub(crate) fn evaluate_concurrent(
        &self,
        params: &DddmParams,
        range: Option<(i64, i64)>,
        window_index: Option<u32>,
    ) -> Vec<StatusRecord> {
        let mh = params.mh_criteria();
        let su = params.su_criteria();
        self.clients
            .iter()
            .map(|client| concurrent_row(client, &mh, &su, range, window_index))
            .collect()
    }
}

fn concurrent_row(
    client: &ClientEntry,
    mh: &StreamCriteria,
    su: &StreamCriteria,
    range: Option<(i64, i64)>,
    window_index: Option<u32>,
) -> StatusRecord {
    let mh_outcome = client.mh.evaluate(mh, range);
    let su_outcome = client.su.evaluate(su, range);
    let mut row = StatusRecord::empty(client.id.clone());
    mh_outcome.write_mh(&mut row);
    su_outcome.write_su(&mut row);
    row.mhsu_status = Some(Status::from_bool(
        mh_outcome.status.is_yes() && su_outcome.status.is_yes(),
    ));
    row.window_index = window_index;
    row
}

/// Day range `[lo, hi]` for a pair of dates.
pub(crate) fn day_range(start: NaiveDate, end: NaiveDate) -> (i64, i64) {
    (
        crate::record::day_number(start),
        crate::record::day_number(end),
    )
}
