//! Shared fixtures and a brute-force reference implementation used to check
//! the detection routines.
//!
//! The oracle deliberately shares nothing with the library's evaluation
//! path: it filters raw records by code membership and enumerates every
//! n-element subset of a stream instead of sliding over sorted days.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, NaiveDate};
use dddm::icd::code_set;
use dddm::{ClientId, CodeSet, DddmParams, Status, StatusRecord, VisitRecord};
use itertools::Itertools;
use rand::Rng;

pub fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
}

pub fn visit(client: &str, offset: i64, hospital: &[&str], physician: &[&str]) -> VisitRecord {
    VisitRecord::new(
        ClientId::new(client).unwrap(),
        day0() + Duration::days(offset),
        code_set(hospital.iter().copied()),
        code_set(physician.iter().copied()),
    )
}

const MH_POOL: [&str; 2] = ["F060", "F063"];
const SU_POOL: [&str; 2] = ["F100", "T4041"];
const OTHER_POOL: [&str; 2] = ["I10", "J10"];

fn random_codes(rng: &mut impl Rng) -> CodeSet {
    let mut codes = BTreeSet::new();
    if rng.random_bool(0.35) {
        return CodeSet::new();
    }
    for pool in [&MH_POOL[..], &SU_POOL[..], &OTHER_POOL[..]] {
        if rng.random_bool(0.45) {
            codes.insert(pool[rng.random_range(0..pool.len())]);
        }
    }
    code_set(codes)
}

/// Up to `max_clients` clients with up to `max_visits` visits each, dated
/// within `horizon` days.
pub fn random_dataset(
    rng: &mut impl Rng,
    max_clients: usize,
    max_visits: usize,
    horizon: i64,
) -> Vec<VisitRecord> {
    let clients = rng.random_range(1..=max_clients);
    let mut records = Vec::new();
    for c in 0..clients {
        let id = format!("c{c}");
        for _ in 0..rng.random_range(1..=max_visits) {
            records.push(VisitRecord::new(
                ClientId::new(id.clone()).unwrap(),
                day0() + Duration::days(rng.random_range(0..horizon)),
                random_codes(rng),
                random_codes(rng),
            ));
        }
    }
    // Interleave clients so input order carries no structure.
    let len = records.len();
    for i in (1..len).rev() {
        records.swap(i, rng.random_range(0..=i));
    }
    records
}

pub fn random_params(rng: &mut impl Rng) -> DddmParams {
    DddmParams {
        n_mhh: rng.random_range(1..=4),
        n_mhp: rng.random_range(1..=4),
        n_suh: rng.random_range(1..=4),
        n_sup: rng.random_range(1..=4),
        t_mh: rng.random_range(0..=30),
        t_su: rng.random_range(0..=30),
        t_mhsu: rng.random_range(1..=70),
        icd_mh: code_set(MH_POOL),
        icd_su: code_set(SU_POOL),
    }
}

/// Brute force: does any `n`-subset of `days` fit in `t` days?
pub fn oracle_stream(days: &[i64], n: u32, t: u32) -> bool {
    days.iter().combinations(n as usize).any(|subset| {
        let lo = **subset.iter().min().unwrap();
        let hi = **subset.iter().max().unwrap();
        hi - lo <= i64::from(t)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCondition {
    pub earliest: Option<NaiveDate>,
    pub latest: Option<NaiveDate>,
    pub yes: bool,
}

pub fn oracle_condition(
    visits: &[&VisitRecord],
    codes: &CodeSet,
    n_h: u32,
    n_p: u32,
    t: u32,
) -> OracleCondition {
    let hits = |pick: fn(&VisitRecord) -> &CodeSet| -> Vec<i64> {
        visits
            .iter()
            .filter(|v| pick(v).iter().any(|c| codes.contains(c)))
            .map(|v| (v.visit_date - day0()).num_days())
            .collect()
    };
    let hospital = hits(|v| &v.hospital_codes);
    let physician = hits(|v| &v.physician_codes);
    let all: Vec<i64> = hospital.iter().chain(&physician).copied().collect();
    let date = |d: i64| day0() + Duration::days(d);
    OracleCondition {
        earliest: all.iter().min().map(|&d| date(d)),
        latest: all.iter().max().map(|&d| date(d)),
        yes: oracle_stream(&hospital, n_h, t) || oracle_stream(&physician, n_p, t),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleRow {
    pub client: String,
    pub mh: OracleCondition,
    pub su: OracleCondition,
    pub window: Option<u32>,
}

impl OracleRow {
    pub fn mhsu(&self) -> bool {
        self.mh.yes && self.su.yes
    }
}

fn by_client(records: &[VisitRecord]) -> BTreeMap<String, Vec<&VisitRecord>> {
    let mut map: BTreeMap<String, Vec<&VisitRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.client_id.to_string()).or_default().push(r);
    }
    map
}

/// Oracle for the concurrent detection on `records`, one row per client of
/// `roster` (clients absent from `records` get NO and no dates).
pub fn oracle_concurrent(
    records: &[VisitRecord],
    roster: &BTreeSet<String>,
    params: &DddmParams,
    window: Option<u32>,
) -> Vec<OracleRow> {
    let grouped = by_client(records);
    roster
        .iter()
        .map(|client| {
            let visits = grouped.get(client).cloned().unwrap_or_default();
            OracleRow {
                client: client.clone(),
                mh: oracle_condition(
                    &visits,
                    &params.icd_mh,
                    params.n_mhh,
                    params.n_mhp,
                    params.t_mh,
                ),
                su: oracle_condition(
                    &visits,
                    &params.icd_su,
                    params.n_suh,
                    params.n_sup,
                    params.t_su,
                ),
                window,
            }
        })
        .collect()
}

pub fn roster(records: &[VisitRecord]) -> BTreeSet<String> {
    records.iter().map(|r| r.client_id.to_string()).collect()
}

/// Oracle for the windowed detection: enumerate every 1-day-stride window
/// of `t_mhsu` days and evaluate each restriction independently.
pub fn oracle_broad(records: &[VisitRecord], params: &DddmParams) -> Vec<OracleRow> {
    let everyone = roster(records);
    let first = records.iter().map(|r| r.visit_date).min().unwrap();
    let last = records.iter().map(|r| r.visit_date).max().unwrap();
    let span = (last - first).num_days() + 1;
    let width = i64::from(params.t_mhsu);
    let windows = (span - width + 1).max(1);
    let mut rows = Vec::new();
    for w in 0..windows {
        let start = first + Duration::days(w);
        let end = start + Duration::days(width - 1);
        let inside: Vec<VisitRecord> = records
            .iter()
            .filter(|r| r.visit_date >= start && r.visit_date <= end)
            .cloned()
            .collect();
        rows.extend(oracle_concurrent(
            &inside,
            &everyone,
            params,
            Some(w as u32 + 1),
        ));
    }
    rows
}

fn status(yes: bool) -> Option<Status> {
    Some(if yes { Status::Yes } else { Status::No })
}

/// Compares library rows with oracle rows, returning a description of the
/// first mismatch.
pub fn compare_concurrent(actual: &[StatusRecord], expected: &[OracleRow]) -> Result<(), String> {
    if actual.len() != expected.len() {
        return Err(format!(
            "row count {} != oracle {}",
            actual.len(),
            expected.len()
        ));
    }
    for (a, e) in actual.iter().zip(expected) {
        let want = StatusRecord {
            client_id: ClientId::new(e.client.clone()).unwrap(),
            mh_earliest: e.mh.earliest,
            mh_latest: e.mh.latest,
            mh_status: status(e.mh.yes),
            su_earliest: e.su.earliest,
            su_latest: e.su.latest,
            su_status: status(e.su.yes),
            mhsu_status: status(e.mhsu()),
            window_index: e.window,
        };
        if *a != want {
            return Err(format!("mismatch:\n  library {a:?}\n  oracle  {want:?}"));
        }
    }
    Ok(())
}

/// Compares a single-condition table (MH-only or SU-only) with the oracle.
pub fn compare_condition(
    actual: &[StatusRecord],
    expected: &[OracleRow],
    mh: bool,
) -> Result<(), String> {
    if actual.len() != expected.len() {
        return Err(format!(
            "row count {} != oracle {}",
            actual.len(),
            expected.len()
        ));
    }
    for (a, e) in actual.iter().zip(expected) {
        let cond = if mh { &e.mh } else { &e.su };
        let got = if mh {
            (a.mh_earliest, a.mh_latest, a.mh_status)
        } else {
            (a.su_earliest, a.su_latest, a.su_status)
        };
        if a.client_id.as_str() != e.client || got != (cond.earliest, cond.latest, status(cond.yes))
        {
            return Err(format!(
                "mismatch for {}: library {got:?}, oracle {cond:?}",
                e.client
            ));
        }
    }
    Ok(())
}

pub fn yes_clients(rows: &[StatusRecord], pick: fn(&StatusRecord) -> bool) -> BTreeSet<String> {
    rows.iter()
        .filter(|r| pick(r))
        .map(|r| r.client_id.to_string())
        .collect()
}
