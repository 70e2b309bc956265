//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration as Elapsed, Instant};

use chrono::{Duration, NaiveDate};
use dddm::analytics::{summarize, sweep_visit_counts, sweep_within_span, SweepKind};
use dddm::detect::{
    aggregate_windows, condition_status, mh_status, mhsu_status_basic, mhsu_status_broad,
    plan_windows, su_status, SpanCheck,
};
use dddm::icd::code_set;
use dddm::ingest::{parse_dataset, write_dataset};
use dddm::simgen::{default_cohorts, generate_sample, sample_dataset, Placement};
use dddm::split::{split_by_id, split_by_time};
use dddm::{ClientId, DddmParams, StatusRecord, VisitRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    compare_concurrent, compare_condition, oracle_broad, oracle_concurrent, roster, yes_clients,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Elapsed, limit: Elapsed, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("{what} took {elapsed:?}, limit {limit:?}")
    })
}

fn example_summary() -> Check {
    let started = Instant::now();
    let records = sample_dataset();
    let rows = mhsu_status_basic(&records, &DddmParams::default(), SpanCheck::Enforce)
        .map_err(|e| e.to_string())?;
    let line = summarize(&rows).render_row();
    let elapsed = started.elapsed();
    ensure(line == "125 0.625 125 0.625 100 0.500", || {
        format!("summary was {line:?}")
    })?;
    within(
        elapsed,
        Elapsed::from_secs(1),
        "generation + detection + summary",
    )?;
    Ok(format!("{line:?} in {elapsed:?}"))
}

fn visit_count_points() -> Check {
    let records = sample_dataset();
    let base = SweepKind::VisitCount.default_base();
    ensure(
        (base.t_mh, base.t_su, base.t_mhsu) == (183, 183, 365),
        || format!("base spans {base:?}"),
    )?;
    let series =
        sweep_visit_counts(&records, &base, &[1, 2, 3, 7], 2).map_err(|e| e.to_string())?;
    let got: Vec<_> = series
        .points
        .iter()
        .map(|p| (p.x, p.mh, p.su, p.mhsu))
        .collect();
    let want = vec![
        (1, Some(125), Some(125), 100),
        (2, got[1].1, got[1].2, 90),
        (3, got[2].1, got[2].2, 70),
        (7, Some(0), Some(0), 0),
    ];
    ensure(got == want, || format!("points {got:?}"))?;
    Ok("x=1 (125,125,100), x=2 mhsu 90, x=3 mhsu 70, x=7 (0,0,0)".into())
}

fn within_span_asymptote() -> Check {
    let records = sample_dataset();
    let base = SweepKind::WithinSpan.default_base();
    ensure(
        (base.n_mhh, base.n_mhp, base.n_suh, base.n_sup, base.t_mhsu) == (2, 2, 2, 2, 365),
        || format!("base {base:?}"),
    )?;
    let grid: Vec<u32> = (0..=56).step_by(7).collect();
    let series = sweep_within_span(&records, &base, &grid).map_err(|e| e.to_string())?;
    let triples: Vec<_> = series
        .points
        .iter()
        .map(|p| (p.mh.unwrap_or(0), p.su.unwrap_or(0), p.mhsu))
        .collect();
    for pair in triples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        ensure(a.0 <= b.0 && a.1 <= b.1 && a.2 <= b.2, || {
            format!("not nondecreasing: {triples:?}")
        })?;
    }
    let last = *triples.last().unwrap();
    ensure(last == (125, 115, 90), || format!("x=56 gave {last:?}"))?;
    Ok(format!(
        "x=56 {last:?}, nondecreasing over {} points",
        grid.len()
    ))
}

fn window_formula() -> Check {
    let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let plan = plan_windows(start, start + Duration::days(362), 360);
    ensure(plan.window_count == 4, || {
        format!("k = {}", plan.window_count)
    })?;

    // Generated cohort stretched to exactly 363 days by two uncoded visits.
    let mut records = sample_dataset();
    let (min, _) = dddm::date_range(&records).unwrap();
    let anchor = ClientId::new("001").unwrap();
    for offset in [0, 362] {
        records.push(VisitRecord::new(
            anchor.clone(),
            min + Duration::days(offset),
            Default::default(),
            Default::default(),
        ));
    }
    let (lo, hi) = dddm::date_range(&records).unwrap();
    ensure(dddm::span_days(lo, hi) == 363, || {
        "fixture span is not 363 days".into()
    })?;
    let params = DddmParams {
        t_mhsu: 360,
        ..DddmParams::default()
    };
    let broad = mhsu_status_broad(&records, &params).map_err(|e| e.to_string())?;
    let clients = roster(&records).len();
    ensure(broad.len() == 4 * clients, || {
        format!("{} rows for {clients} clients", broad.len())
    })?;

    let whole = sample_dataset();
    let (lo, hi) = dddm::date_range(&whole).unwrap();
    let single = DddmParams {
        t_mhsu: dddm::span_days(lo, hi) as u32,
        ..DddmParams::default()
    };
    let broad = mhsu_status_broad(&whole, &single).map_err(|e| e.to_string())?;
    let mut basic =
        mhsu_status_basic(&whole, &single, SpanCheck::Enforce).map_err(|e| e.to_string())?;
    basic.iter_mut().for_each(|r| r.window_index = Some(1));
    ensure(broad == basic, || {
        "k=1 broad output differs from basic".into()
    })?;
    Ok(format!(
        "k=4, {} rows = 4 x {clients}, k=1 broad == basic",
        4 * clients
    ))
}

fn oracle_equivalence() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut windows = 0usize;
    for case in 0..200 {
        let records = common::random_dataset(&mut rng, 8, 12, 90);
        let params = common::random_params(&mut rng);
        let fail = |op: &str, e: String| format!("case {case} {op}: {e}\n  params {params:?}");
        let everyone = roster(&records);
        let expected = oracle_concurrent(&records, &everyone, &params, None);

        let mh =
            mh_status(&records, &params.mh_criteria()).map_err(|e| fail("mh", e.to_string()))?;
        compare_condition(&mh, &expected, true).map_err(|e| fail("mh", e))?;
        let su =
            su_status(&records, &params.su_criteria()).map_err(|e| fail("su", e.to_string()))?;
        compare_condition(&su, &expected, false).map_err(|e| fail("su", e))?;

        let (lo, hi) = dddm::date_range(&records).unwrap();
        let fits = dddm::span_days(lo, hi) <= i64::from(params.t_mhsu);
        match mhsu_status_basic(&records, &params, SpanCheck::Enforce) {
            Ok(rows) if fits => {
                compare_concurrent(&rows, &expected).map_err(|e| fail("basic", e))?
            }
            Err(dddm::Error::SpanExceedsConcurrentWindow { .. }) if !fits => {
                let rows = mhsu_status_basic(&records, &params, SpanCheck::Force)
                    .map_err(|e| fail("basic", e.to_string()))?;
                compare_concurrent(&rows, &expected).map_err(|e| fail("basic forced", e))?;
            }
            other => {
                return Err(fail(
                    "basic",
                    format!("unexpected span check outcome {:?}", other.map(|r| r.len())),
                ))
            }
        }

        let broad =
            mhsu_status_broad(&records, &params).map_err(|e| fail("broad", e.to_string()))?;
        let expected_broad = oracle_broad(&records, &params);
        compare_concurrent(&broad, &expected_broad).map_err(|e| fail("broad", e))?;
        windows += expected_broad.len() / everyone.len();
    }
    let elapsed = started.elapsed();
    within(elapsed, Elapsed::from_secs(30), "200 oracle cases")?;
    Ok(format!(
        "200/200 datasets agree ({windows} windows checked) in {elapsed:?}"
    ))
}

fn splitters() -> Check {
    let records = sample_dataset();
    let chunks = split_by_id(&records, 18).map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = chunks
        .iter()
        .map(|c| {
            c.iter()
                .map(|r| &r.client_id)
                .collect::<BTreeSet<_>>()
                .len()
        })
        .collect();
    let mut want = vec![18; 11];
    want.push(2);
    ensure(sizes == want, || format!("by-id chunk sizes {sizes:?}"))?;

    let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let daily: Vec<VisitRecord> = (0..363)
        .map(|d| {
            VisitRecord::new(
                ClientId::new("x").unwrap(),
                start + Duration::days(d),
                Default::default(),
                Default::default(),
            )
        })
        .collect();
    let t = 30.5;
    let slices = split_by_time(&daily, t, false).map_err(|e| e.to_string())?;
    ensure(slices.len() == 12, || {
        format!("by-time gave {} chunks", slices.len())
    })?;
    for (i, chunk) in slices.iter().enumerate() {
        let expected = i as f64 * (t + 1.0);
        ensure(
            chunk.index == i + 1
                && chunk.start_offset == expected
                && chunk.end_offset == expected + t,
            || {
                format!(
                    "chunk {} bounds [{}, {}]",
                    chunk.index, chunk.start_offset, chunk.end_offset
                )
            },
        )?;
        for r in &chunk.records {
            let off = (r.visit_date - start).num_days() as f64;
            ensure(off >= expected && off < expected + t + 1.0, || {
                format!("day {off} outside chunk {}", i + 1)
            })?;
        }
    }
    let total: usize = slices.iter().map(|c| c.records.len()).sum();
    ensure(total == daily.len(), || {
        "time chunks do not cover the data".into()
    })?;

    // Visits at days 0-2 and 40-42 with t=10: slices 2 and 3 are empty.
    let gapped: Vec<VisitRecord> = [0, 1, 2, 40, 41, 42]
        .iter()
        .map(|&d| {
            VisitRecord::new(
                ClientId::new("g").unwrap(),
                start + Duration::days(d),
                Default::default(),
                Default::default(),
            )
        })
        .collect();
    let lenient = split_by_time(&gapped, 10.0, false).map_err(|e| e.to_string())?;
    let strict = split_by_time(&gapped, 10.0, true).map_err(|e| e.to_string())?;
    let idx = |c: &[dddm::split::TimeChunk]| {
        c.iter()
            .map(|c| (c.index, c.records.len()))
            .collect::<Vec<_>>()
    };
    ensure(idx(&lenient) == [(1, 3), (4, 3)], || {
        format!("lenient {:?}", idx(&lenient))
    })?;
    ensure(idx(&strict) == [(1, 3)], || {
        format!("strict {:?}", idx(&strict))
    })?;
    Ok("200/18 -> 18x11+2, T=363 t=30.5 -> 12 chunks, strict stops at gap".into())
}

const PROPERTY_CASES: usize = 150;

fn shuffled(records: &[VisitRecord], rng: &mut impl Rng) -> Vec<VisitRecord> {
    let mut copy = records.to_vec();
    copy.shuffle(rng);
    copy
}

fn property(
    name: &str,
    seed: u64,
    mut check: impl FnMut(&mut ChaCha8Rng, &[VisitRecord], &DddmParams) -> Result<(), String>,
) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..PROPERTY_CASES {
        let records = common::random_dataset(&mut rng, 8, 12, 120);
        let params = common::random_params(&mut rng);
        check(&mut rng, &records, &params).map_err(|e| format!("{name} case {case}: {e}"))?;
    }
    Ok(format!("{PROPERTY_CASES} instances"))
}

fn basic(records: &[VisitRecord], params: &DddmParams) -> Result<Vec<StatusRecord>, String> {
    mhsu_status_basic(records, params, SpanCheck::Force).map_err(|e| e.to_string())
}

fn span_monotonicity() -> Check {
    property("span monotonicity", 11, |rng, records, params| {
        let wider = DddmParams {
            t_mh: params.t_mh + rng.random_range(1..=20),
            t_su: params.t_su + rng.random_range(1..=20),
            ..params.clone()
        };
        let (a, b) = (basic(records, params)?, basic(records, &wider)?);
        for pick in [
            StatusRecord::mh_yes as fn(&StatusRecord) -> bool,
            StatusRecord::su_yes,
            StatusRecord::mhsu_yes,
        ] {
            ensure(
                yes_clients(&a, pick).is_subset(&yes_clients(&b, pick)),
                || "YES set shrank".into(),
            )?;
        }
        let agg = |p: &DddmParams| {
            mhsu_status_broad(records, p)
                .map(|rows| yes_clients(&aggregate_windows(&rows), StatusRecord::mhsu_yes))
                .map_err(|e| e.to_string())
        };
        let longer = DddmParams {
            t_mhsu: params.t_mhsu + rng.random_range(1..=20),
            ..params.clone()
        };
        ensure(agg(params)?.is_subset(&agg(&longer)?), || {
            "windowed MHSU shrank with t_mhsu".into()
        })
    })
}

fn count_antitonicity() -> Check {
    property("count antitonicity", 12, |rng, records, params| {
        let stricter = DddmParams {
            n_mhh: params.n_mhh + rng.random_range(0..=2),
            n_mhp: params.n_mhp + rng.random_range(0..=2),
            n_suh: params.n_suh + rng.random_range(0..=2),
            n_sup: params.n_sup + rng.random_range(0..=2),
            ..params.clone()
        };
        let (a, b) = (basic(records, params)?, basic(records, &stricter)?);
        for pick in [
            StatusRecord::mh_yes as fn(&StatusRecord) -> bool,
            StatusRecord::su_yes,
            StatusRecord::mhsu_yes,
        ] {
            ensure(
                yes_clients(&b, pick).is_subset(&yes_clients(&a, pick)),
                || "YES set grew".into(),
            )?;
        }
        Ok(())
    })
}

fn conjunction() -> Check {
    property("conjunction", 13, |_, records, params| {
        let mut rows = basic(records, params)?;
        rows.extend(mhsu_status_broad(records, params).map_err(|e| e.to_string())?);
        for r in &rows {
            ensure(r.mhsu_yes() == (r.mh_yes() && r.su_yes()), || {
                format!("row {r:?}")
            })?;
        }
        Ok(())
    })
}

fn permutation_invariance() -> Check {
    property("permutation invariance", 14, |rng, records, params| {
        let other = shuffled(records, rng);
        ensure(basic(records, params)? == basic(&other, params)?, || {
            "basic output changed".into()
        })?;
        let broad = |r: &[VisitRecord]| mhsu_status_broad(r, params).map_err(|e| e.to_string());
        ensure(broad(records)? == broad(&other)?, || {
            "broad output changed".into()
        })?;
        let cond = |r: &[VisitRecord]| {
            condition_status(r, &params.mh_criteria()).map_err(|e| e.to_string())
        };
        ensure(cond(records)? == cond(&other)?, || {
            "mh output changed".into()
        })
    })
}

fn split_then_detect() -> Check {
    property("split-then-detect", 15, |rng, records, params| {
        let whole = basic(records, params)?;
        let n = rng.random_range(1..=4);
        let mut pieces = Vec::new();
        for chunk in split_by_id(records, n).map_err(|e| e.to_string())? {
            pieces.extend(basic(&chunk, params)?);
        }
        pieces.sort_by(|a, b| a.client_id.cmp(&b.client_id));
        ensure(pieces == whole, || {
            format!("by-id chunks of {n} disagree with whole-table detection")
        })
    })
}

fn csv_round_trip() -> Check {
    let write = |records: &[VisitRecord]| -> Result<Vec<u8>, String> {
        let mut buf = Vec::new();
        write_dataset(records, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let mut multi = sample_dataset();
    let stamp = NaiveDate::from_ymd_opt(2024, 3, 5).unwrap();
    multi.push(VisitRecord::new(
        ClientId::new("201").unwrap(),
        stamp,
        code_set(["F060", "F100", "I10"]),
        code_set(["T4041", "F063"]),
    ));
    let seeded = generate_sample(&default_cohorts(), Placement::SeededUniform { seed: 7 })
        .map_err(|e| e.to_string())?;
    for dataset in [multi, seeded] {
        let first = write(&dataset)?;
        let parsed = parse_dataset(first.as_slice()).map_err(|e| e.to_string())?;
        ensure(parsed.records == dataset, || {
            "parsed records differ from generated".into()
        })?;
        let second = write(&parsed.records)?;
        ensure(first == second, || {
            "second write is not byte-identical".into()
        })?;
    }
    Ok("deterministic + seeded datasets byte-identical, multi-code rows preserved".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("example summary reproduction", example_summary),
        ("visit-count capture points", visit_count_points),
        ("within-span asymptote", within_span_asymptote),
        ("window count formula", window_formula),
        ("brute-force oracle equivalence", oracle_equivalence),
        ("splitters", splitters),
        ("property: span monotonicity", span_monotonicity),
        ("property: count antitonicity", count_antitonicity),
        ("property: conjunction", conjunction),
        ("property: permutation invariance", permutation_invariance),
        ("property: split-then-detect", split_then_detect),
        ("csv round-trip", csv_round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
