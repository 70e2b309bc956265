//! Partitioning a dataset by patient and by time, so large inputs can be
//! processed chunk by chunk.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::record::{ClientId, VisitRecord};

/// Splits records into `ceil(m / n)` chunks of `n` patients each (the last
/// may hold fewer). Patients are taken in order of first appearance, and all
/// of a patient's records land in the same chunk, in input order.
pub fn split_by_id(records: &[VisitRecord], n: usize) -> Result<Vec<Vec<VisitRecord>>> {
    if n < 1 {
        return Err(Error::InvalidParams(vec![FieldError::new(
            "n",
            "must be at least 1",
        )]));
    }
    let mut chunk_of: HashMap<&ClientId, usize> = HashMap::new();
    let mut chunks: Vec<Vec<VisitRecord>> = Vec::new();
    for record in records {
        let next = chunk_of.len();
        let chunk = *chunk_of.entry(&record.client_id).or_insert(next / n);
        if chunk == chunks.len() {
            chunks.push(Vec::new());
        }
        chunks[chunk].push(record.clone());
    }
    Ok(chunks)
}

/// A contiguous time slice; bounds are real-valued day offsets from the
/// dataset's earliest visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeChunk {
    /// 1-based position in the stride sequence. Skipped empty slices leave
    /// gaps in the numbering.
    pub index: usize,
    pub start_offset: f64,
    pub end_offset: f64,
    pub records: Vec<VisitRecord>,
}

/// Splits records into slices `[s_i, s_i + t]` with `s_i = (i - 1)(t + 1)`
/// days after the earliest visit.
///
/// By default slices continue until the start passes the latest visit and
/// empty ones are skipped. For fractional `t` a whole day can fall between
/// `s_i + t` and `s_{i+1}`; the default mode assigns it to slice `i` so no
/// record is lost. `strict_appendix` keeps the literal `s_i + t` bound and
/// stops at the first empty slice, which drops everything after a gap
/// longer than `t + 1` days.
pub fn split_by_time(
    records: &[VisitRecord],
    t: f64,
    strict_appendix: bool,
) -> Result<Vec<TimeChunk>> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidParams(vec![FieldError::new(
            "t",
            format!("must be a positive number of days, got {t}"),
        )]));
    }
    let first = records
        .iter()
        .map(VisitRecord::day)
        .min()
        .ok_or(Error::EmptyInput)?;
    let last = records
        .iter()
        .map(VisitRecord::day)
        .max()
        .ok_or(Error::EmptyInput)?;
    let mut by_offset: Vec<(f64, usize)> = records
        .iter()
        .enumerate()
        .map(|(i, r)| ((r.day() - first) as f64, i))
        .collect();
    by_offset.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let horizon = (last - first) as f64;

    let mut chunks = Vec::new();
    for i in 1usize.. {
        let start = (i - 1) as f64 * (t + 1.0);
        if start > horizon {
            break;
        }
        let end = start + t;
        let lo = by_offset.partition_point(|&(d, _)| d < start);
        let hi = if strict_appendix {
            by_offset.partition_point(|&(d, _)| d <= end)
        } else {
            by_offset.partition_point(|&(d, _)| d < end + 1.0)
        };
        let mut picked: Vec<usize> = by_offset[lo..hi.max(lo)]
            .iter()
            .map(|&(_, idx)| idx)
            .collect();
        picked.sort_unstable();
        let members: Vec<VisitRecord> =
            picked.into_iter().map(|idx| records[idx].clone()).collect();
        if members.is_empty() {
            if strict_appendix {
                break;
            }
            continue;
        }
        chunks.push(TimeChunk {
            index: i,
            start_offset: start,
            end_offset: end,
            records: members,
        });
    }
    Ok(chunks)
}
