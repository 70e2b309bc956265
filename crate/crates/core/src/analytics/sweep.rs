//! Parameter sweeps: vary one parameter family, record detection counts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{aggregate_windows, mhsu_status_basic, mhsu_status_broad, SpanCheck};
use crate::error::{Error, FieldError, Result};
use crate::params::DddmParams;
use crate::record::VisitRecord;

/// Within-condition spans compared by default in a concurrent-span sweep.
pub const DEFAULT_WITHIN_SPANS: [u32; 3] = [14, 21, 28];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// `t_mh = t_su = x`.
    WithinSpan,
    /// `n_mhh = n_suh = x`, `n_mhp = n_sup = ratio * x`.
    VisitCount,
    /// `t_mhsu = y` for each of several within-condition spans.
    ConcurrentSpan,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::WithinSpan => "within-span",
            SweepKind::VisitCount => "visit-count",
            SweepKind::ConcurrentSpan => "concurrent-span",
        }
    }

    /// Default x grid: `0,7,...,56` days, `1..=8` visits, or `31k` days for
    /// `k = 1..=12`.
    pub fn default_grid(self) -> Vec<u32> {
        match self {
            SweepKind::WithinSpan => (0..=56).step_by(7).collect(),
            SweepKind::VisitCount => (1..=8).collect(),
            SweepKind::ConcurrentSpan => (1..=12).map(|k| 31 * k).collect(),
        }
    }

    /// Default fixed parameters for the sweep; the swept fields are
    /// overwritten per point.
    pub fn default_base(self) -> DddmParams {
        let base = DddmParams::default();
        match self {
            SweepKind::WithinSpan | SweepKind::ConcurrentSpan => DddmParams {
                n_mhh: 2,
                n_mhp: 2,
                n_suh: 2,
                n_sup: 2,
                t_mhsu: 365,
                ..base
            },
            SweepKind::VisitCount => DddmParams {
                t_mh: 183,
                t_su: 183,
                t_mhsu: 365,
                ..base
            },
        }
    }

    pub fn x_label(self) -> &'static str {
        match self {
            SweepKind::WithinSpan => "t_mh = t_su (days)",
            SweepKind::VisitCount => "n_mhh = n_suh (visits)",
            SweepKind::ConcurrentSpan => "t_mhsu (days)",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "within-span" => Ok(SweepKind::WithinSpan),
            "visit-count" => Ok(SweepKind::VisitCount),
            "concurrent-span" => Ok(SweepKind::ConcurrentSpan),
            other => Err(format!(
                "unknown sweep kind {other:?} (expected within-span, visit-count or concurrent-span)"
            )),
        }
    }
}

/// Patient counts at one grid value. `mh`/`su` are absent for
/// concurrent-span sweeps, which only track MHSU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mh: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub su: Option<usize>,
    pub mhsu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub kind: SweepKind,
    pub label: String,
    pub x_label: String,
    /// Parameters held fixed; swept fields show their first grid value.
    pub base: DddmParams,
    pub points: Vec<SweepPoint>,
}

fn check_grid(field: &str, grid: &[u32], min: u32) -> Result<()> {
    let mut errors = Vec::new();
    if grid.is_empty() {
        errors.push(FieldError::new(field, "grid is empty"));
    }
    if let Some(v) = grid.iter().find(|&&v| v < min) {
        errors.push(FieldError::new(
            field,
            format!("values must be at least {min}, got {v}"),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        errors.push(FieldError::new(field, "values must be strictly increasing"));
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(errors))
    }
}

fn basic_point(records: &[VisitRecord], x: u32, params: &DddmParams) -> Result<SweepPoint> {
    let rows = mhsu_status_basic(records, params, SpanCheck::Enforce)?;
    Ok(SweepPoint {
        x,
        mh: Some(rows.iter().filter(|r| r.mh_yes()).count()),
        su: Some(rows.iter().filter(|r| r.su_yes()).count()),
        mhsu: rows.iter().filter(|r| r.mhsu_yes()).count(),
    })
}

fn first_or_default(grid: &[u32], params: &mut DddmParams, apply: impl Fn(&mut DddmParams, u32)) {
    if let Some(&x) = grid.first() {
        apply(params, x);
    }
}

/// Counts at `t_mh = t_su = x` for each `x`, other parameters from `base`.
pub fn sweep_within_span(
    records: &[VisitRecord],
    base: &DddmParams,
    xs: &[u32],
) -> Result<SweepSeries> {
    check_grid("grid", xs, 0)?;
    let apply = |p: &mut DddmParams, x: u32| {
        p.t_mh = x;
        p.t_su = x;
    };
    let points = xs
        .par_iter()
        .map(|&x| {
            let mut params = base.clone();
            apply(&mut params, x);
            basic_point(records, x, &params)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut shown = base.clone();
    first_or_default(xs, &mut shown, apply);
    Ok(SweepSeries {
        kind: SweepKind::WithinSpan,
        label: format!(
            "n = {}/{}/{}/{}",
            base.n_mhh, base.n_mhp, base.n_suh, base.n_sup
        ),
        x_label: SweepKind::WithinSpan.x_label().to_string(),
        base: shown,
        points,
    })
}

/// Counts at `n_mhh = n_suh = x` and `n_mhp = n_sup = ratio * x`.
pub fn sweep_visit_counts(
    records: &[VisitRecord],
    base: &DddmParams,
    xs: &[u32],
    ratio: u32,
) -> Result<SweepSeries> {
    check_grid("grid", xs, 1)?;
    if ratio < 1 {
        return Err(Error::InvalidParams(vec![FieldError::new(
            "ratio",
            "must be at least 1",
        )]));
    }
    let apply = move |p: &mut DddmParams, x: u32| {
        p.n_mhh = x;
        p.n_suh = x;
        p.n_mhp = ratio * x;
        p.n_sup = ratio * x;
    };
    let points = xs
        .par_iter()
        .map(|&x| {
            let mut params = base.clone();
            apply(&mut params, x);
            basic_point(records, x, &params)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut shown = base.clone();
    first_or_default(xs, &mut shown, apply);
    Ok(SweepSeries {
        kind: SweepKind::VisitCount,
        label: format!("hospital:physician = 1:{ratio}"),
        x_label: SweepKind::VisitCount.x_label().to_string(),
        base: shown,
        points,
    })
}

/// Patient-level MHSU counts from the windowed detection at `t_mhsu = y`,
/// one series per within-condition span.
pub fn sweep_concurrent_span(
    records: &[VisitRecord],
    base: &DddmParams,
    within_spans: &[u32],
    ys: &[u32],
) -> Result<Vec<SweepSeries>> {
    check_grid("within_spans", within_spans, 0)?;
    check_grid("grid", ys, 1)?;
    within_spans
        .iter()
        .map(|&x| {
            let mut fixed = base.clone();
            fixed.t_mh = x;
            fixed.t_su = x;
            let points = ys
                .par_iter()
                .map(|&y| {
                    let params = DddmParams {
                        t_mhsu: y,
                        ..fixed.clone()
                    };
                    let rows = aggregate_windows(&mhsu_status_broad(records, &params)?);
                    Ok(SweepPoint {
                        x: y,
                        mh: None,
                        su: None,
                        mhsu: rows.iter().filter(|r| r.mhsu_yes()).count(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut shown = fixed.clone();
            if let Some(&y) = ys.first() {
                shown.t_mhsu = y;
            }
            Ok(SweepSeries {
                kind: SweepKind::ConcurrentSpan,
                label: format!("t_mh = t_su = {x}"),
                x_label: SweepKind::ConcurrentSpan.x_label().to_string(),
                base: shown,
                points,
            })
        })
        .collect()
}
