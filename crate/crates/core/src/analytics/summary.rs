use serde::{Deserialize, Serialize};

use crate::status::StatusRecord;

/// YES counts and proportions of a status table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub rows: usize,
    pub mh_count: usize,
    pub mh_proportion: f64,
    pub su_count: usize,
    pub su_proportion: f64,
    pub mhsu_count: usize,
    pub mhsu_proportion: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub const SUMMARY_HEADER: [&str; 6] = [
    "MH_Count",
    "MH_Proportion",
    "SU_Count",
    "SU_Proportion",
    "MHSU_Count",
    "MHSU_Proportion",
];

pub fn summarize(table: &[StatusRecord]) -> SummaryStats {
    let rows = table.len();
    let count = |pred: fn(&StatusRecord) -> bool| table.iter().filter(|r| pred(r)).count();
    let mh_count = count(StatusRecord::mh_yes);
    let su_count = count(StatusRecord::su_yes);
    let mhsu_count = count(StatusRecord::mhsu_yes);
    let ratio = |c: usize| {
        if rows == 0 {
            0.0
        } else {
            c as f64 / rows as f64
        }
    };
    let mut warnings = Vec::new();
    if rows == 0 {
        warnings.push("status table is empty; proportions reported as 0".to_string());
    }
    SummaryStats {
        rows,
        mh_count,
        mh_proportion: ratio(mh_count),
        su_count,
        su_proportion: ratio(su_count),
        mhsu_count,
        mhsu_proportion: ratio(mhsu_count),
        warnings,
    }
}

/// `count / total` to three decimals, rounding halves up; `0.000` when
/// `total` is zero.
///
/// Computed in integer arithmetic so that exact halves are not at the
/// mercy of binary floating point.
pub fn format_proportion(count: usize, total: usize) -> String {
    if total == 0 {
        return "0.000".to_string();
    }
    let (count, total) = (count as u128, total as u128);
    let thousandths = (2 * 1000 * count + total) / (2 * total);
    format!("{}.{:03}", thousandths / 1000, thousandths % 1000)
}

impl SummaryStats {
    /// The six summary values as text, counts then 3-decimal proportions.
    pub fn rendered_values(&self) -> [String; 6] {
        [
            self.mh_count.to_string(),
            format_proportion(self.mh_count, self.rows),
            self.su_count.to_string(),
            format_proportion(self.su_count, self.rows),
            self.mhsu_count.to_string(),
            format_proportion(self.mhsu_count, self.rows),
        ]
    }

    /// Space-separated value row, e.g. `125 0.625 125 0.625 100 0.500`.
    pub fn render_row(&self) -> String {
        self.rendered_values().join(" ")
    }

    /// Header line followed by the value row.
    pub fn render_table(&self) -> String {
        format!("{}\n{}\n", SUMMARY_HEADER.join(" "), self.render_row())
    }
}
