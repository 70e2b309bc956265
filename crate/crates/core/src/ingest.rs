//! Dataset and status-table CSV I/O.
//!
//! Visit files carry `ClientID,VisitDate,Diagnostic_H,Diagnostic_P`. Dates are
//! ISO-8601, missing diagnostics are written `NA`, and multi-code fields are
//! comma-separated inside RFC-4180 quotes (`"F063,J10"`).

use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::icd::{format_code_list, parse_code_list};
use crate::record::{ClientId, VisitRecord};
use crate::status::{Status, StatusRecord, TableLayout};

pub const COL_CLIENT: &str = "ClientID";
pub const COL_DATE: &str = "VisitDate";
pub const COL_HOSPITAL: &str = "Diagnostic_H";
pub const COL_PHYSICIAN: &str = "Diagnostic_P";

const NA: &str = "NA";

#[derive(Debug, Clone, Default)]
pub struct ParsedDataset {
    pub records: Vec<VisitRecord>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Columns {
    client: usize,
    date: usize,
    hospital: usize,
    physician: usize,
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or(Error::MissingColumn(name))
}

/// Reads a visit dataset, validating every row.
///
/// Unknown columns are ignored and duplicate rows are kept; both produce
/// warnings. Errors carry the 1-based line number of the offending row.
pub fn parse_dataset(input: impl Read) -> Result<ParsedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let cols = Columns {
        client: column(&headers, COL_CLIENT)?,
        date: column(&headers, COL_DATE)?,
        hospital: column(&headers, COL_HOSPITAL)?,
        physician: column(&headers, COL_PHYSICIAN)?,
    };
    let mut warnings = Vec::new();
    let known = [COL_CLIENT, COL_DATE, COL_HOSPITAL, COL_PHYSICIAN];
    for h in headers.iter().filter(|h| !known.contains(&h.trim())) {
        warnings.push(format!("ignoring unknown column {h:?}"));
    }

    let mut records = Vec::new();
    let mut seen: HashMap<Vec<String>, u64> = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| match e.position() {
            Some(pos) => Error::Parse {
                line: pos.line(),
                message: e.to_string(),
            },
            None => Error::Csv(e),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        let field = |i: usize| row.get(i).unwrap_or("").trim();

        let client_id = ClientId::new(field(cols.client))
            .map_err(|_| parse_err(format!("{COL_CLIENT} is empty")))?;
        let raw_date = field(cols.date);
        let visit_date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|e| parse_err(format!("invalid {COL_DATE} {raw_date:?}: {e}")))?;
        let hospital_codes = parse_code_list(field(cols.hospital))
            .map_err(|e| parse_err(format!("{COL_HOSPITAL}: {e}")))?;
        let physician_codes = parse_code_list(field(cols.physician))
            .map_err(|e| parse_err(format!("{COL_PHYSICIAN}: {e}")))?;

        let key: Vec<String> = [cols.client, cols.date, cols.hospital, cols.physician]
            .iter()
            .map(|&i| field(i).to_string())
            .collect();
        if let Some(first) = seen.insert(key, line) {
            warnings.push(format!("line {line} duplicates line {first}; both kept"));
        }
        records.push(VisitRecord::new(
            client_id,
            visit_date,
            hospital_codes,
            physician_codes,
        ));
    }
    Ok(ParsedDataset { records, warnings })
}

/// Writes records in the order given.
pub fn write_dataset(records: &[VisitRecord], output: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record([COL_CLIENT, COL_DATE, COL_HOSPITAL, COL_PHYSICIAN])?;
    for r in records {
        writer.write_record([
            r.client_id.as_str(),
            &r.visit_date.format("%Y-%m-%d").to_string(),
            &format_code_list(&r.hospital_codes),
            &format_code_list(&r.physician_codes),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn status_header(layout: TableLayout) -> Vec<&'static str> {
    let mut header = vec![COL_CLIENT];
    if layout.mh {
        header.extend(["MH_Earliest", "MH_Latest", "MH_Status"]);
    }
    if layout.su {
        header.extend(["SU_Earliest", "SU_Latest", "SU_Status"]);
    }
    if layout.mhsu {
        header.push("MHSU_Status");
    }
    if layout.window {
        header.push("Window");
    }
    header
}

fn fmt_date(date: Option<NaiveDate>) -> String {
    date.map_or_else(|| NA.to_string(), |d| d.format("%Y-%m-%d").to_string())
}

fn fmt_status(status: Option<Status>) -> String {
    status.map_or(NA, Status::as_str).to_string()
}

/// Writes a status table; the column groups follow [`TableLayout::of`].
pub fn write_status_table(rows: &[StatusRecord], output: impl Write) -> Result<()> {
    let layout = TableLayout::of(rows);
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(status_header(layout))?;
    for row in rows {
        let mut fields = vec![row.client_id.to_string()];
        if layout.mh {
            fields.extend([
                fmt_date(row.mh_earliest),
                fmt_date(row.mh_latest),
                fmt_status(row.mh_status),
            ]);
        }
        if layout.su {
            fields.extend([
                fmt_date(row.su_earliest),
                fmt_date(row.su_latest),
                fmt_status(row.su_status),
            ]);
        }
        if layout.mhsu {
            fields.push(fmt_status(row.mhsu_status));
        }
        if layout.window {
            fields.push(
                row.window_index
                    .map_or_else(|| NA.to_string(), |w| w.to_string()),
            );
        }
        writer.write_record(&fields)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a table produced by [`write_status_table`].
pub fn read_status_table(input: impl Read) -> Result<Vec<StatusRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let client = column(&headers, COL_CLIENT)?;
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mh = (find("MH_Earliest"), find("MH_Latest"), find("MH_Status"));
    let su = (find("SU_Earliest"), find("SU_Latest"), find("SU_Status"));
    let mhsu = find("MHSU_Status");
    let window = find("Window");

    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        let get = |i: Option<usize>| {
            i.and_then(|i| row.get(i))
                .map(str::trim)
                .filter(|v| *v != NA && !v.is_empty())
        };
        let date = |i: Option<usize>| -> Result<Option<NaiveDate>> {
            get(i)
                .map(|v| {
                    NaiveDate::parse_from_str(v, "%Y-%m-%d")
                        .map_err(|e| parse_err(format!("{v:?}: {e}")))
                })
                .transpose()
        };
        let status = |i: Option<usize>| -> Result<Option<Status>> {
            get(i)
                .map(|v| v.parse::<Status>().map_err(&parse_err))
                .transpose()
        };
        let client_id = ClientId::new(row.get(client).unwrap_or("").trim())
            .map_err(|_| parse_err(format!("{COL_CLIENT} is empty")))?;
        rows.push(StatusRecord {
            client_id,
            mh_earliest: date(mh.0)?,
            mh_latest: date(mh.1)?,
            mh_status: status(mh.2)?,
            su_earliest: date(su.0)?,
            su_latest: date(su.1)?,
            su_status: status(su.2)?,
            mhsu_status: status(mhsu)?,
            window_index: get(window)
                .map(|v| {
                    v.parse::<u32>()
                        .map_err(|e| parse_err(format!("Window {v:?}: {e}")))
                })
                .transpose()?,
        });
    }
    Ok(rows)
}
