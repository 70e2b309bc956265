//! ICD diagnostic codes.
//!
//! Codes are version-agnostic tokens of 3 to 5 uppercase alphanumeric
//! characters written without a decimal point (`F063`, `T4041`, `J10`).
//! Matching is exact after normalisation; there is no prefix expansion.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IcdCode(String);

impl IcdCode {
    pub const MIN_LEN: usize = 3;
    pub const MAX_LEN: usize = 5;

    /// Trims and upper-cases `raw`, then checks the code shape.
    pub fn parse(raw: &str) -> Result<Self, Error> {
        let code = raw.trim().to_ascii_uppercase();
        let invalid = |reason| Error::InvalidIcdCode {
            code: raw.to_string(),
            reason,
        };
        if code.contains('.') {
            return Err(invalid("codes are written without a decimal point"));
        }
        if !(Self::MIN_LEN..=Self::MAX_LEN).contains(&code.len()) {
            return Err(invalid("length must be 3 to 5 characters"));
        }
        if !code
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
        {
            return Err(invalid("only letters A-Z and digits 0-9 are allowed"));
        }
        Ok(Self(code))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for IcdCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for IcdCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for IcdCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for IcdCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        IcdCode::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// A duplicate-free, ordered set of codes.
pub type CodeSet = BTreeSet<IcdCode>;

/// Parses a comma-separated list (`"F063,J10"`) into a set.
///
/// The literal `NA` and the empty string both yield an empty set.
pub fn parse_code_list(field: &str) -> Result<CodeSet, Error> {
    let field = field.trim();
    if field.is_empty() || field == "NA" {
        return Ok(CodeSet::new());
    }
    field.split(',').map(IcdCode::parse).collect()
}

/// Inverse of [`parse_code_list`]; an empty set renders as `NA`.
pub fn format_code_list(codes: &CodeSet) -> String {
    if codes.is_empty() {
        return "NA".to_string();
    }
    codes
        .iter()
        .map(IcdCode::as_str)
        .collect::<Vec<_>>()
        .join(",")
}

/// Builds a set from string literals, panicking on malformed input.
///
/// Intended for constants and tests.
pub fn code_set<'a>(codes: impl IntoIterator<Item = &'a str>) -> CodeSet {
    codes
        .into_iter()
        .map(|c| IcdCode::parse(c).unwrap_or_else(|e| panic!("{e}")))
        .collect()
}

/// MH codes from the worked examples: psychotic, mood, anxiety and neurocognitive disorders.
pub const DEFAULT_MH_CODES: [&str; 4] = ["F060", "F063", "F064", "F067"];
/// SU codes from the worked examples: alcohol, fentanyl, cannabis and cocaine use.
pub const DEFAULT_SU_CODES: [&str; 4] = ["F100", "T4041", "F120", "F140"];
