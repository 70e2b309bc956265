use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::record::ClientId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Yes,
    No,
}

impl Status {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Status::Yes
        } else {
            Status::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Status::Yes
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Yes => "YES",
            Status::No => "NO",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "YES" => Ok(Status::Yes),
            "NO" => Ok(Status::No),
            other => Err(format!("expected YES or NO, got {other:?}")),
        }
    }
}

/// Per-patient detection output.
///
/// MH-only tables leave the SU fields and `mhsu_status` empty and vice versa.
/// `window_index` is 1-based and only set by the windowed detection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusRecord {
    pub client_id: ClientId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mh_earliest: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mh_latest: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mh_status: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub su_earliest: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub su_latest: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub su_status: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mhsu_status: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_index: Option<u32>,
}

impl StatusRecord {
    pub fn empty(client_id: ClientId) -> Self {
        Self {
            client_id,
            mh_earliest: None,
            mh_latest: None,
            mh_status: None,
            su_earliest: None,
            su_latest: None,
            su_status: None,
            mhsu_status: None,
            window_index: None,
        }
    }

    pub fn mh_yes(&self) -> bool {
        self.mh_status.is_some_and(Status::is_yes)
    }

    pub fn su_yes(&self) -> bool {
        self.su_status.is_some_and(Status::is_yes)
    }

    pub fn mhsu_yes(&self) -> bool {
        self.mhsu_status.is_some_and(Status::is_yes)
    }
}

/// Which status columns a table carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableLayout {
    pub mh: bool,
    pub su: bool,
    pub mhsu: bool,
    pub window: bool,
}

impl TableLayout {
    pub const CONCURRENT: TableLayout = TableLayout {
        mh: true,
        su: true,
        mhsu: true,
        window: false,
    };

    /// Derives the layout from the populated status fields of `rows`.
    ///
    /// An empty table is treated as a concurrent table.
    pub fn of(rows: &[StatusRecord]) -> Self {
        let Some(first) = rows.first() else {
            return Self::CONCURRENT;
        };
        Self {
            mh: first.mh_status.is_some(),
            su: first.su_status.is_some(),
            mhsu: first.mhsu_status.is_some(),
            window: first.window_index.is_some(),
        }
    }
}
