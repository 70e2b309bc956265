//! Detection parameters: visit-count thresholds, time spans and code lists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError};
use crate::icd::{code_set, CodeSet, IcdCode, DEFAULT_MH_CODES, DEFAULT_SU_CODES};

/// Which condition a set of stream criteria detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Mh,
    Su,
}

impl Condition {
    fn count_field(self, stream: char) -> String {
        match self {
            Condition::Mh => format!("n_mh{stream}"),
            Condition::Su => format!("n_su{stream}"),
        }
    }

    fn codes_field(self) -> &'static str {
        match self {
            Condition::Mh => "icd_mh",
            Condition::Su => "icd_su",
        }
    }
}

/// Thresholds for one condition: at least `hospital_visits` hospital visits
/// or `physician_visits` physician visits, each group within `max_span_days`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamCriteria {
    pub condition: Condition,
    pub hospital_visits: u32,
    pub physician_visits: u32,
    pub max_span_days: u32,
    pub codes: CodeSet,
}

impl StreamCriteria {
    pub fn mh(
        hospital_visits: u32,
        physician_visits: u32,
        max_span_days: u32,
        codes: CodeSet,
    ) -> Self {
        Self {
            condition: Condition::Mh,
            hospital_visits,
            physician_visits,
            max_span_days,
            codes,
        }
    }

    pub fn su(
        hospital_visits: u32,
        physician_visits: u32,
        max_span_days: u32,
        codes: CodeSet,
    ) -> Self {
        Self {
            condition: Condition::Su,
            hospital_visits,
            physician_visits,
            max_span_days,
            codes,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let errors = self.field_errors();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errors))
        }
    }

    fn field_errors(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        if self.hospital_visits < 1 {
            errors.push(FieldError::new(
                self.condition.count_field('h'),
                "must be at least 1",
            ));
        }
        if self.physician_visits < 1 {
            errors.push(FieldError::new(
                self.condition.count_field('p'),
                "must be at least 1",
            ));
        }
        if self.codes.is_empty() {
            errors.push(FieldError::new(
                self.condition.codes_field(),
                "must contain at least one code",
            ));
        }
        errors
    }
}

/// The seven thresholds plus the two code lists.
///
/// `Default` is the configuration of the worked examples: one visit of
/// either kind, 60-day within-condition spans and a 365-day concurrent span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DddmParams {
    pub n_mhh: u32,
    pub n_mhp: u32,
    pub n_suh: u32,
    pub n_sup: u32,
    pub t_mh: u32,
    pub t_su: u32,
    pub t_mhsu: u32,
    pub icd_mh: CodeSet,
    pub icd_su: CodeSet,
}

impl Default for DddmParams {
    fn default() -> Self {
        Self {
            n_mhh: 1,
            n_mhp: 1,
            n_suh: 1,
            n_sup: 1,
            t_mh: 60,
            t_su: 60,
            t_mhsu: 365,
            icd_mh: code_set(DEFAULT_MH_CODES),
            icd_su: code_set(DEFAULT_SU_CODES),
        }
    }
}

impl DddmParams {
    pub fn mh_criteria(&self) -> StreamCriteria {
        StreamCriteria::mh(self.n_mhh, self.n_mhp, self.t_mh, self.icd_mh.clone())
    }

    pub fn su_criteria(&self) -> StreamCriteria {
        StreamCriteria::su(self.n_suh, self.n_sup, self.t_su, self.icd_su.clone())
    }

    /// Checks every invariant; on success returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>, Error> {
        let mut errors = self.mh_criteria().field_errors();
        errors.extend(self.su_criteria().field_errors());
        if self.t_mhsu < 1 {
            errors.push(FieldError::new("t_mhsu", "must be at least 1"));
        }
        if !errors.is_empty() {
            return Err(Error::InvalidParams(errors));
        }
        let overlap: Vec<&str> = self
            .icd_mh
            .intersection(&self.icd_su)
            .map(IcdCode::as_str)
            .collect();
        let mut warnings = Vec::new();
        if !overlap.is_empty() {
            warnings.push(format!(
                "codes listed for both MH and SU: {}",
                overlap.join(",")
            ));
        }
        Ok(warnings)
    }
}

/// Unvalidated parameters as they arrive from flags or JSON.
///
/// Missing fields fall back to a supplied default set; every problem is
/// reported at once, each naming its field.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RawParams {
    pub n_mhh: Option<i64>,
    pub n_mhp: Option<i64>,
    pub n_suh: Option<i64>,
    pub n_sup: Option<i64>,
    pub t_mh: Option<i64>,
    pub t_su: Option<i64>,
    pub t_mhsu: Option<i64>,
    pub icd_mh: Option<Vec<String>>,
    pub icd_su: Option<Vec<String>>,
}

impl RawParams {
    pub fn resolve(&self, defaults: &DddmParams) -> Result<DddmParams, Error> {
        let mut errors = Vec::new();
        let mut count = |field: &str, value: Option<i64>, default: u32, min: i64| -> u32 {
            match value {
                None => default,
                Some(v) if v < min => {
                    errors.push(FieldError::new(
                        field,
                        format!("must be at least {min}, got {v}"),
                    ));
                    default
                }
                Some(v) => match u32::try_from(v) {
                    Ok(v) => v,
                    Err(_) => {
                        errors.push(FieldError::new(field, format!("value {v} is too large")));
                        default
                    }
                },
            }
        };
        let n_mhh = count("n_mhh", self.n_mhh, defaults.n_mhh, 1);
        let n_mhp = count("n_mhp", self.n_mhp, defaults.n_mhp, 1);
        let n_suh = count("n_suh", self.n_suh, defaults.n_suh, 1);
        let n_sup = count("n_sup", self.n_sup, defaults.n_sup, 1);
        let t_mh = count("t_mh", self.t_mh, defaults.t_mh, 0);
        let t_su = count("t_su", self.t_su, defaults.t_su, 0);
        let t_mhsu = count("t_mhsu", self.t_mhsu, defaults.t_mhsu, 1);

        let mut codes = |field: &str, value: &Option<Vec<String>>, default: &CodeSet| -> CodeSet {
            let Some(list) = value else {
                return default.clone();
            };
            let mut set = CodeSet::new();
            for raw in list {
                match IcdCode::parse(raw) {
                    Ok(code) => {
                        set.insert(code);
                    }
                    Err(e) => errors.push(FieldError::new(field, e.to_string())),
                }
            }
            if set.is_empty() && !list.iter().any(|r| IcdCode::parse(r).is_err()) {
                errors.push(FieldError::new(field, "must contain at least one code"));
            }
            set
        };
        let icd_mh = codes("icd_mh", &self.icd_mh, &defaults.icd_mh);
        let icd_su = codes("icd_su", &self.icd_su, &defaults.icd_su);

        if !errors.is_empty() {
            return Err(Error::InvalidParams(errors));
        }
        let params = DddmParams {
            n_mhh,
            n_mhp,
            n_suh,
            n_sup,
            t_mh,
            t_su,
            t_mhsu,
            icd_mh,
            icd_su,
        };
        params.validate()?;
        Ok(params)
    }
}

impl From<&DddmParams> for RawParams {
    fn from(p: &DddmParams) -> Self {
        let codes = |set: &CodeSet| Some(set.iter().map(|c| c.to_string()).collect());
        Self {
            n_mhh: Some(p.n_mhh.into()),
            n_mhp: Some(p.n_mhp.into()),
            n_suh: Some(p.n_suh.into()),
            n_sup: Some(p.n_sup.into()),
            t_mh: Some(p.t_mh.into()),
            t_su: Some(p.t_su.into()),
            t_mhsu: Some(p.t_mhsu.into()),
            icd_mh: codes(&p.icd_mh),
            icd_su: codes(&p.icd_su),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(DddmParams::default().validate().unwrap().is_empty());
    }

    #[test]
    fn zero_count_names_field() {
        let params = DddmParams {
            n_mhh: 0,
            n_sup: 0,
            ..DddmParams::default()
        };
        let Err(Error::InvalidParams(fields)) = params.validate() else {
            panic!("expected invalid params");
        };
        let names: Vec<_> = fields.iter().map(|f| f.field.as_str()).collect();
        assert_eq!(names, ["n_mhh", "n_sup"]);
    }

    #[test]
    fn overlapping_code_lists_warn() {
        let params = DddmParams {
            icd_su: code_set(["F100", "F060"]),
            ..DddmParams::default()
        };
        let warnings = params.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("F060"));
    }

    #[test]
    fn raw_params_collect_every_error() {
        let raw = RawParams {
            n_mhh: Some(0),
            t_su: Some(-1),
            t_mhsu: Some(0),
            icd_mh: Some(vec!["F06.0".into()]),
            icd_su: Some(vec![]),
            ..RawParams::default()
        };
        let Err(Error::InvalidParams(fields)) = raw.resolve(&DddmParams::default()) else {
            panic!("expected invalid params");
        };
        let names: Vec<_> = fields.iter().map(|f| f.field.as_str()).collect();
        assert_eq!(names, ["n_mhh", "t_su", "t_mhsu", "icd_mh", "icd_su"]);
    }

    #[test]
    fn raw_params_round_trip() {
        let params = DddmParams {
            n_mhp: 4,
            t_mhsu: 90,
            ..DddmParams::default()
        };
        let back = RawParams::from(&params)
            .resolve(&DddmParams::default())
            .unwrap();
        assert_eq!(back, params);
    }

    #[test]
    fn stream_field_names() {
        let c = StreamCriteria::su(0, 0, 5, CodeSet::new());
        let names: Vec<_> = c.field_errors().into_iter().map(|f| f.field).collect();
        assert_eq!(names, ["n_suh", "n_sup", "icd_su"]);
    }
}
