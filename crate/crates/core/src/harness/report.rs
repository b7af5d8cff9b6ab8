use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::lattice::DyadicCube;
use crate::testing::{
    CarlesonCheck, NormEstimate, PartialEstimate, RegimeReport, SawyerResult, SparseValidation,
};
use crate::weights::{ConstantValue, ExponentData};

pub const SCHEMA_VERSION: u32 = 1;

pub fn tool_version() -> String {
    format!("maxweights {}", env!("CARGO_PKG_VERSION"))
}

/// Wall-clock seconds per step. Kept apart so reports compare equal
/// across runs once this block is dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub steps: BTreeMap<String, f64>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichSummary {
    pub factor: f64,
    pub max_lower: f64,
    pub max_exact: f64,
    pub max_upper: f64,
    pub cells: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSummary {
    /// Shift label, e.g. `0` or `1/3,0`.
    pub shift: String,
    pub a: f64,
    pub k_floor: i32,
    pub k_ceil: i32,
    pub entries: usize,
    pub validation: SparseValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalSummary {
    pub root: DyadicCube,
    pub cubes: usize,
    pub generations: usize,
    pub p: f64,
    pub carleson: CarlesonCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    /// `N^ / [S]`
    pub norm_over_sawyer: Option<f64>,
    /// `C^_i / [S]`
    pub partial_over_sawyer: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ScenarioConfig,
    pub exponents: ExponentData,
    pub regime: RegimeReport,
    pub constants: Vec<ConstantValue>,
    pub sawyer: Option<SawyerResult>,
    pub sawyer_dyadic: Vec<SawyerResult>,
    pub sawyer_sandwich: Option<SawyerResult>,
    pub sandwich: Option<SandwichSummary>,
    pub sparse: Vec<SparseSummary>,
    pub principal: Option<PrincipalSummary>,
    pub norm: Option<NormEstimate>,
    pub partial: Vec<PartialEstimate>,
    pub ratios: Ratios,
    pub ordering: Vec<CheckOutcome>,
    pub warnings: Vec<String>,
    /// Set when a step ran out of budget; later steps are missing.
    pub partial_report: bool,
    pub error: Option<String>,
    pub timing: Timing,
}

impl Report {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its timing block, for reproducibility checks.
    pub fn numeric_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        v
    }

    /// Flat `(key, value)` rows for CSV output.
    pub fn summary_rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            ("scenario".to_string(), self.config.name.clone()),
            ("regime".into(), serde_name(&self.regime.regime)),
            ("q".into(), self.exponents.q.to_string()),
        ];
        for c in &self.constants {
            rows.push((constant_key(c), c.value.to_string()));
        }
        if let Some(s) = &self.sawyer {
            rows.push(("sawyer".into(), s.value.to_string()));
        }
        for s in &self.sawyer_dyadic {
            rows.push((format!("sawyer_dyadic[{}]", family_label(&s.family, s.witness.n)), s.value.to_string()));
        }
        if let Some(s) = &self.sawyer_sandwich {
            rows.push(("sawyer_sandwich_lower".into(), s.value.to_string()));
            if let Some(u) = s.upper {
                rows.push(("sawyer_sandwich_upper".into(), u.to_string()));
            }
        }
        if let Some(n) = &self.norm {
            rows.push(("norm".into(), n.value.to_string()));
        }
        for p in &self.partial {
            rows.push((format!("partial[{}]", p.fixed_slot + 1), p.value.to_string()));
        }
        if let Some(r) = self.ratios.norm_over_sawyer {
            rows.push(("norm_over_sawyer".into(), r.to_string()));
        }
        for c in &self.ordering {
            rows.push((format!("check:{}", c.name), c.pass.to_string()));
        }
        rows.push(("partial_report".into(), self.partial_report.to_string()));
        rows
    }
}

pub fn family_label(f: &crate::weights::CubeFamily, n: usize) -> String {
    match f {
        crate::weights::CubeFamily::AllLattice => "all_lattice".into(),
        crate::weights::CubeFamily::Dyadic { shift } => format!("dyadic({})", shift.label(n)),
    }
}

/// `A_p/all_lattice`, `A_P/dyadic(0,0)`, ...
pub fn constant_key(c: &ConstantValue) -> String {
    format!("{}/{}", serde_name(&c.kind), family_label(&c.family, c.witness.n))
}

/// Serialized name of a unit enum variant.
pub fn serde_name<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}
