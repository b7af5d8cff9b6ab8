use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ScenarioConfig;
use super::report::constant_key;
use super::run::run_scenario;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub ok: bool,
    pub error: Option<String>,
    /// Keyed like `A_p/all_lattice`.
    pub constants: BTreeMap<String, f64>,
    pub sawyer: Option<f64>,
    pub norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub param: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Column names: `value`, constants in sorted order, `sawyer`, `norm`, `error`.
    pub fn header(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.rows.iter().flat_map(|r| r.constants.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        let mut h = vec!["value".to_string()];
        h.extend(keys);
        h.extend(["sawyer".into(), "norm".into(), "error".into()]);
        h
    }

    pub fn records(&self) -> Vec<Vec<String>> {
        let header = self.header();
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| {
                header
                    .iter()
                    .map(|col| match col.as_str() {
                        "value" => r.value.to_string(),
                        "sawyer" => opt(r.sawyer),
                        "norm" => opt(r.norm),
                        "error" => r.error.clone().unwrap_or_default(),
                        key => opt(r.constants.get(key).copied()),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn column(&self, key: &str) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.constants.get(key).copied()).collect()
    }
}

fn segments(path: &str) -> Vec<String> {
    path.replace('[', ".")
        .replace(']', "")
        .split('.')
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Replaces the scalar at a dotted path (`w.0.exponent` or `w[0].exponent`).
pub fn set_path(doc: &mut Value, path: &str, value: f64) -> Result<()> {
    let bad = |msg: String| Error::Config {
        path: path.into(),
        message: msg,
    };
    let segs = segments(path);
    if segs.is_empty() {
        return Err(bad("empty parameter path".into()));
    }
    let mut cur = doc;
    for s in &segs {
        cur = match cur {
            Value::Object(map) => map.get_mut(s).ok_or_else(|| bad(format!("no field `{s}`")))?,
            Value::Array(items) => {
                let i: usize = s.parse().map_err(|_| bad(format!("`{s}` is not an array index")))?;
                let len = items.len();
                items.get_mut(i).ok_or_else(|| bad(format!("index {i} out of range (length {len})")))?
            }
            _ => return Err(bad(format!("cannot descend into a scalar at `{s}`"))),
        };
    }
    if !cur.is_number() {
        return Err(bad(format!("target is not a number: {cur}")));
    }
    // integer fields stay integers when the value allows it
    let integral = value.fract() == 0.0 && value.abs() < 9.0e15;
    *cur = if cur.is_u64() && integral && value >= 0.0 {
        Value::from(value as u64)
    } else if cur.is_i64() && integral {
        Value::from(value as i64)
    } else {
        serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| bad(format!("{value} is not a finite number")))?
    };
    Ok(())
}

/// Runs `base` once per value of the parameter at `path`. Per-point
/// failures are recorded in the row and the sweep continues.
pub fn sweep_experiment(base: &ScenarioConfig, path: &str, values: &[f64]) -> Result<SweepTable> {
    let doc = serde_json::to_value(base).expect("config serializes");
    let mut probe = doc.clone();
    set_path(&mut probe, path, values.first().copied().unwrap_or(0.0))?;
    let rows = values
        .iter()
        .map(|&value| {
            let mut d = doc.clone();
            let outcome = set_path(&mut d, path, value)
                .and_then(|_| ScenarioConfig::from_value(d))
                .and_then(|cfg| run_scenario(&cfg));
            match outcome {
                Ok(out) => {
                    let r = out.report;
                    SweepRow {
                        value,
                        ok: out.failure.is_none(),
                        error: out.failure.map(|e| e.to_string()),
                        constants: r.constants.iter().map(|c| (constant_key(c), c.value)).collect(),
                        sawyer: r.sawyer.map(|s| s.value),
                        norm: r.norm.map(|n| n.value),
                    }
                }
                Err(e) => SweepRow {
                    value,
                    ok: false,
                    error: Some(e.to_string()),
                    constants: BTreeMap::new(),
                    sawyer: None,
                    norm: None,
                },
            }
        })
        .collect();
    Ok(SweepTable {
        param: path.into(),
        rows,
    })
}
