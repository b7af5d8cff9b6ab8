use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, WeightSpec};
use crate::testing::{InnerMode, SearchStrategy, DEFAULT_SAWYER_WORK};
use crate::weights::{derive_exponents, Clamp, CubeFamily, ExponentData, WeightScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    /// One exponent per input slot; `m` is its length.
    pub p: Vec<f64>,
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparseConfig {
    /// Level base; `2^{(m - alpha/n)(n+1)}` when absent.
    pub a: Option<f64>,
    pub k_floor: Option<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Cap on the lattice testing-constant scan, in `side^{n+1} m` units.
    pub sawyer_work: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            sawyer_work: DEFAULT_SAWYER_WORK as u64,
        }
    }
}

/// Which parts of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Steps {
    pub constants: bool,
    pub sandwich: bool,
    pub dyadic_sawyer: bool,
    pub sandwich_sawyer: bool,
    pub sparse: bool,
    pub principal: bool,
    pub norm: bool,
    pub partial: bool,
}

impl Default for Steps {
    fn default() -> Self {
        Steps {
            constants: true,
            sandwich: true,
            dyadic_sawyer: true,
            sandwich_sawyer: true,
            sparse: true,
            principal: true,
            norm: true,
            partial: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for reports; stdout when absent.
    pub dir: Option<String>,
    pub format: OutputFormat,
}

/// One scenario: lattice, exponents, weights and search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub lattice: LatticeParams,
    pub exponents: ExponentsConfig,
    /// Weights `w_1..w_m`.
    pub w: Vec<WeightSpec>,
    pub v: WeightSpec,
    #[serde(default)]
    pub clamp: Clamp,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub search: SearchStrategy,
    #[serde(default)]
    pub family: CubeFamily,
    #[serde(default)]
    pub inner: InnerMode,
    #[serde(default)]
    pub sparse: SparseConfig,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub steps: Steps,
    #[serde(default)]
    pub output: OutputConfig,
}

fn config_error<E: std::fmt::Display>(err: serde_path_to_error::Error<E>) -> Error {
    let path = err.path().to_string();
    Error::Config {
        path: if path.is_empty() { ".".into() } else { path },
        message: err.into_inner().to_string(),
    }
}

impl ScenarioConfig {
    /// Parses and validates; errors name the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(config_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(config_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let at = |path: &str, e: Error| Error::Config {
            path: path.into(),
            message: e.to_string(),
        };
        self.lattice.validate().map_err(|e| at("lattice", e))?;
        let exps = self.exponent_data()?;
        exps.require_duals().map_err(|e| at("exponents.p", e))?;
        if self.w.len() != exps.m {
            return Err(Error::Config {
                path: "w".into(),
                message: format!("{} weights given but exponents.p has {} entries", self.w.len(), exps.m),
            });
        }
        if !(self.clamp.min > 0.0 && self.clamp.min <= self.clamp.max) {
            return Err(Error::Config {
                path: "clamp".into(),
                message: format!("need 0 < min <= max, got [{}, {}]", self.clamp.min, self.clamp.max),
            });
        }
        let s = &self.search;
        if !(s.spread >= 0.0 && s.spread.is_finite()) {
            return Err(Error::Config {
                path: "search.spread".into(),
                message: format!("spread must be finite and nonnegative, got {}", s.spread),
            });
        }
        if let Some(levels) = &s.net_levels {
            if levels.is_empty() || levels.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                return Err(Error::Config {
                    path: "search.net_levels".into(),
                    message: "net levels must be a nonempty list of finite nonnegative values".into(),
                });
            }
        }
        if let Some(a) = self.sparse.a {
            if !(a > 1.0 && a.is_finite()) {
                return Err(Error::Config {
                    path: "sparse.a".into(),
                    message: format!("level base must exceed 1, got {a}"),
                });
            }
        }
        if self.budgets.sawyer_work == 0 {
            return Err(Error::Config {
                path: "budgets.sawyer_work".into(),
                message: "budget must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn exponent_data(&self) -> Result<ExponentData> {
        derive_exponents(&self.exponents.p, self.exponents.alpha, self.lattice.n).map_err(|e| Error::Config {
            path: "exponents".into(),
            message: e.to_string(),
        })
    }

    /// Builds the weights. Spec errors are reported against `w[i]` / `v`.
    pub fn scenario(&self) -> Result<WeightScenario> {
        let exps = self.exponent_data()?;
        let wrap = |path: String| {
            move |e: Error| match e {
                Error::InvalidSpec(_) | Error::InvalidParams(_) => Error::Config {
                    path,
                    message: e.to_string(),
                },
                other => other,
            }
        };
        for (i, spec) in self.w.iter().enumerate() {
            crate::lattice::build_lattice_function(spec, &self.lattice).map_err(wrap(format!("w[{i}]")))?;
        }
        crate::lattice::build_lattice_function(&self.v, &self.lattice).map_err(wrap("v".into()))?;
        WeightScenario::new(&self.lattice, exps, &self.w, &self.v, self.clamp)
    }

    /// Search strategy with the scenario seed applied.
    pub fn strategy(&self) -> SearchStrategy {
        SearchStrategy {
            seed: self.seed,
            ..self.search.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t",
        "lattice": {"n": 1, "K": 1, "L": 1, "P": 1},
        "exponents": {"p": [2.0, 2.0], "alpha": 0.5},
        "w": [{"kind": "constant", "value": 1.0}, {"kind": "power", "exponent": 0.5}],
        "v": {"kind": "constant", "value": 1.0}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ScenarioConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.family, CubeFamily::AllLattice);
        assert_eq!(cfg.search, SearchStrategy::default());
        assert!(cfg.steps.norm);
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = ScenarioConfig::from_json_str(MINIMAL).unwrap();
        let again = ScenarioConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn errors_carry_field_paths() {
        let bad = MINIMAL.replace("\"exponent\": 0.5", "\"exponent\": \"x\"");
        match ScenarioConfig::from_json_str(&bad) {
            Err(Error::Config { path, message }) => {
                assert_eq!(path, "w[1]");
                assert!(message.contains("expected f64"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("\"K\": 1", "\"K\": 1, \"Q\": 3");
        match ScenarioConfig::from_json_str(&bad) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("lattice"), "{path}"),
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("[2.0, 2.0]", "[2.0, 2.0, 2.0]");
        assert!(matches!(ScenarioConfig::from_json_str(&bad), Err(Error::Config { .. })));
        let bad = MINIMAL.replace("[2.0, 2.0]", "[1.0, 2.0]");
        assert!(ScenarioConfig::from_json_str(&bad).unwrap_err().is_config());
    }
}
