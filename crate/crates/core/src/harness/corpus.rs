use super::config::{ExponentsConfig, ScenarioConfig};
use crate::error::Result;
use crate::lattice::{LatticeParams, WeightSpec};

macro_rules! corpus_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../corpus/", $name, ".json")))),*]
    };
}

const NAMED: &[(&str, &str)] = corpus_files![
    "lebesgue_m1",
    "lebesgue_m2",
    "power_half_a2",
    "power_bilinear",
    "power_2d",
    "checkerboard_a2",
    "checkerboard_2d",
    "lognormal_pair_1d",
    "lognormal_pair_2d",
    "tests_only_regime",
    "tests_only_high_p",
    "smoke_m3",
];

pub fn corpus_names() -> Vec<&'static str> {
    NAMED.iter().map(|(n, _)| *n).collect()
}

pub fn corpus_scenario(name: &str) -> Option<Result<ScenarioConfig>> {
    NAMED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioConfig::from_json_str(text))
}

/// The twelve shipped scenarios.
pub fn default_corpus() -> Vec<ScenarioConfig> {
    NAMED
        .iter()
        .map(|(name, text)| {
            ScenarioConfig::from_json_str(text).unwrap_or_else(|e| panic!("corpus scenario {name}: {e}"))
        })
        .collect()
}

fn lognormal_variant(name: String, n: usize, p: Vec<f64>, alpha: f64, seed: u64) -> ScenarioConfig {
    let lattice = if n == 1 {
        LatticeParams::new(1, 2, 2, 1)
    } else {
        LatticeParams::new(2, 1, 1, 1)
    }
    .expect("variant lattice");
    let w = (0..p.len())
        .map(|i| WeightSpec::Lognormal {
            seed: seed + i as u64,
            s: 0.4 + 0.2 * i as f64,
        })
        .collect();
    let cfg = ScenarioConfig {
        name,
        description: "seeded lognormal variant".into(),
        lattice,
        exponents: ExponentsConfig { p, alpha },
        w,
        v: WeightSpec::Lognormal { seed: seed + 50, s: 0.3 },
        clamp: Default::default(),
        seed,
        search: Default::default(),
        family: Default::default(),
        inner: Default::default(),
        sparse: Default::default(),
        budgets: Default::default(),
        steps: Default::default(),
        output: Default::default(),
    };
    cfg.validate().expect("variant validates");
    cfg
}

/// The named scenarios plus eight seeded lognormal variants (20 in total).
pub fn extended_corpus() -> Vec<ScenarioConfig> {
    let mut out = default_corpus();
    let variants: [(usize, &[f64], f64); 8] = [
        (1, &[2.0, 2.0], 0.25),
        (1, &[2.0, 2.0], 0.5),
        (1, &[3.0, 1.5], 0.75),
        (1, &[2.0], 0.25),
        (1, &[1.5], 0.0),
        (1, &[2.0, 2.0, 2.0], 1.0),
        (2, &[2.0, 2.0], 0.5),
        (2, &[2.0], 0.5),
    ];
    for (i, (n, p, alpha)) in variants.into_iter().enumerate() {
        out.push(lognormal_variant(
            format!("lognormal_variant_{i}"),
            n,
            p.to_vec(),
            alpha,
            100 + 10 * i as u64,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_parses() {
        assert_eq!(default_corpus().len(), 12);
        let ext = extended_corpus();
        assert_eq!(ext.len(), 20);
        let mut names: Vec<_> = ext.iter().map(|c| c.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 20);
        for cfg in &ext {
            cfg.scenario().unwrap_or_else(|e| panic!("{}: {e}", cfg.name));
        }
    }

    #[test]
    fn file_names_match_scenario_names() {
        for name in corpus_names() {
            assert_eq!(corpus_scenario(name).unwrap().unwrap().name, name);
        }
    }
}
