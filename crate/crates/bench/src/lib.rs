//! Fixtures shared by the benchmarks.

use maxweights_core::lattice::{build_lattice_function, LatticeFunction, LatticeParams, WeightSpec};
use maxweights_core::weights::{derive_exponents, Clamp, WeightScenario};

/// `m` lognormal inputs on the given lattice.
pub fn lognormal_inputs(params: &LatticeParams, m: usize) -> Vec<LatticeFunction> {
    (0..m)
        .map(|i| {
            build_lattice_function(
                &WeightSpec::Lognormal {
                    seed: 1000 + i as u64,
                    s: 1.0,
                },
                params,
            )
            .expect("lognormal input")
        })
        .collect()
}

/// Bilinear scenario with lognormal weights.
pub fn lognormal_scenario(params: LatticeParams) -> WeightScenario {
    let n = params.n;
    let alpha = 0.5 * n as f64;
    let exps = derive_exponents(&[2.0, 2.0], alpha, n).expect("exponents");
    let w = [
        WeightSpec::Lognormal { seed: 1, s: 0.7 },
        WeightSpec::Lognormal { seed: 2, s: 0.7 },
    ];
    let v = WeightSpec::Lognormal { seed: 3, s: 0.7 };
    WeightScenario::new(&params, exps, &w, &v, Clamp::default()).expect("scenario")
}
