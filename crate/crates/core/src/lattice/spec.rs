use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::function::LatticeFunction;
use super::params::LatticeParams;
use super::quad::{power_average_1d, power_average_2d};
use crate::error::{Error, Result};

/// Declarative description of a weight or input function on the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        value: f64,
    },
    /// `x -> |x - center|^exponent`; center defaults to the origin.
    Power {
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// Domain cell values, first coordinate fastest.
    Table {
        values: Vec<f64>,
    },
    /// `exp(s * Z)` per domain cell, `Z` standard normal from a seeded stream.
    Lognormal {
        seed: u64,
        s: f64,
    },
    /// `lo`/`hi` alternating in blocks of `period` cells.
    Checkerboard {
        lo: f64,
        hi: f64,
        #[serde(default = "one")]
        period: usize,
    },
    /// `height` on the cube with lower corner `lo` and side `side`.
    Indicator {
        lo: Vec<f64>,
        side: f64,
        height: f64,
    },
}

fn one() -> usize {
    1
}

impl WeightSpec {
    pub fn constant(value: f64) -> Self {
        WeightSpec::Constant { value }
    }

    pub fn power(exponent: f64) -> Self {
        WeightSpec::Power {
            exponent,
            center: None,
        }
    }

    pub fn power_center(&self, n: usize) -> Option<[f64; 2]> {
        match self {
            WeightSpec::Power { center, .. } => {
                let mut c = [0.0; 2];
                if let Some(v) = center {
                    for (d, x) in v.iter().take(n).enumerate() {
                        c[d] = *x;
                    }
                }
                Some(c)
            }
            _ => None,
        }
    }
}

/// Samples `spec` onto the domain cells of `params` (padding stays zero).
pub fn build_lattice_function(spec: &WeightSpec, params: &LatticeParams) -> Result<LatticeFunction> {
    let p = *params;
    match spec {
        WeightSpec::Constant { value } => {
            if !(*value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "constant weight must be positive and finite, got {value}"
                )));
            }
            LatticeFunction::from_domain_fn(p, |_| *value)
        }
        WeightSpec::Power { exponent, center } => {
            if let Some(c) = center {
                if c.len() != p.n {
                    return Err(Error::InvalidSpec(format!(
                        "power center has {} coordinates, lattice dimension is {}",
                        c.len(),
                        p.n
                    )));
                }
            }
            let c = spec.power_center(p.n).expect("power spec");
            sample_power(&p, 1.0, *exponent, c)
        }
        WeightSpec::Table { values } => {
            if values.len() != p.domain_cells() {
                return Err(Error::InvalidSpec(format!(
                    "table has {} values, domain has {} cells",
                    values.len(),
                    p.domain_cells()
                )));
            }
            if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidSpec(format!(
                    "table entries must be finite and nonnegative, found {v}"
                )));
            }
            let d = p.domain_side();
            LatticeFunction::from_domain_fn(p, |i| values[i[0] + d * i[1]])
        }
        WeightSpec::Lognormal { seed, s } => {
            if !(s.is_finite() && *s >= 0.0) {
                return Err(Error::InvalidSpec(format!("lognormal spread must be >= 0, got {s}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            let d = p.domain_side();
            let vals: Vec<f64> = (0..p.domain_cells())
                .map(|_| (s * normal.sample(&mut rng)).exp())
                .collect();
            LatticeFunction::from_domain_fn(p, |i| vals[i[0] + d * i[1]])
        }
        WeightSpec::Checkerboard { lo, hi, period } => {
            if !(*lo >= 0.0 && *hi >= 0.0 && lo.is_finite() && hi.is_finite()) || *period == 0 {
                return Err(Error::InvalidSpec(
                    "checkerboard needs finite nonnegative levels and period >= 1".into(),
                ));
            }
            LatticeFunction::from_domain_fn(p, |i| {
                let parity: usize = (0..p.n).map(|d| i[d] / period).sum();
                if parity.is_multiple_of(2) {
                    *lo
                } else {
                    *hi
                }
            })
        }
        WeightSpec::Indicator { lo, side, height } => {
            if lo.len() != p.n || !(*side > 0.0) || !(*height >= 0.0 && height.is_finite()) {
                return Err(Error::InvalidSpec(
                    "indicator needs an n-dimensional corner, positive side and finite height".into(),
                ));
            }
            let h = p.h();
            LatticeFunction::from_domain_fn(p, |i| {
                let mut frac = 1.0;
                for d in 0..p.n {
                    let a = i[d] as f64 * h;
                    let overlap = ((a + h).min(lo[d] + side) - a.max(lo[d])).max(0.0);
                    frac *= overlap / h;
                }
                height * frac
            })
        }
    }
}

/// Exact cell averages of `scale * |x - center|^exponent` on domain cells.
pub fn sample_power(params: &LatticeParams, scale: f64, exponent: f64, center: [f64; 2]) -> Result<LatticeFunction> {
    let n = params.n as f64;
    if !(exponent > -n) || !exponent.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "power exponent {exponent} is not locally integrable in dimension {}",
            params.n
        )));
    }
    let h = params.h();
    let f = LatticeFunction::from_domain_fn(*params, |i| {
        let x0 = i[0] as f64 * h;
        let v = if params.n == 1 {
            power_average_1d(exponent, center[0], x0, x0 + h)
        } else {
            let y0 = i[1] as f64 * h;
            power_average_2d(exponent, center, [x0, x0 + h], [y0, y0 + h])
        };
        scale * v
    });
    f.map_err(|e| Error::InvalidSpec(format!("power sampling failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeCube;

    fn params_1d() -> LatticeParams {
        // [0,4), h = 1/12
        LatticeParams::new(1, 2, 2, 1).unwrap()
    }

    #[test]
    fn constant_one_integrates_to_domain_volume() {
        for (n, k) in [(1, 2), (2, 1)] {
            let p = LatticeParams::new(n, k, 1, 1).unwrap();
            let f = build_lattice_function(&WeightSpec::constant(1.0), &p).unwrap();
            let expect = (2f64).powi((k * n as u32) as i32);
            assert!((f.total_integral() - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn power_half_first_cell() {
        let p = params_1d();
        let h = p.h();
        let f = build_lattice_function(&WeightSpec::power(0.5), &p).unwrap();
        // ∫_0^h x^{1/2} dx = (2/3) h^{3/2}
        let expect = (2.0 / 3.0) * h.powf(0.5);
        assert!((f.value([0, 0]) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn power_minus_half_first_cell_is_finite() {
        let p = params_1d();
        let h = p.h();
        let f = build_lattice_function(&WeightSpec::power(-0.5), &p).unwrap();
        // ∫_0^h x^{-1/2} dx = 2 h^{1/2}
        let expect = 2.0 * h.powf(0.5) / h;
        assert!((f.value([0, 0]) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn power_integral_over_initial_interval() {
        let p = params_1d();
        let f = build_lattice_function(&WeightSpec::power(0.5), &p).unwrap();
        for side in [1usize, 5, 12, 30, 48] {
            let r = side as f64 * p.h();
            let q = LatticeCube::new(&p, [0, 0], side).unwrap();
            let got = f.box_integral(&q).unwrap();
            let expect = (2.0 / 3.0) * r.powf(1.5);
            assert!((got - expect).abs() < 1e-12 * expect, "{got} vs {expect}");
        }
    }

    #[test]
    fn nonintegrable_power_is_rejected() {
        let p = params_1d();
        assert!(build_lattice_function(&WeightSpec::power(-1.0), &p).is_err());
        let p2 = LatticeParams::new(2, 0, 1, 1).unwrap();
        assert!(build_lattice_function(&WeightSpec::power(-1.5), &p2).is_ok());
        assert!(build_lattice_function(&WeightSpec::power(-2.0), &p2).is_err());
    }

    #[test]
    fn table_errors() {
        let p = LatticeParams::new(1, 0, 0, 1).unwrap();
        let bad_len = WeightSpec::Table { values: vec![1.0; 2] };
        assert!(build_lattice_function(&bad_len, &p).is_err());
        let neg = WeightSpec::Table {
            values: vec![1.0, -2.0, 1.0],
        };
        assert!(build_lattice_function(&neg, &p).is_err());
        let ok = WeightSpec::Table {
            values: vec![1.0, 2.0, 3.0],
        };
        let f = build_lattice_function(&ok, &p).unwrap();
        assert_eq!(&f.cells()[..3], &[1.0, 2.0, 3.0]);
        assert_eq!(f.cells()[3], 0.0);
    }

    #[test]
    fn nonpositive_constant_is_rejected() {
        let p = params_1d();
        assert!(build_lattice_function(&WeightSpec::constant(0.0), &p).is_err());
        assert!(build_lattice_function(&WeightSpec::constant(-1.0), &p).is_err());
    }

    #[test]
    fn indicator_cell_fractions() {
        let p = params_1d();
        let spec = WeightSpec::Indicator {
            lo: vec![0.0],
            side: 1.0,
            height: 1.0,
        };
        let f = build_lattice_function(&spec, &p).unwrap();
        assert!((f.total_integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lognormal_is_seeded() {
        let p = params_1d();
        let s = WeightSpec::Lognormal { seed: 3, s: 0.5 };
        let a = build_lattice_function(&s, &p).unwrap();
        let b = build_lattice_function(&s, &p).unwrap();
        assert_eq!(a, b);
        assert!(a.cells()[..p.domain_side()].iter().all(|v| *v > 0.0));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = WeightSpec::Checkerboard {
            lo: 1.0,
            hi: 4.0,
            period: 1,
        };
        let s = serde_json::to_string(&spec).unwrap();
        let back: WeightSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
    }
}
