use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponents::{conjugate, ExponentData};
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::lattice::{cubes_within, enumerate_dyadic_cubes, LatticeCube, LatticeFunction, LatticeParams, Shift};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantKind {
    #[serde(rename = "A_p")]
    Ap,
    #[serde(rename = "A_pq")]
    Apq,
    #[serde(rename = "A_P")]
    AP,
    #[serde(rename = "A_Pq")]
    APq,
}

/// Cubes over which a constant's supremum is taken. Both families only use
/// cubes inside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CubeFamily {
    #[default]
    AllLattice,
    Dyadic { shift: Shift },
}

pub fn family_cubes(params: &LatticeParams, family: CubeFamily) -> Result<Vec<LatticeCube>> {
    let cubes = match family {
        CubeFamily::AllLattice => cubes_within(params, params.domain_side(), None),
        CubeFamily::Dyadic { shift } => {
            let mut v: Vec<LatticeCube> =
                enumerate_dyadic_cubes(params, shift, params.min_level()..=params.max_level())?
                    .into_iter()
                    .filter(|c| !c.overhangs)
                    .filter_map(|c| c.cube.to_lattice_cube(params))
                    .filter(|c| c.within_domain(params))
                    .collect();
            v.sort();
            v
        }
    };
    if cubes.is_empty() {
        return Err(Error::EmptyFamily(format!("{family:?} has no cubes inside the domain")));
    }
    Ok(cubes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub kind: ConstantKind,
    pub family: CubeFamily,
    pub value: f64,
    pub witness: LatticeCube,
}

/// Range minimum over squares, via power-of-two square tables.
#[derive(Debug, Clone)]
struct SquareMin {
    n: usize,
    side: usize,
    tables: Vec<Vec<f64>>,
}

impl SquareMin {
    fn new(f: &LatticeFunction) -> Self {
        let p = f.params();
        let d = p.domain_side();
        let n = p.n;
        let at = |i: usize, j: usize| i + d * j;
        let mut base = vec![0.0; d.pow(n as u32)];
        for (k, v) in base.iter_mut().enumerate() {
            let idx = if n == 1 { [k, 0] } else { [k % d, k / d] };
            *v = f.value(idx);
        }
        let mut tables = vec![base];
        let mut t = 1;
        while 2 * t <= d {
            let prev = tables.last().expect("base table");
            let mut next = vec![f64::INFINITY; prev.len()];
            let limit = d - 2 * t + 1;
            if n == 1 {
                for i in 0..limit {
                    next[i] = prev[i].min(prev[i + t]);
                }
            } else {
                for j in 0..limit {
                    for i in 0..limit {
                        next[at(i, j)] = prev[at(i, j)]
                            .min(prev[at(i + t, j)])
                            .min(prev[at(i, j + t)])
                            .min(prev[at(i + t, j + t)]);
                    }
                }
            }
            tables.push(next);
            t *= 2;
        }
        SquareMin { n, side: d, tables }
    }

    fn query(&self, c: &LatticeCube) -> f64 {
        let j = (usize::BITS - 1 - c.side.leading_zeros()) as usize;
        let t = 1 << j;
        let tab = &self.tables[j];
        let d = self.side;
        let [a0, a1] = c.anchor;
        let o = c.side - t;
        if self.n == 1 {
            tab[a0].min(tab[a0 + o])
        } else {
            tab[a0 + d * a1]
                .min(tab[a0 + o + d * a1])
                .min(tab[a0 + d * (a1 + o)])
                .min(tab[a0 + o + d * (a1 + o)])
        }
    }
}

/// A Muckenhoupt-type display: a product of powered cube averages, times
/// powered cube minima for the `p_i = 1` factors of `A_P`.
#[derive(Debug, Clone)]
pub struct ConstantDisplay {
    pub kind: ConstantKind,
    params: LatticeParams,
    averages: Vec<(LatticeFunction, f64)>,
    minima: Vec<(SquareMin, f64)>,
}

impl ConstantDisplay {
    /// `A_p` (`q` ignored) or `A_{p,q}` (`q` required).
    pub fn single(w: &Weight, p: f64, q: Option<f64>, kind: ConstantKind) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponents(format!("{kind:?} needs 1 < p < inf, got {p}")));
        }
        let pc = conjugate(p);
        let averages = match kind {
            ConstantKind::Ap => vec![
                (w.values().clone(), 1.0),
                (w.powf_exact(1.0 - pc)?.values().clone(), p - 1.0),
            ],
            ConstantKind::Apq => {
                let q = q.ok_or_else(|| Error::InvalidExponents("A_pq needs q".into()))?;
                if !(q > 0.0) {
                    return Err(Error::InvalidExponents(format!("q = {q} must be positive")));
                }
                vec![
                    (w.powf(q)?.values().clone(), 1.0),
                    (w.powf(-pc)?.values().clone(), q / pc),
                ]
            }
            _ => {
                return Err(Error::InvalidParams(format!(
                    "{kind:?} is a multilinear constant"
                )))
            }
        };
        Ok(ConstantDisplay {
            kind,
            params: *w.params(),
            averages,
            minima: Vec::new(),
        })
    }

    /// `A_P` (with the `p_i = 1` minimum convention) or `A_{P,q}`.
    pub fn multilinear(w: &[Weight], exps: &ExponentData, kind: ConstantKind) -> Result<Self> {
        if w.len() != exps.m || w.is_empty() {
            return Err(Error::InvalidExponents(format!(
                "{} weights for {} exponents",
                w.len(),
                exps.m
            )));
        }
        let params = *w[0].params();
        let p = exps.p;
        let mut averages = Vec::new();
        let mut minima = Vec::new();
        match kind {
            ConstantKind::AP => {
                let mut v = w[0].powf(p / exps.p_vec[0])?;
                for (wi, pi) in w.iter().zip(&exps.p_vec).skip(1) {
                    v = v.mul(&wi.powf(p / pi)?)?;
                }
                averages.push((v.values().clone(), 1.0));
                for (wi, (&pi, &pc)) in w.iter().zip(exps.p_vec.iter().zip(&exps.p_conj)) {
                    if pi == 1.0 {
                        minima.push((SquareMin::new(wi.values()), -p));
                    } else {
                        averages.push((wi.powf_exact(1.0 - pc)?.values().clone(), p / pc));
                    }
                }
            }
            ConstantKind::APq => {
                exps.require_duals()?;
                let q = exps.q;
                let mut prod = w[0].powf(q)?;
                for wi in &w[1..] {
                    prod = prod.mul(&wi.powf(q)?)?;
                }
                averages.push((prod.values().clone(), 1.0));
                for (wi, &pc) in w.iter().zip(&exps.p_conj) {
                    averages.push((wi.powf(-pc)?.values().clone(), q / pc));
                }
            }
            _ => {
                return Err(Error::InvalidParams(format!(
                    "{kind:?} is a single-weight constant"
                )))
            }
        }
        Ok(ConstantDisplay {
            kind,
            params,
            averages,
            minima,
        })
    }

    /// Value of the display on one cube inside the domain.
    pub fn eval(&self, cube: &LatticeCube) -> f64 {
        let b = cube.as_box();
        let count = b.cell_count() as f64;
        let mut v = 1.0;
        for (f, e) in &self.averages {
            v *= (f.box_sum(&b) / count).powf(*e);
        }
        for (m, e) in &self.minima {
            v *= m.query(cube).powf(*e);
        }
        v
    }

    /// Supremum over `family` with a witness; ties go to the smallest cube.
    pub fn sup(&self, family: CubeFamily) -> Result<ConstantValue> {
        let cubes = family_cubes(&self.params, family)?;
        let (value, witness) = cubes
            .par_iter()
            .map(|c| (self.eval(c), *c))
            .reduce_with(pick_max)
            .expect("family is nonempty");
        if !value.is_finite() {
            return Err(Error::Degenerate(format!(
                "{:?} is not finite on cube {witness:?}",
                self.kind
            )));
        }
        Ok(ConstantValue {
            kind: self.kind,
            family,
            value,
            witness,
        })
    }
}

/// Order-free argmax: larger value wins, ties go to the smaller cube.
pub(crate) fn pick_max(a: (f64, LatticeCube), b: (f64, LatticeCube)) -> (f64, LatticeCube) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

pub fn single_weight_constant(
    w: &Weight,
    p: f64,
    q: Option<f64>,
    kind: ConstantKind,
    family: CubeFamily,
) -> Result<ConstantValue> {
    ConstantDisplay::single(w, p, q, kind)?.sup(family)
}

pub fn multilinear_weight_constant(
    w: &[Weight],
    exps: &ExponentData,
    kind: ConstantKind,
    family: CubeFamily,
) -> Result<ConstantValue> {
    ConstantDisplay::multilinear(w, exps, kind)?.sup(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::WeightSpec;
    use crate::weights::{derive_exponents, Clamp};

    fn params() -> LatticeParams {
        LatticeParams::new(1, 2, 2, 1).unwrap()
    }

    fn weight(spec: WeightSpec) -> Weight {
        Weight::from_spec(&spec, &params(), Clamp::default()).unwrap()
    }

    #[test]
    fn lebesgue_is_one() {
        let w = weight(WeightSpec::constant(1.0));
        for p in [1.5, 2.0, 4.0] {
            let c = single_weight_constant(&w, p, None, ConstantKind::Ap, CubeFamily::AllLattice).unwrap();
            assert!((c.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_half_a2() {
        let w = weight(WeightSpec::power(0.5));
        let c = single_weight_constant(&w, 2.0, None, ConstantKind::Ap, CubeFamily::AllLattice).unwrap();
        assert!((c.value - 4.0 / 3.0).abs() < 1e-12, "{}", c.value);
        assert_eq!(c.witness.anchor[0], 0);
    }

    #[test]
    fn checkerboard_a2() {
        let w = weight(WeightSpec::Checkerboard {
            lo: 1.0,
            hi: 4.0,
            period: 1,
        });
        let c = single_weight_constant(&w, 2.0, None, ConstantKind::Ap, CubeFamily::AllLattice).unwrap();
        assert!((c.value - 25.0 / 16.0).abs() < 1e-12);
        assert_eq!(c.witness.side, 2);
    }

    #[test]
    fn constant_pairs_cancel_including_p_one() {
        let w = [weight(WeightSpec::constant(3.0)), weight(WeightSpec::constant(3.0))];
        for pv in [[2.0, 2.0], [1.0, 3.0], [1.0, 1.0]] {
            let e = derive_exponents(&pv, 0.0, 1).unwrap();
            let c = multilinear_weight_constant(&w, &e, ConstantKind::AP, CubeFamily::AllLattice).unwrap();
            assert!((c.value - 1.0).abs() < 1e-12, "{pv:?}: {}", c.value);
        }
    }

    #[test]
    fn square_min_matches_scan() {
        let p = LatticeParams::new(2, 0, 1, 1).unwrap();
        let f = LatticeFunction::from_domain_fn(p, |i| ((i[0] * 5 + i[1] * 3) % 7) as f64 + 1.0).unwrap();
        let m = SquareMin::new(&f);
        for c in cubes_within(&p, p.domain_side(), None) {
            assert_eq!(m.query(&c), f.box_min(&c.as_box()), "{c:?}");
        }
    }

    #[test]
    fn dyadic_family_is_bounded_by_all_lattice() {
        let w = weight(WeightSpec::power(0.5));
        let all = single_weight_constant(&w, 3.0, None, ConstantKind::Ap, CubeFamily::AllLattice).unwrap();
        for shift in Shift::all(1) {
            let d = single_weight_constant(&w, 3.0, None, ConstantKind::Ap, CubeFamily::Dyadic { shift }).unwrap();
            assert!(d.value <= all.value * (1.0 + 1e-12));
        }
    }
}
