use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DyadicCube, LatticeCube, LatticeFunction, Shift};
use crate::maximal::{lattice_max_in_box, product_term, sandwich_factor, slot_exponent, WindowScratch};
use crate::weights::{family_cubes, pick_max, CubeFamily, WeightScenario};

/// How the inner maximal function of the testing ratio is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerMode {
    /// Every lattice sub-cube of `Q`; a lower bound for the continuum value.
    #[default]
    Lattice,
    /// Shifted dyadic chains, giving `[lower, 6^{nm - alpha} lower]`.
    Sandwich,
}

/// Relative slack under which two cube ratios count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Default cap on `sum_Q side^{n+1} m`, the lattice scan cost.
pub const DEFAULT_SAWYER_WORK: u128 = 50_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SawyerResult {
    pub family: CubeFamily,
    pub inner: InnerMode,
    pub value: f64,
    /// Upper end of the interval in sandwich mode.
    pub upper: Option<f64>,
    pub witness: LatticeCube,
    /// Cubes whose ratio is within `TIE_TOLERANCE` of the maximum.
    pub ties: usize,
    pub scanned: usize,
    /// Cubes with some `sigma_i(Q) = 0`.
    pub skipped: usize,
}

/// Per-cube ratios of a scan, best first (ties by cube order).
#[derive(Debug, Clone)]
pub struct SawyerScan {
    pub result: SawyerResult,
    pub ranked: Vec<(f64, LatticeCube)>,
}

fn local_to_global(n: usize, side: usize, anchor: [usize; 2], k: usize) -> [usize; 2] {
    if n == 1 {
        [anchor[0] + k, 0]
    } else {
        [anchor[0] + k % side, anchor[1] + k / side]
    }
}

/// `∫_Q M_alpha(g_1 1_Q, ...)^q v` with the lattice inner maximal function.
pub fn lattice_numerator(
    funcs: &[LatticeFunction],
    alpha: f64,
    v: &LatticeFunction,
    q: f64,
    cube: &LatticeCube,
    scratch: &mut WindowScratch,
) -> f64 {
    let params = v.params();
    let m = lattice_max_in_box(funcs, alpha, cube.anchor, cube.side, None, scratch);
    m.iter()
        .enumerate()
        .map(|(k, mv)| mv.powf(q) * v.value(local_to_global(params.n, cube.side, cube.anchor, k)))
        .sum::<f64>()
        * params.cell_volume()
}

/// Lower sandwich numerator: per cell of `Q`, the maximum over every grid
/// and level of the term of `(g_i 1_Q)` on the grid cube containing it.
pub fn sandwich_numerator(funcs: &[LatticeFunction], alpha: f64, v: &LatticeFunction, q: f64, cube: &LatticeCube) -> f64 {
    let params = *v.params();
    let e = slot_exponent(params.n, funcs.len(), alpha);
    let cv = params.cell_volume();
    let qbox = cube.as_box();
    let shifts = Shift::all(params.n);
    let count = cube.side.pow(params.n as u32);
    (0..count)
        .map(|k| {
            let idx = local_to_global(params.n, cube.side, cube.anchor, k);
            let cell = [idx[0] as i64, idx[1] as i64];
            let mut best: f64 = 0.0;
            for &shift in &shifts {
                for level in params.min_level()..=params.max_level() {
                    let r = DyadicCube::containing(&params, shift, level, cell).expect("level in range");
                    let b = r.cell_box(&params).intersect(&qbox).expect("cell lies in both");
                    best = best.max(product_term(funcs, &b, r.volume(), e, cv));
                }
            }
            best.powf(q) * v.value(idx)
        })
        .sum::<f64>()
        * cv
}

fn sigma_funcs(scn: &WeightScenario) -> Vec<LatticeFunction> {
    scn.sigma.iter().map(|s| s.values().clone()).collect()
}

/// `prod_i sigma_i(Q)^{1/p_i}`, or `None` when some `sigma_i(Q) = 0`.
pub fn sawyer_denominator(scn: &WeightScenario, cube: &LatticeCube) -> Option<f64> {
    let b = cube.as_box();
    let mut d = 1.0;
    for (s, p) in scn.sigma.iter().zip(&scn.exps.p_vec) {
        let mass = s.values().box_integral_cells(&b);
        if !(mass > 0.0) {
            return None;
        }
        d *= mass.powf(1.0 / p);
    }
    Some(d)
}

/// The testing ratio of one cube; `None` for degenerate cubes.
pub fn sawyer_ratio(scn: &WeightScenario, cube: &LatticeCube, inner: InnerMode, scratch: &mut WindowScratch) -> Option<f64> {
    let den = sawyer_denominator(scn, cube)?;
    let funcs = sigma_funcs(scn);
    Some(ratio_with(&funcs, scn, cube, inner, den, scratch))
}

fn ratio_with(
    funcs: &[LatticeFunction],
    scn: &WeightScenario,
    cube: &LatticeCube,
    inner: InnerMode,
    den: f64,
    scratch: &mut WindowScratch,
) -> f64 {
    let (alpha, q) = (scn.exps.alpha, scn.exps.q);
    let v = scn.v.values();
    let num = match inner {
        InnerMode::Lattice => lattice_numerator(funcs, alpha, v, q, cube, scratch),
        InnerMode::Sandwich => sandwich_numerator(funcs, alpha, v, q, cube),
    };
    num.powf(1.0 / q) / den
}

/// Scan cost in window-max units.
pub fn sawyer_work(n: usize, m: usize, cubes: &[LatticeCube]) -> u128 {
    cubes
        .iter()
        .map(|c| (c.side as u128).pow(n as u32 + 1))
        .sum::<u128>()
        * m as u128
}

/// `[w, v]_{S}` over `family`, with every cube's ratio ranked.
pub fn sawyer_scan(scn: &WeightScenario, family: CubeFamily, inner: InnerMode, max_work: u128) -> Result<SawyerScan> {
    let params = *scn.params();
    let cubes = family_cubes(&params, family)?;
    let work = sawyer_work(params.n, scn.exps.m, &cubes);
    if work > max_work {
        return Err(Error::Budget(format!(
            "testing scan needs {work} work units, budget is {max_work}"
        )));
    }
    let funcs = sigma_funcs(scn);
    let rated: Vec<Option<(f64, LatticeCube)>> = cubes
        .par_iter()
        .map_init(WindowScratch::default, |scratch, c| {
            let den = sawyer_denominator(scn, c)?;
            Some((ratio_with(&funcs, scn, c, inner, den, scratch), *c))
        })
        .collect();
    let skipped = rated.iter().filter(|r| r.is_none()).count();
    let mut ranked: Vec<(f64, LatticeCube)> = rated.into_iter().flatten().collect();
    if ranked.is_empty() {
        return Err(Error::EmptyFamily(format!(
            "every cube of {family:?} has a vanishing dual mass"
        )));
    }
    let (value, witness) = ranked.iter().copied().reduce(pick_max).expect("nonempty");
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let ties = ranked
        .iter()
        .filter(|(r, _)| *r >= value * (1.0 - TIE_TOLERANCE))
        .count();
    let upper = match inner {
        InnerMode::Lattice => None,
        InnerMode::Sandwich => Some(value * sandwich_factor(params.n, scn.exps.m, scn.exps.alpha)),
    };
    Ok(SawyerScan {
        result: SawyerResult {
            family,
            inner,
            value,
            upper,
            witness,
            ties,
            scanned: cubes.len(),
            skipped,
        },
        ranked,
    })
}

pub fn sawyer_constant(scn: &WeightScenario, family: CubeFamily, inner: InnerMode) -> Result<SawyerResult> {
    Ok(sawyer_scan(scn, family, inner, DEFAULT_SAWYER_WORK)?.result)
}
