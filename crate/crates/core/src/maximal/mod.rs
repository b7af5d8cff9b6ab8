//! Multilinear fractional maximal operators on lattice data.
//!
//! For inputs `F_1..F_m` and `0 <= alpha < mn`, the value attached to a cube
//! `Q` is `prod_i |Q|^{-(1 - alpha/(mn))} ∫_Q F_i`. The maximal function at a
//! cell is the maximum of that value over the cubes of a family containing
//! the cell:
//!
//! * [`eval_dyadic_maximal`]: the containment chain of one shifted grid
//!   (levels `-(K+P)..=L`); exact.
//! * [`eval_lattice_maximal`]: every lattice cube inside the extended region;
//!   a lower bound for the continuum operator.
//! * [`maximal_sandwich`]: the maximum over all `2^n` shifted grids together
//!   with the factor `6^{nm - alpha}` that brackets the continuum operator.

mod window;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use window::{fold_window_max, WindowScratch};

use crate::error::{Error, Result};
use crate::lattice::{CellBox, DyadicCube, LatticeFunction, LatticeParams, LevelLayout, Shift};

/// Work units (cube evaluations times slots) above which uncapped lattice
/// evaluation is refused.
pub const LATTICE_WORK_BUDGET: u128 = 4_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MaximalMode {
    Dyadic { shift: Shift },
    LatticeExact,
    Sandwich,
}

#[derive(Debug, Clone)]
pub struct MaximalResult {
    /// One value per cell of the extended region.
    pub values: LatticeFunction,
    pub mode: MaximalMode,
    /// `1` for exact modes, `6^{nm - alpha}` for the sandwich.
    pub certified_factor: f64,
    /// Largest cube side (cells) scanned when lattice evaluation was capped.
    pub side_cap: Option<usize>,
}

impl MaximalResult {
    pub fn value(&self, idx: [usize; 2]) -> f64 {
        self.values.value(idx)
    }

    /// Values on domain cells, first coordinate fastest.
    pub fn domain_values(&self) -> Vec<f64> {
        let p = self.values.params();
        p.domain_cell_indices()
            .into_iter()
            .map(|i| self.values.cells()[i])
            .collect()
    }
}

/// Per-slot normalization exponent `1 - alpha/(mn)`.
pub fn slot_exponent(n: usize, m: usize, alpha: f64) -> f64 {
    1.0 - alpha / (m * n) as f64
}

/// Sandwich factor `6^{nm - alpha}`.
pub fn sandwich_factor(n: usize, m: usize, alpha: f64) -> f64 {
    6f64.powf((n * m) as f64 - alpha)
}

/// Validates `(F, alpha)` and returns the shared lattice.
pub fn check_inputs(funcs: &[LatticeFunction], alpha: f64) -> Result<LatticeParams> {
    let first = funcs
        .first()
        .ok_or_else(|| Error::InvalidExponents("at least one input function is required".into()))?;
    let params = *first.params();
    for f in &funcs[1..] {
        first.check_same_lattice(f)?;
    }
    let limit = (funcs.len() * params.n) as f64;
    if !(alpha >= 0.0 && alpha < limit) {
        return Err(Error::InvalidExponents(format!(
            "alpha = {alpha} must lie in [0, mn) = [0, {limit})"
        )));
    }
    Ok(params)
}

/// `prod_i ∫_B F_i / |Q|^{e}` for a cell box `B` with volume `volume`.
#[inline]
pub fn product_term(funcs: &[LatticeFunction], b: &CellBox, volume: f64, exponent: f64, cell_volume: f64) -> f64 {
    let norm = volume.powf(exponent);
    let mut acc = 1.0;
    for f in funcs {
        let s = f.box_sum(b);
        if s == 0.0 {
            return 0.0;
        }
        acc *= s * cell_volume / norm;
    }
    acc
}

/// Cube values of one grid at every level `-(K+P)..=L`.
#[derive(Debug, Clone)]
pub struct DyadicTerms {
    pub shift: Shift,
    params: LatticeParams,
    levels: Vec<LevelTerms>,
}

#[derive(Debug, Clone)]
pub struct LevelTerms {
    pub layout: LevelLayout,
    pub terms: Vec<f64>,
    /// Per axis: coordinate -> local cube index along that axis.
    axis_slots: [Vec<u32>; 2],
}

impl LevelTerms {
    #[inline]
    pub fn slot_of_cell(&self, idx: [usize; 2]) -> usize {
        let i0 = self.axis_slots[0][idx[0]] as usize;
        let i1 = self.axis_slots[1].get(idx[1]).copied().unwrap_or(0) as usize;
        i0 + self.layout.count[0] * i1
    }
}

impl DyadicTerms {
    /// Evaluates `term(cube)` for every grid cube meeting the extended region.
    pub fn from_fn(
        params: &LatticeParams,
        shift: Shift,
        term: impl Fn(&DyadicCube) -> f64 + Sync,
    ) -> Result<Self> {
        let levels = (params.min_level()..=params.max_level())
            .map(|level| {
                let layout = LevelLayout::new(params, shift, level)?;
                let terms: Vec<f64> = (0..layout.len())
                    .into_par_iter()
                    .map(|slot| {
                        term(&DyadicCube {
                            n: params.n,
                            shift,
                            level,
                            index: layout.index_at(slot),
                        })
                    })
                    .collect();
                let s = params.level_side_cells(level);
                let mut axis_slots = [Vec::new(), Vec::new()];
                for (d, slots) in axis_slots.iter_mut().enumerate().take(params.n) {
                    let o = params.level_offset_cells(level, shift.0[d]);
                    *slots = (0..params.ext_side() as i64)
                        .map(|c| ((c - o).div_euclid(s) - layout.index_lo[d]) as u32)
                        .collect();
                }
                Ok(LevelTerms {
                    layout,
                    terms,
                    axis_slots,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DyadicTerms {
            shift,
            params: *params,
            levels,
        })
    }

    /// Multilinear fractional cube values.
    pub fn multilinear(funcs: &[LatticeFunction], alpha: f64, shift: Shift) -> Result<Self> {
        let params = check_inputs(funcs, alpha)?;
        let e = slot_exponent(params.n, funcs.len(), alpha);
        let cv = params.cell_volume();
        Self::from_fn(&params, shift, |q| {
            product_term(funcs, &q.cell_box(&params), q.volume(), e, cv)
        })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn level(&self, level: i32) -> &LevelTerms {
        &self.levels[(level - self.params.min_level()) as usize]
    }

    pub fn levels(&self) -> impl Iterator<Item = (i32, &LevelTerms)> {
        let min = self.params.min_level();
        self.levels.iter().enumerate().map(move |(i, l)| (min + i as i32, l))
    }

    /// Term of a grid cube; zero for cubes missing the region.
    pub fn term(&self, cube: &DyadicCube) -> f64 {
        let lt = self.level(cube.level);
        let l = &lt.layout;
        for d in 0..self.params.n {
            let rel = cube.index[d] - l.index_lo[d];
            if rel < 0 || rel as usize >= l.count[d] {
                return 0.0;
            }
        }
        lt.terms[l.slot(cube.index)]
    }

    /// Maximum over the containment chain of every cell.
    pub fn chain_max(&self) -> Vec<f64> {
        let p = self.params;
        (0..p.total_cells())
            .into_par_iter()
            .map(|flat| {
                let idx = p.unflat(flat);
                self.levels
                    .iter()
                    .map(|lt| lt.terms[lt.slot_of_cell(idx)])
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// `M_alpha^{D_t}(F)` at every cell of the extended region.
pub fn eval_dyadic_maximal(funcs: &[LatticeFunction], alpha: f64, shift: Shift) -> Result<MaximalResult> {
    let terms = DyadicTerms::multilinear(funcs, alpha, shift)?;
    let params = *terms.params();
    Ok(MaximalResult {
        values: LatticeFunction::from_cells(params, terms.chain_max())?,
        mode: MaximalMode::Dyadic { shift },
        certified_factor: 1.0,
        side_cap: None,
    })
}

/// Single-input dyadic fractional maximal function, walking the chain of
/// each cell cube by cube.
pub fn eval_single_dyadic_maximal(f: &LatticeFunction, alpha: f64, shift: Shift) -> Result<MaximalResult> {
    let params = check_inputs(std::slice::from_ref(f), alpha)?;
    let e = 1.0 - alpha / params.n as f64;
    let values = (0..params.total_cells())
        .into_par_iter()
        .map(|flat| {
            let idx = params.unflat(flat);
            let cell = [idx[0] as i64, idx[1] as i64];
            let mut best: f64 = 0.0;
            for level in params.min_level()..=params.max_level() {
                let q = DyadicCube::containing(&params, shift, level, cell).expect("level in range");
                let v = f.box_integral_cells(&q.cell_box(&params)) / q.volume().powf(e);
                best = best.max(v);
            }
            best
        })
        .collect();
    Ok(MaximalResult {
        values: LatticeFunction::from_cells(params, values)?,
        mode: MaximalMode::Dyadic { shift },
        certified_factor: 1.0,
        side_cap: None,
    })
}

/// Per-cell maximum over every lattice sub-cube of the box with lower corner
/// `anchor` and side `side` (cells), sides capped at `cap`. Output is in
/// local box order, first coordinate fastest.
pub fn lattice_max_in_box(
    funcs: &[LatticeFunction],
    alpha: f64,
    anchor: [usize; 2],
    side: usize,
    cap: Option<usize>,
    scratch: &mut WindowScratch,
) -> Vec<f64> {
    let params = *funcs[0].params();
    let n = params.n;
    let e = slot_exponent(n, funcs.len(), alpha);
    let h = params.h();
    let cv = params.cell_volume();
    let mut out = vec![0.0; side.pow(n as u32)];
    let mut values = Vec::new();
    let top = cap.unwrap_or(side).min(side);
    for r in 1..=top {
        fill_side_values(funcs, &params, anchor, side, r, e, h, cv, &mut values);
        fold_window_max(n, side, r, &values, &mut out, scratch);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn fill_side_values(
    funcs: &[LatticeFunction],
    params: &LatticeParams,
    anchor: [usize; 2],
    side: usize,
    r: usize,
    e: f64,
    h: f64,
    cv: f64,
    values: &mut Vec<f64>,
) {
    let n = params.n;
    let anchors = side + 1 - r;
    let volume = (r as f64 * h).powi(n as i32);
    values.clear();
    let mk = |b0: usize, b1: usize| {
        let mut b = CellBox {
            n,
            lo: [b0 as i64, b1 as i64],
            hi: [(b0 + r) as i64, (b1 + r) as i64],
        };
        if n == 1 {
            b.lo[1] = 0;
            b.hi[1] = 0;
        }
        product_term(funcs, &b, volume, e, cv)
    };
    if n == 1 {
        values.extend((0..anchors).map(|b| mk(anchor[0] + b, 0)));
    } else {
        for b1 in 0..anchors {
            for b0 in 0..anchors {
                values.push(mk(anchor[0] + b0, anchor[1] + b1));
            }
        }
    }
}

/// `M_alpha(F)` with the supremum over all lattice cubes inside the extended
/// region (sides capped at `cap` cells when given).
pub fn eval_lattice_maximal(funcs: &[LatticeFunction], alpha: f64, cap: Option<usize>) -> Result<MaximalResult> {
    let params = check_inputs(funcs, alpha)?;
    let side = params.ext_side();
    let n = params.n;
    let top = cap.unwrap_or(side).clamp(1, side);
    let work: u128 = (1..=top)
        .map(|r| ((side + 1 - r) as u128).pow(n as u32))
        .sum::<u128>()
        * funcs.len() as u128;
    if work > LATTICE_WORK_BUDGET {
        return Err(Error::Budget(format!(
            "lattice maximal evaluation needs {work} cube evaluations; set a side cap"
        )));
    }
    let e = slot_exponent(n, funcs.len(), alpha);
    let h = params.h();
    let cv = params.cell_volume();
    let cells = side.pow(n as u32);
    let values = (1..=top)
        .into_par_iter()
        .fold(
            || (vec![0.0; cells], Vec::new(), WindowScratch::default()),
            |(mut out, mut vals, mut scratch), r| {
                fill_side_values(funcs, &params, [0, 0], side, r, e, h, cv, &mut vals);
                fold_window_max(n, side, r, &vals, &mut out, &mut scratch);
                (out, vals, scratch)
            },
        )
        .map(|(out, _, _)| out)
        .reduce(
            || vec![0.0; cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    Ok(MaximalResult {
        values: LatticeFunction::from_cells(params, values)?,
        mode: MaximalMode::LatticeExact,
        certified_factor: 1.0,
        side_cap: if top < side { Some(top) } else { None },
    })
}

/// Lower and upper brackets for the continuum operator: the maximum of the
/// `2^n` shifted dyadic operators, and that maximum times `6^{nm - alpha}`.
pub fn maximal_sandwich(funcs: &[LatticeFunction], alpha: f64) -> Result<(MaximalResult, MaximalResult)> {
    let params = check_inputs(funcs, alpha)?;
    let mut lower = vec![0.0f64; params.total_cells()];
    for shift in Shift::all(params.n) {
        let r = eval_dyadic_maximal(funcs, alpha, shift)?;
        for (l, v) in lower.iter_mut().zip(r.values.cells()) {
            *l = l.max(*v);
        }
    }
    let factor = sandwich_factor(params.n, funcs.len(), alpha);
    let upper: Vec<f64> = lower.iter().map(|v| v * factor).collect();
    Ok((
        MaximalResult {
            values: LatticeFunction::from_cells(params, lower)?,
            mode: MaximalMode::Sandwich,
            certified_factor: factor,
            side_cap: None,
        },
        MaximalResult {
            values: LatticeFunction::from_cells(params, upper)?,
            mode: MaximalMode::Sandwich,
            certified_factor: factor,
            side_cap: None,
        },
    ))
}

/// `M_sigma^{D_t} f`: per cell, the maximum over dyadic cubes `Q` containing it
/// of `sigma(Q)^{-1} ∫_Q f sigma` (zero when `sigma(Q) = 0`).
pub fn eval_weighted_dyadic_maximal(f: &LatticeFunction, sigma: &LatticeFunction, shift: Shift) -> Result<MaximalResult> {
    let fs = f.mul(sigma)?;
    let params = *f.params();
    let terms = DyadicTerms::from_fn(&params, shift, |q| {
        let b = q.cell_box(&params);
        let s = sigma.box_sum(&b);
        if s > 0.0 {
            fs.box_sum(&b) / s
        } else {
            0.0
        }
    })?;
    Ok(MaximalResult {
        values: LatticeFunction::from_cells(params, terms.chain_max())?,
        mode: MaximalMode::Dyadic { shift },
        certified_factor: 1.0,
        side_cap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice_function, WeightSpec};

    fn ind(params: LatticeParams, lo: f64, hi: f64) -> LatticeFunction {
        let h = params.h();
        LatticeFunction::from_domain_fn(params, |i| {
            let x = (i[0] as f64 + 0.5) * h;
            if x >= lo && x < hi {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn constant_on_whole_region_gives_one() {
        let p = LatticeParams::new(1, 1, 1, 1).unwrap();
        let f = LatticeFunction::from_fn(p, |_| 1.0).unwrap();
        for shift in Shift::all(1) {
            let r = eval_dyadic_maximal(std::slice::from_ref(&f), 0.0, shift).unwrap();
            let v = r.values.cells();
            assert!(v.iter().all(|v| *v <= 1.0 + 1e-12));
            // away from the edges every cell sits in a finest cube inside the region
            assert!(v[3..v.len() - 3].iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
        let r = eval_lattice_maximal(std::slice::from_ref(&f), 0.0, None).unwrap();
        assert!(r.values.cells().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unit_indicator_dyadic_value_at_two() {
        // [0,4), h = 1/12, region [0,8)
        let p = LatticeParams::new(1, 2, 2, 1).unwrap();
        let f = ind(p, 0.0, 1.0);
        let r = eval_dyadic_maximal(std::slice::from_ref(&f), 0.0, Shift::ZERO).unwrap();
        assert!((r.value([24, 0]) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bilinear_fractional_on_domain() {
        let p = LatticeParams::new(1, 2, 1, 1).unwrap();
        let f = build_lattice_function(&WeightSpec::constant(1.0), &p).unwrap();
        let fs = [f.clone(), f];
        let r = eval_dyadic_maximal(&fs, 1.0, Shift::ZERO).unwrap();
        for i in 0..p.domain_side() {
            assert!((r.value([i, 0]) - 4.0).abs() < 1e-12, "cell {i}: {}", r.value([i, 0]));
        }
    }

    #[test]
    fn lattice_value_at_two() {
        let p = LatticeParams::new(1, 2, 2, 1).unwrap();
        let f = ind(p, 0.0, 1.0);
        let r = eval_lattice_maximal(std::slice::from_ref(&f), 0.0, None).unwrap();
        assert!((r.value([24, 0]) - 12.0 / 25.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_dyadic_examples() {
        let p = LatticeParams::new(1, 2, 2, 1).unwrap();
        let sigma = build_lattice_function(&WeightSpec::constant(1.0), &p).unwrap();
        let f = ind(p, 0.0, 0.25);
        let r = eval_weighted_dyadic_maximal(&f, &sigma, Shift::ZERO).unwrap();
        // [1/4, 1/2) is cells 3..6 at h = 1/12
        for c in 3..6 {
            assert!((r.value([c, 0]) - 0.5).abs() < 1e-14);
        }
        let c = sigma.scale(3.0).unwrap();
        let r = eval_weighted_dyadic_maximal(&c, &sigma, Shift::ZERO).unwrap();
        for i in 0..p.domain_side() {
            assert!((r.value([i, 0]) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_factor_arithmetic() {
        assert!((sandwich_factor(1, 2, 0.75) - 6f64.powf(1.25)).abs() < 1e-12);
    }

    #[test]
    fn alpha_out_of_range() {
        let p = LatticeParams::new(1, 1, 0, 1).unwrap();
        let f = LatticeFunction::zeros(p);
        assert!(eval_dyadic_maximal(std::slice::from_ref(&f), 1.0, Shift::ZERO).is_err());
        assert!(eval_dyadic_maximal(std::slice::from_ref(&f), -0.1, Shift::ZERO).is_err());
        assert!(eval_dyadic_maximal(&[], 0.0, Shift::ZERO).is_err());
    }

    #[test]
    fn lattice_mismatch_is_reported() {
        let a = LatticeFunction::zeros(LatticeParams::new(1, 1, 0, 1).unwrap());
        let b = LatticeFunction::zeros(LatticeParams::new(1, 1, 1, 1).unwrap());
        assert!(matches!(
            eval_lattice_maximal(&[a, b], 0.0, None),
            Err(Error::LatticeMismatch(_))
        ));
    }

    #[test]
    fn side_cap_is_recorded() {
        let p = LatticeParams::new(2, 0, 1, 1).unwrap();
        let f = LatticeFunction::from_fn(p, |_| 1.0).unwrap();
        let r = eval_lattice_maximal(std::slice::from_ref(&f), 0.0, Some(3)).unwrap();
        assert_eq!(r.side_cap, Some(3));
    }
}
