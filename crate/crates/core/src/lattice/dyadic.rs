//! The shifted dyadic grids `D_t = {2^{-k}([0,1)^n + m + (-1)^k t)}`,
//! `t in {0, 1/3}^n`, restricted to levels `-(K+P)..=L` of a lattice.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::cube::{CellBox, LatticeCube};
use super::params::LatticeParams;
use crate::error::{Error, Result};

/// Shift vector `t`; `true` in a coordinate means `1/3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Shift(pub [bool; 2]);

impl Shift {
    pub const ZERO: Shift = Shift([false, false]);

    /// All `2^n` shifts in lexicographic order (`0 < 1/3` per coordinate).
    pub fn all(n: usize) -> Vec<Shift> {
        if n == 1 {
            vec![Shift([false, false]), Shift([true, false])]
        } else {
            vec![
                Shift([false, false]),
                Shift([false, true]),
                Shift([true, false]),
                Shift([true, true]),
            ]
        }
    }

    /// Uniform shift (`0` or `1/3` in every coordinate).
    pub fn uniform(n: usize, third: bool) -> Shift {
        let mut s = [false; 2];
        for v in s.iter_mut().take(n) {
            *v = third;
        }
        Shift(s)
    }

    pub fn components(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|d| if self.0[d] { 1.0 / 3.0 } else { 0.0 })
            .collect()
    }

    pub fn label(&self, n: usize) -> String {
        (0..n)
            .map(|d| if self.0[d] { "1/3" } else { "0" })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A cube of a shifted dyadic grid: side `2^{-level}`, lower corner
/// `2^{-level}(index + (-1)^level t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub n: usize,
    pub shift: Shift,
    pub level: i32,
    pub index: [i64; 2],
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "D[t=({})] k={} m={:?}",
            self.shift.label(self.n),
            self.level,
            &self.index[..self.n]
        )
    }
}

impl DyadicCube {
    /// The unique level-`level` cube of grid `shift` containing `cell`.
    pub fn containing(params: &LatticeParams, shift: Shift, level: i32, cell: [i64; 2]) -> Result<Self> {
        params.check_level(level)?;
        let s = params.level_side_cells(level);
        let mut index = [0i64; 2];
        for d in 0..params.n {
            let o = params.level_offset_cells(level, shift.0[d]);
            index[d] = (cell[d] - o).div_euclid(s);
        }
        Ok(DyadicCube {
            n: params.n,
            shift,
            level,
            index,
        })
    }

    pub fn side_cells(&self, params: &LatticeParams) -> i64 {
        params.level_side_cells(self.level)
    }

    pub fn anchor_cells(&self, params: &LatticeParams) -> [i64; 2] {
        let s = self.side_cells(params);
        let mut a = [0i64; 2];
        for d in 0..self.n {
            a[d] = self.index[d] * s + params.level_offset_cells(self.level, self.shift.0[d]);
        }
        a
    }

    /// Full (unclipped) cell box of the cube.
    pub fn cell_box(&self, params: &LatticeParams) -> CellBox {
        let s = self.side_cells(params);
        let a = self.anchor_cells(params);
        let mut b = CellBox {
            n: self.n,
            lo: [0; 2],
            hi: [0; 2],
        };
        for d in 0..self.n {
            b.lo[d] = a[d];
            b.hi[d] = a[d] + s;
        }
        b
    }

    pub fn side_length(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Lebesgue measure of the full cube, `2^{-level n}`.
    pub fn volume(&self) -> f64 {
        (-(self.level as f64) * self.n as f64).exp2()
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        let side = self.side_length();
        let sign = if self.level.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        self.shift
            .components(self.n)
            .iter()
            .enumerate()
            .map(|(d, t)| side * (self.index[d] as f64 + sign * t))
            .collect()
    }

    pub fn overhangs(&self, params: &LatticeParams) -> bool {
        !self.cell_box(params).within_region(params)
    }

    pub fn to_lattice_cube(&self, params: &LatticeParams) -> Option<LatticeCube> {
        if self.overhangs(params) {
            return None;
        }
        let a = self.anchor_cells(params);
        Some(LatticeCube {
            n: self.n,
            anchor: [a[0] as usize, a[1] as usize],
            side: self.side_cells(params) as usize,
        })
    }

    pub fn parent(&self, params: &LatticeParams) -> Option<DyadicCube> {
        if self.level <= params.min_level() {
            return None;
        }
        let a = self.anchor_cells(params);
        DyadicCube::containing(params, self.shift, self.level - 1, a).ok()
    }

    pub fn children(&self, params: &LatticeParams) -> Vec<DyadicCube> {
        if self.level >= params.max_level() {
            return Vec::new();
        }
        let a = self.anchor_cells(params);
        let half = self.side_cells(params) / 2;
        let mut out = Vec::with_capacity(1 << self.n);
        let corners: &[[i64; 2]] = if self.n == 1 {
            &[[0, 0], [1, 0]]
        } else {
            &[[0, 0], [1, 0], [0, 1], [1, 1]]
        };
        for c in corners {
            let cell = [a[0] + c[0] * half, a[1] + c[1] * half];
            out.push(
                DyadicCube::containing(params, self.shift, self.level + 1, cell)
                    .expect("child level is in range"),
            );
        }
        out
    }

    /// Containment of cubes of one grid.
    pub fn contains(&self, other: &DyadicCube, params: &LatticeParams) -> bool {
        self.shift == other.shift
            && self.level <= other.level
            && self.cell_box(params).contains_box(&other.cell_box(params))
    }
}

/// Index ranges of the level-`level` cubes of grid `shift` that meet the
/// extended region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelLayout {
    pub level: i32,
    pub index_lo: [i64; 2],
    pub count: [usize; 2],
}

impl LevelLayout {
    pub fn new(params: &LatticeParams, shift: Shift, level: i32) -> Result<Self> {
        params.check_level(level)?;
        let s = params.level_side_cells(level);
        let last = params.ext_side() as i64 - 1;
        let mut index_lo = [0i64; 2];
        let mut count = [1usize; 2];
        for d in 0..params.n {
            let o = params.level_offset_cells(level, shift.0[d]);
            let lo = (0 - o).div_euclid(s);
            let hi = (last - o).div_euclid(s);
            index_lo[d] = lo;
            count[d] = (hi - lo + 1) as usize;
        }
        Ok(LevelLayout {
            level,
            index_lo,
            count,
        })
    }

    pub fn len(&self) -> usize {
        self.count[0] * self.count[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of `index` in the row-major table, first coordinate fastest.
    #[inline]
    pub fn slot(&self, index: [i64; 2]) -> usize {
        let i0 = (index[0] - self.index_lo[0]) as usize;
        let i1 = (index[1] - self.index_lo[1]) as usize;
        i0 + self.count[0] * i1
    }

    pub fn index_at(&self, slot: usize) -> [i64; 2] {
        [
            self.index_lo[0] + (slot % self.count[0]) as i64,
            self.index_lo[1] + (slot / self.count[0]) as i64,
        ]
    }
}

/// A grid cube intersected with the extended region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClippedCube {
    pub cube: DyadicCube,
    pub clipped: CellBox,
    pub overhangs: bool,
}

/// Cubes of grid `shift` at every level of `levels` (coarse to fine), each
/// clipped to the extended region. Per level the clipped boxes tile the region.
pub fn enumerate_dyadic_cubes(
    params: &LatticeParams,
    shift: Shift,
    levels: std::ops::RangeInclusive<i32>,
) -> Result<Vec<ClippedCube>> {
    params.check_level(*levels.start())?;
    params.check_level(*levels.end())?;
    let mut out = Vec::new();
    for level in levels {
        let layout = LevelLayout::new(params, shift, level)?;
        for slot in 0..layout.len() {
            let cube = DyadicCube {
                n: params.n,
                shift,
                level,
                index: layout.index_at(slot),
            };
            let full = cube.cell_box(params);
            let clipped = full.clip(params).expect("layout cubes meet the region");
            out.push(ClippedCube {
                cube,
                clipped,
                overhangs: clipped != full,
            });
        }
    }
    Ok(out)
}

/// Cube of some shifted grid containing `cube` with side at most six times
/// larger. Ties go to the finest level, then the lexicographically smallest
/// shift. Overhanging grid cubes are never returned.
pub fn covering_dyadic_cube(params: &LatticeParams, cube: &LatticeCube) -> Result<(Shift, DyadicCube)> {
    if !cube.within_domain(params) {
        return Err(Error::OutOfRange(format!(
            "cube at {:?} side {} is not inside the domain",
            &cube.anchor[..cube.n],
            cube.side
        )));
    }
    let target = cube.as_box();
    let anchor = [cube.anchor[0] as i64, cube.anchor[1] as i64];
    let max_side = 6 * cube.side as i64;
    for level in (params.min_level()..=params.max_level()).rev() {
        let side = params.level_side_cells(level);
        if side < cube.side as i64 {
            continue;
        }
        if side > max_side {
            break;
        }
        for shift in Shift::all(params.n) {
            let q = DyadicCube::containing(params, shift, level, anchor)?;
            let b = q.cell_box(params);
            if b.contains_box(&target) && b.within_region(params) {
                return Ok((shift, q));
            }
        }
    }
    Err(Error::InsufficientPadding(format!(
        "no shifted dyadic cube of side <= 6*{} cells covers {:?} inside the extended region",
        cube.side,
        &cube.anchor[..cube.n]
    )))
}
