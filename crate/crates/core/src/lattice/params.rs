use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of cells of the extended region.
pub const DEFAULT_MAX_CELLS: usize = 1 << 24;

/// Discretization of `[0, 2^K)^n` padded to `[0, 2^{K+P})^n`.
///
/// Cells have width `h = 2^{-L} / 3`. The factor three makes every cube of
/// the shifted grids (shift `0` or `1/3` per coordinate) at levels
/// `-(K+P)..=L` start and end on cell boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub n: usize,
    #[serde(rename = "K")]
    pub domain_exp: u32,
    #[serde(rename = "L")]
    pub finest_level: u32,
    #[serde(rename = "P")]
    pub padding: u32,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

impl LatticeParams {
    pub fn new(n: usize, domain_exp: u32, finest_level: u32, padding: u32) -> Result<Self> {
        Self::with_budget(n, domain_exp, finest_level, padding, DEFAULT_MAX_CELLS)
    }

    pub fn with_budget(
        n: usize,
        domain_exp: u32,
        finest_level: u32,
        padding: u32,
        max_cells: usize,
    ) -> Result<Self> {
        let params = LatticeParams {
            n,
            domain_exp,
            finest_level,
            padding,
            max_cells,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 1 && self.n != 2 {
            return Err(Error::InvalidParams(format!(
                "dimension n must be 1 or 2, got {}",
                self.n
            )));
        }
        if self.padding < 1 {
            return Err(Error::InvalidParams("padding P must be at least 1".into()));
        }
        let exp = self.domain_exp + self.padding + self.finest_level;
        if exp > 40 {
            return Err(Error::Budget(format!("K+P+L = {exp} is too large")));
        }
        let side = 3u128 << exp;
        let total = side.pow(self.n as u32);
        if total > self.max_cells as u128 {
            return Err(Error::Budget(format!(
                "extended region has {total} cells, budget is {}",
                self.max_cells
            )));
        }
        Ok(())
    }

    /// Cell width `h = 2^{-L}/3`.
    pub fn h(&self) -> f64 {
        1.0 / (3.0 * (self.finest_level as f64).exp2())
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    /// Cells per side of the domain, `3 * 2^{K+L}`.
    pub fn domain_side(&self) -> usize {
        3usize << (self.domain_exp + self.finest_level)
    }

    /// Cells per side of the extended region, `3 * 2^{K+P+L}`.
    pub fn ext_side(&self) -> usize {
        3usize << (self.domain_exp + self.padding + self.finest_level)
    }

    pub fn total_cells(&self) -> usize {
        self.ext_side().pow(self.n as u32)
    }

    pub fn domain_cells(&self) -> usize {
        self.domain_side().pow(self.n as u32)
    }

    /// Coarsest dyadic level, `-(K+P)`.
    pub fn min_level(&self) -> i32 {
        -((self.domain_exp + self.padding) as i32)
    }

    pub fn max_level(&self) -> i32 {
        self.finest_level as i32
    }

    pub fn check_level(&self, level: i32) -> Result<()> {
        if level < self.min_level() || level > self.max_level() {
            return Err(Error::OutOfRange(format!(
                "level {level} outside [{}, {}]",
                self.min_level(),
                self.max_level()
            )));
        }
        Ok(())
    }

    /// Side of a level-`k` dyadic cube in cells: `3 * 2^{L-k}`.
    pub fn level_side_cells(&self, level: i32) -> i64 {
        3i64 << (self.max_level() - level)
    }

    /// Cell offset of the shifted grid at `level`: `(-1)^k 2^{L-k}` when the
    /// coordinate carries the `1/3` shift, zero otherwise.
    pub fn level_offset_cells(&self, level: i32, shifted: bool) -> i64 {
        if !shifted {
            return 0;
        }
        let mag = 1i64 << (self.max_level() - level);
        if level.rem_euclid(2) == 0 {
            mag
        } else {
            -mag
        }
    }

    /// Flat index of a cell multi-index in the extended region.
    #[inline]
    pub fn flat(&self, idx: [usize; 2]) -> usize {
        if self.n == 1 {
            idx[0]
        } else {
            idx[0] + self.ext_side() * idx[1]
        }
    }

    #[inline]
    pub fn unflat(&self, flat: usize) -> [usize; 2] {
        if self.n == 1 {
            [flat, 0]
        } else {
            let s = self.ext_side();
            [flat % s, flat / s]
        }
    }

    pub fn in_domain(&self, idx: [usize; 2]) -> bool {
        let d = self.domain_side();
        (0..self.n).all(|i| idx[i] < d)
    }

    /// Flat indices of every domain cell, first coordinate fastest.
    pub fn domain_cell_indices(&self) -> Vec<usize> {
        let d = self.domain_side();
        if self.n == 1 {
            (0..d).collect()
        } else {
            let mut out = Vec::with_capacity(d * d);
            for i1 in 0..d {
                for i0 in 0..d {
                    out.push(self.flat([i0, i1]));
                }
            }
            out
        }
    }

    /// Lower corner of a cell in real coordinates.
    pub fn cell_corner(&self, idx: [usize; 2]) -> [f64; 2] {
        let h = self.h();
        [idx[0] as f64 * h, idx[1] as f64 * h]
    }

    /// Same lattice geometry, different budget.
    pub fn same_grid(&self, other: &LatticeParams) -> bool {
        self.n == other.n
            && self.domain_exp == other.domain_exp
            && self.finest_level == other.finest_level
            && self.padding == other.padding
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_sizes() {
        let p = LatticeParams::new(1, 2, 2, 1).unwrap();
        assert_eq!(p.h(), 1.0 / 12.0);
        assert_eq!(p.domain_side(), 48);
        assert_eq!(p.ext_side(), 96);
        assert_eq!(p.min_level(), -3);
        assert_eq!(p.level_side_cells(-1), 24);
        assert_eq!(p.level_side_cells(2), 3);
    }

    #[test]
    fn rejects_bad_dimension_and_padding() {
        assert!(LatticeParams::new(3, 1, 1, 1).is_err());
        assert!(LatticeParams::new(1, 1, 1, 0).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let err = LatticeParams::with_budget(2, 4, 4, 2, 1000).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn shifted_offsets_alternate_in_sign() {
        let p = LatticeParams::new(1, 2, 0, 1).unwrap();
        // h = 1/3: level -1 cubes [2m - 2/3, 2m + 4/3) start two cells left.
        assert_eq!(p.level_offset_cells(-1, true), -2);
        assert_eq!(p.level_offset_cells(0, true), 1);
        assert_eq!(p.level_offset_cells(0, false), 0);
    }
}
