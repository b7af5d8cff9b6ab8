use serde::{Deserialize, Serialize};

use super::params::LatticeParams;
use crate::error::{Error, Result};

/// Half-open box of cells, `lo <= idx < hi` per coordinate. May extend past
/// the extended region; use [`CellBox::clip`] before touching cell data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellBox {
    pub n: usize,
    pub lo: [i64; 2],
    pub hi: [i64; 2],
}

impl CellBox {
    pub fn clip(&self, params: &LatticeParams) -> Option<CellBox> {
        let side = params.ext_side() as i64;
        let mut out = *self;
        for d in 0..self.n {
            out.lo[d] = self.lo[d].max(0);
            out.hi[d] = self.hi[d].min(side);
            if out.lo[d] >= out.hi[d] {
                return None;
            }
        }
        Some(out)
    }

    pub fn cell_count(&self) -> u64 {
        (0..self.n)
            .map(|d| (self.hi[d] - self.lo[d]).max(0) as u64)
            .product()
    }

    pub fn contains_cell(&self, idx: [usize; 2]) -> bool {
        (0..self.n).all(|d| {
            let c = idx[d] as i64;
            self.lo[d] <= c && c < self.hi[d]
        })
    }

    pub fn contains_box(&self, other: &CellBox) -> bool {
        (0..self.n).all(|d| self.lo[d] <= other.lo[d] && other.hi[d] <= self.hi[d])
    }

    pub fn intersect(&self, other: &CellBox) -> Option<CellBox> {
        let mut out = *self;
        for d in 0..self.n {
            out.lo[d] = self.lo[d].max(other.lo[d]);
            out.hi[d] = self.hi[d].min(other.hi[d]);
            if out.lo[d] >= out.hi[d] {
                return None;
            }
        }
        Some(out)
    }

    pub fn within_region(&self, params: &LatticeParams) -> bool {
        let side = params.ext_side() as i64;
        (0..self.n).all(|d| self.lo[d] >= 0 && self.hi[d] <= side)
    }

    /// Flat indices of every cell of the box (clipped to the region).
    pub fn cells(&self, params: &LatticeParams) -> Vec<usize> {
        let Some(b) = self.clip(params) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(b.cell_count() as usize);
        if b.n == 1 {
            out.extend((b.lo[0]..b.hi[0]).map(|i| i as usize));
        } else {
            for i1 in b.lo[1]..b.hi[1] {
                for i0 in b.lo[0]..b.hi[0] {
                    out.push(params.flat([i0 as usize, i1 as usize]));
                }
            }
        }
        out
    }
}

/// A cube whose corners lie on cell boundaries, inside the extended region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeCube {
    pub n: usize,
    pub anchor: [usize; 2],
    /// Side length in cells.
    pub side: usize,
}

impl LatticeCube {
    pub fn new(params: &LatticeParams, anchor: [usize; 2], side: usize) -> Result<Self> {
        let cube = LatticeCube {
            n: params.n,
            anchor: if params.n == 1 { [anchor[0], 0] } else { anchor },
            side,
        };
        if side == 0 {
            return Err(Error::OutOfRange("cube side must be at least one cell".into()));
        }
        if !cube.as_box().within_region(params) {
            return Err(Error::OutOfRange(format!(
                "cube at {:?} with side {side} leaves the extended region",
                &cube.anchor[..cube.n]
            )));
        }
        Ok(cube)
    }

    pub fn as_box(&self) -> CellBox {
        let mut b = CellBox {
            n: self.n,
            lo: [0; 2],
            hi: [0; 2],
        };
        for d in 0..self.n {
            b.lo[d] = self.anchor[d] as i64;
            b.hi[d] = (self.anchor[d] + self.side) as i64;
        }
        b
    }

    pub fn side_length(&self, params: &LatticeParams) -> f64 {
        self.side as f64 * params.h()
    }

    pub fn volume(&self, params: &LatticeParams) -> f64 {
        self.side_length(params).powi(self.n as i32)
    }

    pub fn within_domain(&self, params: &LatticeParams) -> bool {
        let d = params.domain_side();
        (0..self.n).all(|i| self.anchor[i] + self.side <= d)
    }

    pub fn contains(&self, other: &LatticeCube) -> bool {
        self.as_box().contains_box(&other.as_box())
    }

    pub fn contains_cell(&self, idx: [usize; 2]) -> bool {
        self.as_box().contains_cell(idx)
    }

    /// Lower corner in real coordinates.
    pub fn corner(&self, params: &LatticeParams) -> Vec<f64> {
        let h = params.h();
        (0..self.n).map(|d| self.anchor[d] as f64 * h).collect()
    }

    pub fn cells(&self, params: &LatticeParams) -> Vec<usize> {
        self.as_box().cells(params)
    }
}

/// Every lattice cube inside `[0, limit)^n`, ordered by anchor then side
/// (the deterministic tie-break order used by all argmax scans).
pub fn cubes_within(params: &LatticeParams, limit: usize, max_side: Option<usize>) -> Vec<LatticeCube> {
    let cap = max_side.unwrap_or(limit).min(limit);
    let mut out = Vec::new();
    if params.n == 1 {
        for a in 0..limit {
            for s in 1..=cap.min(limit - a) {
                out.push(LatticeCube {
                    n: 1,
                    anchor: [a, 0],
                    side: s,
                });
            }
        }
    } else {
        for a0 in 0..limit {
            for a1 in 0..limit {
                let room = (limit - a0).min(limit - a1);
                for s in 1..=cap.min(room) {
                    out.push(LatticeCube {
                        n: 2,
                        anchor: [a0, a1],
                        side: s,
                    });
                }
            }
        }
    }
    out
}

/// Number of lattice cubes inside `[0, limit)^n` without materializing them.
pub fn count_cubes_within(n: usize, limit: usize, max_side: Option<usize>) -> u128 {
    let cap = max_side.unwrap_or(limit).min(limit);
    (1..=cap)
        .map(|s| ((limit - s + 1) as u128).pow(n as u32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_matches_count() {
        let p = LatticeParams::new(2, 0, 1, 1).unwrap();
        let d = p.domain_side();
        let cubes = cubes_within(&p, d, None);
        assert_eq!(cubes.len() as u128, count_cubes_within(2, d, None));
        assert!(cubes.iter().all(|c| c.within_domain(&p)));
        assert!(cubes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn out_of_region_cube_is_rejected() {
        let p = LatticeParams::new(1, 1, 0, 1).unwrap();
        assert!(LatticeCube::new(&p, [10, 0], 3).is_err());
        assert!(LatticeCube::new(&p, [9, 0], 3).is_ok());
        assert!(LatticeCube::new(&p, [0, 0], 0).is_err());
    }

    #[test]
    fn clip_drops_overhang() {
        let p = LatticeParams::new(1, 1, 0, 1).unwrap();
        let b = CellBox {
            n: 1,
            lo: [-2, 0],
            hi: [4, 0],
        };
        let c = b.clip(&p).unwrap();
        assert_eq!((c.lo[0], c.hi[0]), (0, 4));
        assert_eq!(b.cell_count(), 6);
    }
}
