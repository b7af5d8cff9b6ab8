use super::cube::{CellBox, LatticeCube};
use super::params::LatticeParams;
use crate::error::{Error, Result};

/// Unevaluated double-double sum `hi + lo`, used for the prefix table so box
/// sums stay accurate relative to the box even when the running total is
/// many orders of magnitude larger.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    #[inline]
    fn add(self, other: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    fn from(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Nonnegative cell-constant function on the extended region of a lattice,
/// with a summed-area table for O(1) box integrals.
#[derive(Debug, Clone)]
pub struct LatticeFunction {
    params: LatticeParams,
    cells: Vec<f64>,
    prefix: Vec<Dd>,
}

impl PartialEq for LatticeFunction {
    fn eq(&self, other: &Self) -> bool {
        self.params.same_grid(&other.params) && self.cells == other.cells
    }
}

impl LatticeFunction {
    /// Takes cell values for the whole extended region (flat order, first
    /// coordinate fastest).
    pub fn from_cells(params: LatticeParams, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != params.total_cells() {
            return Err(Error::InvalidSpec(format!(
                "expected {} cells, got {}",
                params.total_cells(),
                cells.len()
            )));
        }
        if let Some((i, v)) = cells.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "cell {i} has value {v}; cells must be finite and nonnegative"
            )));
        }
        let prefix = build_prefix(&params, &cells);
        Ok(LatticeFunction {
            params,
            cells,
            prefix,
        })
    }

    pub fn zeros(params: LatticeParams) -> Self {
        Self::from_cells(params, vec![0.0; params.total_cells()]).expect("zeros are valid")
    }

    /// Evaluates `f` at every cell multi-index of the extended region.
    pub fn from_fn(params: LatticeParams, mut f: impl FnMut([usize; 2]) -> f64) -> Result<Self> {
        let cells = (0..params.total_cells()).map(|i| f(params.unflat(i))).collect();
        Self::from_cells(params, cells)
    }

    /// Evaluates `f` on domain cells; padding cells are zero.
    pub fn from_domain_fn(params: LatticeParams, mut f: impl FnMut([usize; 2]) -> f64) -> Result<Self> {
        Self::from_fn(params, |idx| if params.in_domain(idx) { f(idx) } else { 0.0 })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }

    #[inline]
    pub fn value(&self, idx: [usize; 2]) -> f64 {
        self.cells[self.params.flat(idx)]
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::from_cells(self.params, self.cells.iter().map(|&v| f(v)).collect())
    }

    /// Applies `f` to domain cells, leaving padding at zero.
    pub fn map_domain(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let p = self.params;
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, &v)| if p.in_domain(p.unflat(i)) { f(v) } else { 0.0 })
            .collect();
        Self::from_cells(p, cells)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| v * c)
    }

    pub fn check_same_lattice(&self, other: &LatticeFunction) -> Result<()> {
        if !self.params.same_grid(&other.params) {
            return Err(Error::LatticeMismatch(format!(
                "{:?} vs {:?}",
                self.params, other.params
            )));
        }
        Ok(())
    }

    /// Cellwise product.
    pub fn mul(&self, other: &LatticeFunction) -> Result<Self> {
        self.check_same_lattice(other)?;
        Self::from_cells(
            self.params,
            self.cells.iter().zip(&other.cells).map(|(a, b)| a * b).collect(),
        )
    }

    /// Zero outside `cube`.
    pub fn restrict(&self, cube: &CellBox) -> Result<Self> {
        let p = self.params;
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, &v)| if cube.contains_cell(p.unflat(i)) { v } else { 0.0 })
            .collect();
        Self::from_cells(p, cells)
    }

    /// Sum of cell values over a box, clipped to the region.
    pub fn box_sum(&self, b: &CellBox) -> f64 {
        let Some(b) = b.clip(&self.params) else {
            return 0.0;
        };
        if self.params.n == 1 {
            let hi = self.prefix[b.hi[0] as usize];
            let lo = self.prefix[b.lo[0] as usize];
            hi.add(lo.neg()).value().max(0.0)
        } else {
            let w = self.params.ext_side() + 1;
            let at = |i: i64, j: i64| self.prefix[i as usize + w * j as usize];
            let s = at(b.hi[0], b.hi[1])
                .add(at(b.lo[0], b.hi[1]).neg())
                .add(at(b.hi[0], b.lo[1]).neg())
                .add(at(b.lo[0], b.lo[1]));
            s.value().max(0.0)
        }
    }

    /// `∫_Q F` for a cell box (region-clipped; data vanish outside).
    #[inline]
    pub fn box_integral_cells(&self, b: &CellBox) -> f64 {
        self.box_sum(b) * self.params.cell_volume()
    }

    /// `∫_Q F` for a lattice cube inside the extended region.
    pub fn box_integral(&self, cube: &LatticeCube) -> Result<f64> {
        let b = cube.as_box();
        if cube.n != self.params.n || !b.within_region(&self.params) {
            return Err(Error::OutOfRange(format!(
                "cube at {:?} side {} is outside the extended region",
                &cube.anchor[..cube.n],
                cube.side
            )));
        }
        Ok(self.box_integral_cells(&b))
    }

    /// Straight summation over the cells of a box; reference path for the
    /// summed-area table.
    pub fn naive_box_integral(&self, b: &CellBox) -> f64 {
        b.cells(&self.params)
            .iter()
            .map(|&i| self.cells[i])
            .sum::<f64>()
            * self.params.cell_volume()
    }

    pub fn total_integral(&self) -> f64 {
        let side = self.params.ext_side() as i64;
        let b = CellBox {
            n: self.params.n,
            lo: [0, 0],
            hi: [side, if self.params.n == 2 { side } else { 0 }],
        };
        self.box_integral_cells(&b)
    }

    /// Minimum cell value over a box (region-clipped).
    pub fn box_min(&self, b: &CellBox) -> f64 {
        b.cells(&self.params)
            .iter()
            .map(|&i| self.cells[i])
            .fold(f64::INFINITY, f64::min)
    }
}

fn build_prefix(params: &LatticeParams, cells: &[f64]) -> Vec<Dd> {
    let s = params.ext_side();
    if params.n == 1 {
        let mut prefix = Vec::with_capacity(s + 1);
        let mut acc = Dd::default();
        prefix.push(acc);
        for &v in cells {
            acc = acc.add(Dd::from(v));
            prefix.push(acc);
        }
        prefix
    } else {
        let w = s + 1;
        let mut prefix = vec![Dd::default(); w * w];
        for j in 0..s {
            let mut row = Dd::default();
            for i in 0..s {
                row = row.add(Dd::from(cells[i + s * j]));
                prefix[(i + 1) + w * (j + 1)] = prefix[(i + 1) + w * j].add(row);
            }
        }
        prefix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_function_integrals() {
        let p = LatticeParams::new(1, 2, 1, 1).unwrap();
        let one = LatticeFunction::from_domain_fn(p, |_| 1.0).unwrap();
        let h = p.h();
        // [0,2)
        let q = LatticeCube::new(&p, [0, 0], (2.0 / h).round() as usize).unwrap();
        assert!((one.box_integral(&q).unwrap() - 2.0).abs() < 1e-12);
        assert!((one.total_integral() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_over_larger_interval() {
        let p = LatticeParams::new(1, 2, 1, 1).unwrap();
        let unit = (1.0 / p.h()).round() as usize;
        let f = LatticeFunction::from_domain_fn(p, |i| if i[0] < unit { 1.0 } else { 0.0 }).unwrap();
        let q = LatticeCube::new(&p, [0, 0], 4 * unit).unwrap();
        assert!((f.box_integral(&q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_cells() {
        let p = LatticeParams::new(1, 0, 0, 1).unwrap();
        assert!(LatticeFunction::from_cells(p, vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(LatticeFunction::from_cells(p, vec![1.0; 5]).is_err());
    }

    #[test]
    fn two_dimensional_box_sum_matches_naive() {
        let p = LatticeParams::new(2, 0, 1, 1).unwrap();
        let f = LatticeFunction::from_fn(p, |i| (i[0] * 7 + i[1] * 3) as f64 % 5.0 + 0.5).unwrap();
        let b = CellBox {
            n: 2,
            lo: [2, 3],
            hi: [7, 8],
        };
        let fast = f.box_integral_cells(&b);
        let slow = f.naive_box_integral(&b);
        assert!((fast - slow).abs() <= 1e-12 * slow);
    }

    #[test]
    fn small_box_next_to_huge_values_stays_accurate() {
        let p = LatticeParams::new(1, 1, 0, 1).unwrap();
        let f = LatticeFunction::from_fn(p, |i| if i[0] < 6 { 1e8 } else { 1e-8 }).unwrap();
        let b = CellBox {
            n: 1,
            lo: [7, 0],
            hi: [9, 0],
        };
        let fast = f.box_integral_cells(&b);
        let slow = f.naive_box_integral(&b);
        assert!((fast - slow).abs() <= 1e-12 * slow, "{fast} vs {slow}");
    }
}
