//! Lattice geometry: parameters, cell-constant functions with summed-area
//! tables, lattice cubes and the shifted dyadic grids.

mod cube;
mod dyadic;
mod function;
mod params;
mod quad;
mod spec;

pub use cube::{count_cubes_within, cubes_within, CellBox, LatticeCube};
pub use dyadic::{covering_dyadic_cube, enumerate_dyadic_cubes, ClippedCube, DyadicCube, LevelLayout, Shift};
pub use function::LatticeFunction;
pub use params::{LatticeParams, DEFAULT_MAX_CELLS};
pub use quad::{power_average_1d, power_average_2d};
pub use spec::{build_lattice_function, sample_power, WeightSpec};
