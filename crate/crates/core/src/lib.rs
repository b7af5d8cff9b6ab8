#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod error;
pub mod harness;
pub mod lattice;
pub mod maximal;
pub mod testing;
pub mod weights;

pub use error::{Error, Result};
