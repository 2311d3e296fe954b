//! B-spline quasi-interpolation on periodic Smolyak sparse grids.

// `!(x > y)` is used deliberately so NaN arguments are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod bspline;
pub mod dyadic;
pub mod error;
pub mod experiment;
pub mod hier;
pub mod laurent;
pub mod quasi_interp;
pub mod scheme;
pub mod smolyak;
pub mod tensor;
pub mod testfuncs;

pub use error::{Error, Result};
pub use hier::{HierCoeffs, MultiIndex};
pub use laurent::{LaurentPoly, Rational, ShiftOperator};
pub use scheme::QIScheme;
pub use smolyak::{count_points, enumerate_grid, recover, recover_fn, SampleGrid, SmolyakIndexSet};
