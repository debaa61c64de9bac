//! Points, kernel profiles, smoothed ranges and the density evaluations
//! built on them.

pub mod io;
mod kernel;
mod points;
mod range;

pub use kernel::{KernelKind, KernelProfile, GAUSSIAN_TRUNCATION};
pub use points::{dist, dist2, dist_linf, dot, PointSet};
pub use range::{boundary_value, kde, sde, superlevel_indices, RangeShape, SmoothedRange};
