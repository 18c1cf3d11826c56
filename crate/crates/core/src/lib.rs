//! Computational toolkit for the metric polytope `M_n`: the set of distance
//! assignments on the pairs of `n` points that satisfy every triangle
//! inequality and have diameter at most 2.

pub mod discrete;
pub mod error;
pub mod estimators;
pub mod exactvol;
pub mod metric;
pub mod sampler;

pub use error::{Error, Result};
pub use metric::{MetricVector, PairIndexer};
