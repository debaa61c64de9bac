//! Colourings from matchings, halving, MergeReduce, and measurement of
//! discrepancy and sample error over evaluation nets.

mod coloring;
mod merge;
mod net;

pub use coloring::{color_from_matching, disc_for_range, disc_sup, halve, Coloring, DiscrepancyDiagnostics};
pub use merge::{
    eps_sample_error, merge_reduce, random_sample, size_for_epsilon, MergeReduceOutput, SampleTarget, DEFAULT_DELTA,
    SIZE_CONSTANT,
};
pub(crate) use net::Probe;
pub use net::{build_evaluation_net, directions, EvaluationNet, OffsetMode, RangeId, SMOOTH_REFINEMENT};
