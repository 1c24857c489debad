//! Counting dynamic programs for exact Banzhaf values.
//!
//! All three engines count, for each point, the coalitions where inserting
//! the point flips the hard-label utility. If the top-k weight sum of a
//! coalition is `W` and inserting the point shifts it by `delta` (its own
//! weight, minus the weight of the member it pushes out of the top k), the
//! utility rises `0 -> 1` iff `W` lies in `(-delta, 0]` and falls `1 -> 0` iff
//! `W` lies in `(0, -delta]`. At most one of the two ranges is non-empty.
//!
//! Table indices follow the conventions of the counting recurrences: points
//! are numbered `1..=n` by distance and `m = 0` denotes "no last member"
//! (the empty coalition).

use std::ops::RangeInclusive;

pub mod efficient;
pub mod standard;
pub mod unweighted;

pub use efficient::{banzhaf_dp_efficient, compute_g, GVector};
pub use standard::{banzhaf_dp_standard, build_f_table, FTable};
pub use unweighted::{
    banzhaf_dp_unweighted, banzhaf_dp_unweighted_with, build_shared_tables, NegativeTailTable,
    SharedTables,
};

/// Top-k sums `W` for which a shift of `delta` turns the utility on.
pub(crate) fn raise_range(delta: i64) -> RangeInclusive<i64> {
    (1 - delta)..=0
}

/// Top-k sums `W` for which a shift of `delta` turns the utility off.
pub(crate) fn lower_range(delta: i64) -> RangeInclusive<i64> {
    1..=-delta
}
