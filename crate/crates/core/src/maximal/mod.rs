//! Maximal-cardinality matching under a caliper.
//!
//! * [`algorithm_a`]: one-to-one matching under a caliper that is
//!   1-Lipschitz in both arguments, one linear pass over sorted scores.
//! * [`algorithm_b`]: the 1-to-n variant.
//! * [`algorithm_c`]: one-to-one matching under a piecewise caliper
//!   (step-sum family), `O((U + V) N)` for `U`, `V` intervals.
//! * [`min_caliper_search`]: bisection for the smallest constant caliper that
//!   matches a required share of the smaller group.

mod linear;
mod min_caliper;
mod piecewise;

pub use linear::{algorithm_a, algorithm_b};
pub use min_caliper::{min_caliper_search, target_pair_count, MinCaliper};
pub use piecewise::{algorithm_c, build_interval_index, IntervalIndex};
