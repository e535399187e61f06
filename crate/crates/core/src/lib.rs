//! Matching two groups on a scalar index (for example a propensity score).
//!
//! * [`maximal`]: maximum-cardinality one-to-one and 1-to-n matching under
//!   constant, Lipschitz and piecewise step calipers, in linear time after
//!   sorting, plus a bisection search for the smallest constant caliper that
//!   reaches a target pair count.
//! * [`nn`]: greedy nearest-neighbor matching (sorted list and balanced tree
//!   variants), rank rematching, and optimal / anti-optimal complete
//!   matching.
//! * [`oracle`]: slow brute-force references used by the tests.
//! * [`sim`]: Monte-Carlo comparison of the methods on uniform scores.
//!
//! All algorithms work on a [`ScoreSet`], which holds both groups sorted
//! ascending together with the permutation back to input rows. Pair indices
//! in a [`MatchResult`] refer to sorted positions; use
//! [`MatchResult::original_rows`] to map them back.

pub mod caliper;
pub mod error;
pub mod maximal;
pub mod nn;
pub mod oracle;
pub mod result;
pub mod score;
pub mod sim;

pub use caliper::{
    eval_caliper, validate_caliper, CaliperFamily, CaliperSpec, PiecewiseLinear, StepFunction,
    ValidityReport,
};
pub use error::{MatchError, Result};
pub use maximal::{
    algorithm_a, algorithm_b, algorithm_c, min_caliper_search, target_pair_count, MinCaliper,
};
pub use nn::{
    anti_optimal_complete_matching, gnnm_sorted, gnnm_tree, optimal_complete_matching,
    rematch_sorted, ProcessingOrder,
};
pub use result::MatchResult;
pub use score::{prepare_score_set, ScoreSet};
pub use sim::{emit_cdf, run_simulation, SimConfig, SimSummary, Statistic};
