use thiserror::Error;

use crate::caliper::CaliperFamily;

/// Errors produced while preparing inputs or running a matching algorithm.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("non-finite {group} score {value} at row {row}")]
    NonFiniteScore {
        group: &'static str,
        row: usize,
        value: f64,
    },

    #[error("invalid caliper: {0}")]
    InvalidCaliper(String),

    #[error("negative caliper value {value} at treated score {treated} / control score {control}")]
    NegativeCaliper {
        treated: f64,
        control: f64,
        value: f64,
    },

    #[error("{family} caliper is not certified for {algorithm}")]
    UncertifiedCaliper {
        family: CaliperFamily,
        algorithm: &'static str,
    },

    #[error("{group} score {score} lies below the first caliper interval starting at {first_cut}")]
    UncoveredScore {
        group: &'static str,
        score: f64,
        first_cut: f64,
    },

    #[error("complete matching needs groups of equal size, got {treated} treated and {control} controls")]
    UnequalGroups { treated: usize, control: usize },

    #[error("malformed matching: {0}")]
    MalformedMatching(String),

    #[error("target of {target} pairs is infeasible: at most {achievable} pairs can be matched")]
    Infeasible { target: usize, achievable: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle size guard exceeded: {0}")]
    SizeGuard(String),
}

pub type Result<T> = std::result::Result<T, MatchError>;
