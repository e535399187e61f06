use crate::caliper::{CaliperSpec, Certification};
use crate::error::{MatchError, Result};
use crate::result::MatchResult;
use crate::score::ScoreSet;

/// Re-pairs the matched objects of a one-to-one matching by rank: the j-th
/// smallest matched treated score goes with the j-th smallest matched
/// control score.
///
/// The matched subsets are unchanged. Under a Lipschitz caliper the new
/// pairs still satisfy it (the linear scan would find exactly this pairing
/// on the matched subsets), and neither the total nor the largest distance
/// can grow. Input pairs that repeat an index or break the caliper are
/// rejected. Unchecked calipers are re-verified on the output.
pub fn rematch_sorted(
    result: &MatchResult,
    scores: &ScoreSet,
    caliper: &CaliperSpec,
) -> Result<MatchResult> {
    caliper.require(scores, "rematching", Certification::Lipschitz)?;
    let x = scores.treated();
    let y = scores.control();
    let mut treated_used = vec![false; scores.k()];
    let mut control_used = vec![false; scores.l()];
    for &(i, j) in &result.pairs {
        if i >= scores.k() || j >= scores.l() {
            return Err(MatchError::MalformedMatching(format!(
                "pair ({i}, {j}) is out of range"
            )));
        }
        if std::mem::replace(&mut treated_used[i], true) {
            return Err(MatchError::MalformedMatching(format!(
                "treated position {i} appears twice"
            )));
        }
        if std::mem::replace(&mut control_used[j], true) {
            return Err(MatchError::MalformedMatching(format!(
                "control position {j} appears twice"
            )));
        }
        if !caliper.admits(x[i], y[j]) {
            return Err(MatchError::MalformedMatching(format!(
                "pair ({i}, {j}) with scores {} / {} violates the caliper",
                x[i], y[j]
            )));
        }
    }

    let treated = (0..scores.k()).filter(|&i| treated_used[i]);
    let control = (0..scores.l()).filter(|&j| control_used[j]);
    let pairs: Vec<(usize, usize)> = treated.zip(control).collect();
    if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| !caliper.admits(x[i], y[j])) {
        return Err(MatchError::MalformedMatching(format!(
            "rank pairing ({i}, {j}) breaks the caliper; it is not Lipschitz"
        )));
    }
    let n = scores.k() + scores.l();
    Ok(MatchResult::from_pairs(scores, pairs, n))
}
