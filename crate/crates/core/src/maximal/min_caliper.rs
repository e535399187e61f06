use super::linear::count_constant;
use crate::error::{MatchError, Result};
use crate::score::ScoreSet;

/// Outcome of [`min_caliper_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinCaliper {
    /// Upper end of the final bracket; always reaches the target.
    pub caliper: f64,
    /// Lower end of the final bracket; misses the target unless it equals
    /// `caliper` (zero caliper already suffices).
    pub lower: f64,
    pub target_pairs: usize,
    /// Pairs matched with `caliper`.
    pub achieved_pairs: usize,
    /// Bisection steps actually run: `iterations`, occasionally one or two
    /// more to absorb rounding, fewer if the bracket hits float resolution.
    pub steps: usize,
}

impl MinCaliper {
    pub fn bracket_width(&self) -> f64 {
        self.caliper - self.lower
    }
}

/// Number of pairs needed to match a `fraction` of the smaller group,
/// rounded up. Products within `1e-9` of an integer count as that integer,
/// so `0.3 * 10` asks for 3 pairs rather than 4. Fractions above 1 give
/// targets above the group size.
pub fn target_pair_count(fraction: f64, smaller_group: usize) -> usize {
    let raw = fraction * smaller_group as f64;
    let nearest = raw.round();
    let pairs = if (raw - nearest).abs() <= 1e-9 * (smaller_group.max(1) as f64) {
        nearest
    } else {
        raw.ceil()
    };
    pairs.max(0.0) as usize
}

/// Smallest constant caliper (up to the bracket width) under which the
/// maximal one-to-one matching covers `target_fraction` of `min(K, L)`.
///
/// Bisects `[0, max score - min score]` for `iterations` steps, counting
/// pairs with the linear scan at each midpoint, so the cost is
/// `O(iterations * N)`. Returns 0 immediately when a zero caliper suffices.
pub fn min_caliper_search(
    scores: &ScoreSet,
    target_fraction: f64,
    iterations: usize,
) -> Result<MinCaliper> {
    if !(target_fraction > 0.0 && target_fraction.is_finite()) {
        return Err(MatchError::InvalidArgument(format!(
            "target fraction must be positive and finite, got {target_fraction}"
        )));
    }
    if iterations == 0 {
        return Err(MatchError::InvalidArgument(
            "at least one bisection step is required".into(),
        ));
    }
    let target = target_pair_count(target_fraction, scores.k().min(scores.l()));
    let at_zero = count_constant(scores, 0.0);
    if at_zero >= target {
        return Ok(MinCaliper {
            caliper: 0.0,
            lower: 0.0,
            target_pairs: target,
            achieved_pairs: at_zero,
            steps: 0,
        });
    }
    let range = scores.range();
    let at_range = count_constant(scores, range);
    if at_range < target {
        return Err(MatchError::Infeasible {
            target,
            achievable: at_range,
        });
    }

    // Midpoints round, so after `iterations` halvings the computed width can
    // exceed `range / 2^iterations` by an ulp; keep halving until it does not.
    let width_bound = range * 0.5f64.powi(iterations.min(1100) as i32);
    let (mut lo, mut hi) = (0.0, range);
    let mut achieved = at_range;
    let mut steps = 0;
    while steps < iterations || hi - lo > width_bound {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            // bracket can no longer shrink in floating point
            break;
        }
        steps += 1;
        let m = count_constant(scores, mid);
        if m >= target {
            hi = mid;
            achieved = m;
        } else {
            lo = mid;
        }
    }
    Ok(MinCaliper {
        caliper: hi,
        lower: lo,
        target_pairs: target,
        achieved_pairs: achieved,
        steps,
    })
}
