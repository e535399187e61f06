use crate::error::{MatchError, Result};
use crate::result::MatchResult;
use crate::score::ScoreSet;

fn require_equal(scores: &ScoreSet) -> Result<()> {
    if scores.k() == scores.l() {
        Ok(())
    } else {
        Err(MatchError::UnequalGroups {
            treated: scores.k(),
            control: scores.l(),
        })
    }
}

/// Complete one-to-one matching of equal-size groups pairing the i-th
/// smallest treated score with the i-th smallest control score.
///
/// This pairing minimizes `sum phi(X - Y)` for every convex nonnegative
/// `phi`, and with it the largest within-pair distance.
pub fn optimal_complete_matching(scores: &ScoreSet) -> Result<MatchResult> {
    require_equal(scores)?;
    let pairs = (0..scores.k()).map(|i| (i, i)).collect();
    Ok(MatchResult::from_pairs(scores, pairs, scores.k()))
}

/// Complete matching of equal-size groups pairing ranks in reverse, which
/// maximizes `sum phi(X - Y)` for every convex nonnegative `phi`.
pub fn anti_optimal_complete_matching(scores: &ScoreSet) -> Result<MatchResult> {
    require_equal(scores)?;
    let k = scores.k();
    let pairs = (0..k).map(|i| (i, k - 1 - i)).collect();
    Ok(MatchResult::from_pairs(scores, pairs, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let s = ScoreSet::new(&[0.0, 1.0], &[0.4, 0.6]).unwrap();
        let best = optimal_complete_matching(&s).unwrap();
        assert_eq!(best.pairs, vec![(0, 0), (1, 1)]);
        assert!((best.total_distance() - 0.8).abs() < 1e-12);
        let worst = anti_optimal_complete_matching(&s).unwrap();
        assert_eq!(worst.pairs, vec![(0, 1), (1, 0)]);
        assert!((worst.total_distance() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn singleton() {
        let s = ScoreSet::new(&[0.7], &[0.1]).unwrap();
        assert_eq!(optimal_complete_matching(&s).unwrap().pairs, vec![(0, 0)]);
        assert_eq!(anti_optimal_complete_matching(&s).unwrap().pairs, vec![(0, 0)]);
    }

    #[test]
    fn unequal_sizes_rejected() {
        let s = ScoreSet::new(&[0.7, 0.2], &[0.1]).unwrap();
        let err = optimal_complete_matching(&s).unwrap_err();
        assert_eq!(err, MatchError::UnequalGroups { treated: 2, control: 1 });
        assert!(err.to_string().contains("equal size"));
        assert!(anti_optimal_complete_matching(&s).is_err());
    }

    #[test]
    fn pairs_reference_input_rows_through_perm() {
        let s = ScoreSet::new(&[0.9, 0.1], &[0.2, 0.8]).unwrap();
        let r = optimal_complete_matching(&s).unwrap();
        assert_eq!(r.original_rows(&s), vec![(1, 0), (0, 1)]);
    }
}
