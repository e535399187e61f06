use std::cmp::Ordering;

use super::{cmp_distance, ControlBlocks};
use crate::caliper::{CaliperSpec, Certification};
use crate::error::Result;
use crate::result::MatchResult;
use crate::score::ScoreSet;

const NONE: usize = usize::MAX;

/// Greedy nearest-neighbor matching, treated objects in ascending score.
///
/// Unmatched controls live in a doubly linked list of equal-score runs. A
/// pointer to the first run not below the current treated score only moves
/// right, so the whole pass is linear once the scores are sorted.
pub fn gnnm_sorted(scores: &ScoreSet, caliper: &CaliperSpec) -> Result<MatchResult> {
    caliper.require(scores, "greedy nearest-neighbor matching", Certification::Any)?;
    let x = scores.treated();
    let y = scores.control();
    let mut blocks = ControlBlocks::new(y);
    let end = blocks.len();

    // runs 0..end plus the end sentinel; prev[end] is the last live run
    let mut prev: Vec<usize> = (0..=end).map(|b| b.wrapping_sub(1)).collect();
    prev[0] = NONE;
    let mut next: Vec<usize> = (1..=end).collect();

    let mut right = 0;
    let mut pairs = Vec::new();
    let mut iterations = 0;

    for (i, &xi) in x.iter().enumerate() {
        iterations += 1;
        while right != end && blocks.score(right) < xi {
            right = next[right];
            iterations += 1;
        }
        let left = prev[right];
        let chosen = match (left != NONE, right != end) {
            (false, false) => break,
            (true, false) => left,
            (false, true) => right,
            (true, true) => match cmp_distance(xi, blocks.score(left), blocks.score(right)) {
                Ordering::Greater => right,
                _ => left,
            },
        };
        let j = blocks.front(chosen);
        if !caliper.admits(xi, y[j]) {
            continue;
        }
        pairs.push((i, j));
        if blocks.take(chosen) {
            let (p, n) = (prev[chosen], next[chosen]);
            if p != NONE {
                next[p] = n;
            }
            prev[n] = p;
            if chosen == right {
                right = n;
            }
        }
    }
    Ok(MatchResult::from_pairs(scores, pairs, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ProcessingOrder;
    use crate::oracle::oracle_gnnm_naive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(x: &[f64], y: &[f64], c: f64) -> Vec<(usize, usize)> {
        let s = ScoreSet::new(x, y).unwrap();
        gnnm_sorted(&s, &CaliperSpec::constant(c)).unwrap().pairs
    }

    #[test]
    fn nearest_of_two() {
        assert_eq!(run(&[0.5], &[0.4, 0.55], 0.2), vec![(0, 1)]);
    }

    #[test]
    fn exact_tie_goes_to_smaller_score() {
        assert_eq!(run(&[0.5], &[0.4, 0.6], 0.2), vec![(0, 0)]);
    }

    #[test]
    fn no_fallback_to_second_nearest() {
        // nearest control (0.45) fails a caliper that the farther one would
        // pass under the variable caliper below
        let s = ScoreSet::new(&[0.5], &[0.45, 0.6]).unwrap();
        let c = CaliperSpec::unchecked(|_, y| if y > 0.5 { 0.2 } else { 0.01 });
        assert!(gnnm_sorted(&s, &c).unwrap().is_empty());
    }

    #[test]
    fn empty_groups() {
        assert!(run(&[], &[0.1], 1.0).is_empty());
        assert!(run(&[0.1], &[], 1.0).is_empty());
    }

    #[test]
    fn greedy_is_not_maximal() {
        // 0.45 takes 0.48, leaving 0.5 with only 0.41; pairing
        // (0.45, 0.41) and (0.5, 0.48) would have matched both
        assert_eq!(run(&[0.45, 0.5], &[0.41, 0.48], 0.05), vec![(0, 1)]);
    }

    #[test]
    fn duplicate_controls_hand_out_smallest_position() {
        assert_eq!(
            run(&[0.3, 0.3, 0.3], &[0.2, 0.3, 0.3], 0.05),
            vec![(0, 1), (1, 2)]
        );
    }

    #[test]
    fn matches_naive_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let k = rng.gen_range(0..=100);
            let l = rng.gen_range(0..=100);
            let grid = rng.gen_bool(0.5);
            let draw = |rng: &mut ChaCha8Rng| {
                if grid {
                    rng.gen_range(0..=40) as f64 / 40.0
                } else {
                    rng.gen::<f64>()
                }
            };
            let xs: Vec<f64> = (0..k).map(|_| draw(&mut rng)).collect();
            let ys: Vec<f64> = (0..l).map(|_| draw(&mut rng)).collect();
            let s = ScoreSet::new(&xs, &ys).unwrap();
            let c = CaliperSpec::constant(rng.gen_range(0.0..0.2));
            let fast = gnnm_sorted(&s, &c).unwrap();
            let slow = oracle_gnnm_naive(&s, &c, &ProcessingOrder::Sorted);
            assert_eq!(fast.pairs, slow.pairs);
            assert!(fast.loop_iterations <= k + l + 1);
        }
    }
}
