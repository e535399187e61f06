use crate::caliper::{CaliperSpec, Certification};
use crate::error::{MatchError, Result};
use crate::result::MatchResult;
use crate::score::ScoreSet;

/// Maximum-cardinality one-to-one matching under a Lipschitz caliper.
///
/// Walks both sorted arrays once. If the current treated and control are
/// admissible they are paired; otherwise the one with the smaller score
/// cannot be used by any later partner and is skipped (the control on ties).
/// The result is non-crossing and takes at most `K + L` iterations.
pub fn algorithm_a(scores: &ScoreSet, caliper: &CaliperSpec) -> Result<MatchResult> {
    caliper.require(scores, "one-to-one maximal matching", Certification::Lipschitz)?;
    Ok(scan(scores, caliper, 1))
}

/// Maximal 1-to-n matching: each treated object takes up to `n` controls,
/// each control is used at most once, and the number of pairs is maximal.
///
/// With `n = 1` this is exactly [`algorithm_a`]. The number of matched
/// treated objects is not maximized.
pub fn algorithm_b(scores: &ScoreSet, caliper: &CaliperSpec, n: usize) -> Result<MatchResult> {
    if n == 0 {
        return Err(MatchError::InvalidArgument(
            "controls per treated must be at least 1".into(),
        ));
    }
    caliper.require(scores, "1-to-n maximal matching", Certification::Lipschitz)?;
    Ok(scan(scores, caliper, n))
}

pub(crate) fn scan(scores: &ScoreSet, caliper: &CaliperSpec, n: usize) -> MatchResult {
    let x = scores.treated();
    let y = scores.control();
    let mut pairs = Vec::new();
    let (mut i, mut j, mut k) = (0, 0, 0);
    let mut iterations = 0;
    while i < x.len() && j < y.len() {
        iterations += 1;
        if caliper.admits(x[i], y[j]) {
            pairs.push((i, j));
            k += 1;
            if k == n {
                k = 0;
                i += 1;
            }
            j += 1;
        } else if x[i] < y[j] {
            k = 0;
            i += 1;
        } else {
            j += 1;
        }
    }
    MatchResult::from_pairs(scores, pairs, iterations)
}

/// Number of pairs [`algorithm_a`] finds with constant caliper `c`, without
/// building the pair list.
pub(crate) fn count_constant(scores: &ScoreSet, c: f64) -> usize {
    let x = scores.treated();
    let y = scores.control();
    let (mut i, mut j, mut m) = (0, 0, 0);
    while i < x.len() && j < y.len() {
        if (x[i] - y[j]).abs() <= c {
            m += 1;
            i += 1;
            j += 1;
        } else if x[i] < y[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caliper::{PiecewiseLinear, StepFunction};
    use crate::oracle::{oracle_b_matching, oracle_max_matching, FeasibilityGraph};
    use proptest::prelude::*;

    fn constant(x: &[f64], y: &[f64], c: f64) -> MatchResult {
        let s = ScoreSet::new(x, y).unwrap();
        algorithm_a(&s, &CaliperSpec::constant(c)).unwrap()
    }

    #[test]
    fn empty_treated_group() {
        let r = constant(&[], &[1.0], 0.5);
        assert_eq!(r.pair_count(), 0);
        assert_eq!(r.loop_iterations, 0);
    }

    #[test]
    fn exact_tie_with_zero_caliper() {
        let r = constant(&[0.5], &[0.5], 0.0);
        assert_eq!(r.pairs, vec![(0, 0)]);
    }

    #[test]
    fn three_by_two_example() {
        let r = constant(&[0.0, 0.1, 0.2], &[0.05, 0.25], 0.06);
        assert_eq!(r.pairs, vec![(0, 0), (2, 1)]);
        let s = ScoreSet::new(&[0.0, 0.1, 0.2], &[0.05, 0.25]).unwrap();
        let g = FeasibilityGraph::build(&s, &CaliperSpec::constant(0.06));
        assert_eq!(oracle_max_matching(&g).unwrap(), 2);
    }

    #[test]
    fn identical_scores_match_fully() {
        let r = constant(&[0.3; 5], &[0.3; 4], 0.0);
        assert_eq!(r.pair_count(), 4);
    }

    #[test]
    fn one_to_n_examples() {
        let s = ScoreSet::new(&[0.0], &[0.01, 0.02, 0.03]).unwrap();
        let r = algorithm_b(&s, &CaliperSpec::constant(0.05), 2).unwrap();
        assert_eq!(r.pairs, vec![(0, 0), (0, 1)]);
        assert_eq!(r.controls_per_treated, vec![2]);
        let g = FeasibilityGraph::build(&s, &CaliperSpec::constant(0.05));
        assert_eq!(oracle_b_matching(&g, 2).unwrap(), 2);

        let s = ScoreSet::new(&[0.0, 1.0], &[0.01, 0.02]).unwrap();
        let r = algorithm_b(&s, &CaliperSpec::constant(0.05), 3).unwrap();
        assert_eq!(r.pair_count(), 2);
        assert_eq!(r.controls_per_treated, vec![2, 0]);
    }

    #[test]
    fn zero_n_rejected() {
        let s = ScoreSet::new(&[0.0], &[0.0]).unwrap();
        assert!(algorithm_b(&s, &CaliperSpec::constant(0.1), 0).is_err());
    }

    #[test]
    fn step_caliper_rejected() {
        let s = ScoreSet::new(&[0.0], &[0.0]).unwrap();
        let c = CaliperSpec::StepSum {
            f: StepFunction::constant(0.1).unwrap(),
            s: StepFunction::constant(0.0).unwrap(),
        };
        assert!(matches!(
            algorithm_a(&s, &c),
            Err(MatchError::UncertifiedCaliper { .. })
        ));
    }

    #[test]
    fn variable_width_caliper() {
        // c(x, y) = 0.01 + 0.5 x: wide on the right, narrow on the left
        let g = PiecewiseLinear::new(vec![(0.0, 0.01), (1.0, 0.51)]).unwrap();
        let h = PiecewiseLinear::constant(0.0).unwrap();
        let c = CaliperSpec::SeparableLipschitz { g, h };
        let s = ScoreSet::new(&[0.0, 0.8], &[0.05, 0.5]).unwrap();
        let r = algorithm_a(&s, &c).unwrap();
        assert_eq!(r.pairs, vec![(1, 1)]);
    }

    fn grid_scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((0u32..=100).prop_map(|v| v as f64 / 100.0), 0..=max_len)
    }

    fn lipschitz_caliper() -> impl Strategy<Value = CaliperSpec> {
        prop_oneof![
            (0.0f64..0.3).prop_map(CaliperSpec::constant),
            (0.0f64..0.2, -1.0f64..=1.0, 0.0f64..0.2, -1.0f64..=1.0).prop_map(
                |(g0, gs, h0, hs)| {
                    // slopes clamped so both components stay nonnegative on [0, 1]
                    let g = PiecewiseLinear::new(vec![(0.0, g0), (1.0, (g0 + gs).max(0.0))]);
                    let h = PiecewiseLinear::new(vec![(0.0, h0), (1.0, (h0 + hs).max(0.0))]);
                    CaliperSpec::SeparableLipschitz {
                        g: g.unwrap(),
                        h: h.unwrap(),
                    }
                }
            ),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn maximal_and_non_crossing(
            xs in grid_scores(12),
            ys in grid_scores(12),
            c in lipschitz_caliper(),
        ) {
            let s = ScoreSet::new(&xs, &ys).unwrap();
            prop_assume!(c.validate(&s).is_ok());
            let r = algorithm_a(&s, &c).unwrap();
            let g = FeasibilityGraph::build(&s, &c);
            prop_assert_eq!(r.pair_count(), oracle_max_matching(&g).unwrap());
            prop_assert!(r.loop_iterations <= s.k() + s.l());
            for w in r.pairs.windows(2) {
                prop_assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
            }
            for &(i, j) in &r.pairs {
                prop_assert!(c.admits(s.treated()[i], s.control()[j]));
            }
        }

        #[test]
        fn one_to_n_maximal(
            xs in grid_scores(8),
            ys in grid_scores(12),
            c in lipschitz_caliper(),
            n in 1usize..=4,
        ) {
            let s = ScoreSet::new(&xs, &ys).unwrap();
            prop_assume!(c.validate(&s).is_ok());
            let r = algorithm_b(&s, &c, n).unwrap();
            let g = FeasibilityGraph::build(&s, &c);
            prop_assert_eq!(r.pair_count(), oracle_b_matching(&g, n).unwrap());
            prop_assert!(r.loop_iterations <= s.k() + s.l());
            prop_assert!(r.controls_per_treated.iter().all(|&d| d <= n));
            let mut controls: Vec<usize> = r.pairs.iter().map(|p| p.1).collect();
            controls.dedup();
            prop_assert_eq!(controls.len(), r.pair_count());
            if n == 1 {
                prop_assert_eq!(r, algorithm_a(&s, &c).unwrap());
            }
        }

        #[test]
        fn monotone_in_constant_caliper(
            xs in grid_scores(30),
            ys in grid_scores(30),
            c1 in 0.0f64..0.3,
            c2 in 0.0f64..0.3,
        ) {
            let s = ScoreSet::new(&xs, &ys).unwrap();
            let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            let a = algorithm_a(&s, &CaliperSpec::constant(lo)).unwrap().pair_count();
            let b = algorithm_a(&s, &CaliperSpec::constant(hi)).unwrap().pair_count();
            prop_assert!(a <= b);
            prop_assert_eq!(count_constant(&s, lo), a);
        }
    }
}
