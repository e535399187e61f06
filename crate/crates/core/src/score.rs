//! Sorted treated/control score arrays with permutation maps back to input rows.

use crate::error::{MatchError, Result};

/// Treated and control scores sorted ascending, plus the permutations that
/// produced them.
///
/// `treated()[k] == input_treated[treated_perm()[k]]` for every `k`; the same
/// holds for controls. Every algorithm in this crate works on sorted
/// positions; use the permutation maps to recover original rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    treated: Vec<f64>,
    control: Vec<f64>,
    treated_perm: Vec<usize>,
    control_perm: Vec<usize>,
}

impl ScoreSet {
    /// Sorts both groups (stable, so equal scores keep input order).
    ///
    /// Rejects NaN and infinite scores, naming the offending row.
    pub fn new(treated: &[f64], control: &[f64]) -> Result<Self> {
        let (treated, treated_perm) = sort_group(treated, "treated")?;
        let (control, control_perm) = sort_group(control, "control")?;
        Ok(Self {
            treated,
            control,
            treated_perm,
            control_perm,
        })
    }

    pub fn treated(&self) -> &[f64] {
        &self.treated
    }

    pub fn control(&self) -> &[f64] {
        &self.control
    }

    pub fn treated_perm(&self) -> &[usize] {
        &self.treated_perm
    }

    pub fn control_perm(&self) -> &[usize] {
        &self.control_perm
    }

    /// Number of treated objects (K).
    pub fn k(&self) -> usize {
        self.treated.len()
    }

    /// Number of control objects (L).
    pub fn l(&self) -> usize {
        self.control.len()
    }

    /// Smallest and largest score over both groups, or `None` when both are empty.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        let lo = [self.treated.first(), self.control.first()]
            .into_iter()
            .flatten()
            .copied()
            .reduce(f64::min)?;
        let hi = [self.treated.last(), self.control.last()]
            .into_iter()
            .flatten()
            .copied()
            .reduce(f64::max)?;
        Some((lo, hi))
    }

    /// `max - min` over all scores; zero for empty input.
    pub fn range(&self) -> f64 {
        self.bounds().map_or(0.0, |(lo, hi)| hi - lo)
    }
}

/// Free-function form of [`ScoreSet::new`].
pub fn prepare_score_set(treated: &[f64], control: &[f64]) -> Result<ScoreSet> {
    ScoreSet::new(treated, control)
}

fn sort_group(values: &[f64], group: &'static str) -> Result<(Vec<f64>, Vec<usize>)> {
    if let Some((row, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(MatchError::NonFiniteScore { group, row, value });
    }
    let mut perm: Vec<usize> = (0..values.len()).collect();
    // stable; all values are finite here, so partial_cmp never fails
    perm.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let sorted = perm.iter().map(|&p| values[p]).collect();
    Ok((sorted, perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        let s = ScoreSet::new(&[], &[]).unwrap();
        assert_eq!(s.k(), 0);
        assert_eq!(s.l(), 0);
        assert_eq!(s.bounds(), None);
        assert_eq!(s.range(), 0.0);
    }

    #[test]
    fn two_element_sort() {
        let s = ScoreSet::new(&[0.3, 0.1], &[0.2]).unwrap();
        assert_eq!(s.treated(), &[0.1, 0.3]);
        assert_eq!(s.treated_perm(), &[1, 0]);
        assert_eq!(s.control(), &[0.2]);
        assert_eq!(s.control_perm(), &[0]);
    }

    #[test]
    fn ties_keep_input_order() {
        let s = ScoreSet::new(&[0.5, 0.2, 0.5, 0.2], &[]).unwrap();
        assert_eq!(s.treated_perm(), &[1, 3, 0, 2]);
    }

    #[test]
    fn rejects_non_finite_with_row() {
        let err = ScoreSet::new(&[0.1, 0.2], &[0.3, f64::NAN]).unwrap_err();
        match err {
            MatchError::NonFiniteScore { group, row, .. } => {
                assert_eq!(group, "control");
                assert_eq!(row, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(ScoreSet::new(&[f64::INFINITY], &[]).is_err());
    }

    #[test]
    fn signed_zeros_are_ties() {
        let s = ScoreSet::new(&[0.0, -0.0], &[]).unwrap();
        assert_eq!(s.treated_perm(), &[0, 1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn perm_reproduces_sorted(
            xs in prop::collection::vec(-1e6f64..1e6, 0..40),
            ys in prop::collection::vec(-1e6f64..1e6, 0..40),
        ) {
            let s = ScoreSet::new(&xs, &ys).unwrap();
            let mut reference = xs.clone();
            reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assert_eq!(s.treated(), &reference[..]);
            for (k, &p) in s.treated_perm().iter().enumerate() {
                prop_assert_eq!(s.treated()[k], xs[p]);
            }
            for (k, &p) in s.control_perm().iter().enumerate() {
                prop_assert_eq!(s.control()[k], ys[p]);
            }
            let mut seen = s.control_perm().to_vec();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..ys.len()).collect::<Vec<_>>());
        }
    }
}
