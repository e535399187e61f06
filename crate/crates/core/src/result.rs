use crate::score::ScoreSet;

/// A matching over the sorted positions of a [`ScoreSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// `(treated, control)` positions into the sorted score arrays.
    pub pairs: Vec<(usize, usize)>,
    /// `|X - Y|` for each pair, aligned with `pairs`.
    pub distances: Vec<f64>,
    /// Number of controls matched to each treated position (length K).
    pub controls_per_treated: Vec<usize>,
    /// Main-loop iteration count (for the tree search: guess steps).
    pub loop_iterations: usize,
}

impl MatchResult {
    pub(crate) fn from_pairs(
        scores: &ScoreSet,
        pairs: Vec<(usize, usize)>,
        loop_iterations: usize,
    ) -> Self {
        let x = scores.treated();
        let y = scores.control();
        let distances = pairs.iter().map(|&(i, j)| (x[i] - y[j]).abs()).collect();
        let mut controls_per_treated = vec![0; scores.k()];
        for &(i, _) in &pairs {
            controls_per_treated[i] += 1;
        }
        Self {
            pairs,
            distances,
            controls_per_treated,
            loop_iterations,
        }
    }

    /// Number of matched pairs (M).
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Largest within-pair distance, 0 for an empty matching.
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_distance(&self) -> f64 {
        self.distances.iter().sum()
    }

    /// Mean within-pair distance, 0 for an empty matching.
    pub fn mean_distance(&self) -> f64 {
        if self.distances.is_empty() {
            0.0
        } else {
            self.total_distance() / self.distances.len() as f64
        }
    }

    /// Pairs sorted by `(treated, control)`, for set comparisons.
    pub fn sorted_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = self.pairs.clone();
        pairs.sort_unstable();
        pairs
    }

    /// Translates pairs to original row indices of the input arrays.
    pub fn original_rows(&self, scores: &ScoreSet) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .map(|&(i, j)| (scores.treated_perm()[i], scores.control_perm()[j]))
            .collect()
    }
}
