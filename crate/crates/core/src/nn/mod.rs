//! Greedy nearest-neighbor matching, rematching and complete matching.
//!
//! Nearest-neighbor semantics shared by both GNNM variants and the naive
//! reference in [`crate::oracle`]:
//!
//! * treated objects are visited one at a time in the processing order;
//! * each looks up its nearest *unmatched* control by exact distance;
//!   equidistant controls resolve to the smaller score, and equal scores to
//!   the smaller sorted position;
//! * the caliper is tested against that single control only. If it fails,
//!   the treated object stays unmatched; there is no fallback to the
//!   second-nearest control.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::score::ScoreSet;

mod complete;
mod gnnm;
mod rematch;
mod tree;

pub use complete::{anti_optimal_complete_matching, optimal_complete_matching};
pub use gnnm::gnnm_sorted;
pub use rematch::rematch_sorted;
pub use tree::{gnnm_tree, ControlTree, Nearest};

/// Order in which treated objects are processed by greedy matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessingOrder {
    /// Original input row order.
    AsGiven,
    /// Ascending score.
    Sorted,
    /// Uniformly random permutation drawn from a ChaCha8 stream seeded with
    /// `seed`.
    Random { seed: u64 },
}

impl ProcessingOrder {
    /// Sorted treated positions in processing order.
    pub fn treated_sequence(&self, scores: &ScoreSet) -> Vec<usize> {
        match *self {
            ProcessingOrder::Sorted => (0..scores.k()).collect(),
            ProcessingOrder::AsGiven => {
                let mut seq = vec![0; scores.k()];
                for (pos, &row) in scores.treated_perm().iter().enumerate() {
                    seq[row] = pos;
                }
                seq
            }
            ProcessingOrder::Random { seed } => {
                let mut seq: Vec<usize> = (0..scores.k()).collect();
                seq.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                seq
            }
        }
    }
}

/// `a + b` as an unevaluated sum `hi + lo` with `hi = fl(a + b)`, exact.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let hi = a + b;
    let bb = hi - a;
    let lo = (a - (hi - bb)) + (b - bb);
    (hi, lo)
}

/// Exact `|x - y|` as a normalized `(hi, lo)` pair.
#[inline]
fn exact_abs_diff(x: f64, y: f64) -> (f64, f64) {
    let (hi, lo) = two_sum(x, -y);
    if hi < 0.0 || (hi == 0.0 && lo < 0.0) {
        (-hi, -lo)
    } else {
        (hi, lo)
    }
}

/// Compares `|x - a|` with `|x - b|` without rounding error.
#[inline]
pub(crate) fn cmp_distance(x: f64, a: f64, b: f64) -> Ordering {
    let (ah, al) = exact_abs_diff(x, a);
    let (bh, bl) = exact_abs_diff(x, b);
    // partial_cmp, not total_cmp: a negated exact difference carries lo = -0.0
    let cmp = |u: f64, v: f64| u.partial_cmp(&v).expect("finite distances");
    cmp(ah, bh).then(cmp(al, bl))
}

/// Sorted controls grouped into runs of equal score. Each run hands out its
/// positions left to right, so equal-score ties resolve to the smaller
/// position.
#[derive(Debug, Clone)]
pub(crate) struct ControlBlocks {
    scores: Vec<f64>,
    cursor: Vec<usize>,
    end: Vec<usize>,
}

impl ControlBlocks {
    pub(crate) fn new(control: &[f64]) -> Self {
        let mut scores = Vec::new();
        let mut cursor = Vec::new();
        let mut end = Vec::new();
        for (j, &y) in control.iter().enumerate() {
            if scores.last() == Some(&y) {
                *end.last_mut().unwrap() = j + 1;
            } else {
                scores.push(y);
                cursor.push(j);
                end.push(j + 1);
            }
        }
        Self {
            scores,
            cursor,
            end,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.scores.len()
    }

    #[inline]
    pub(crate) fn score(&self, b: usize) -> f64 {
        self.scores[b]
    }

    /// Next unmatched control position of block `b`.
    #[inline]
    pub(crate) fn front(&self, b: usize) -> usize {
        self.cursor[b]
    }

    pub(crate) fn remaining(&self, b: usize) -> usize {
        self.end[b] - self.cursor[b]
    }

    /// Consumes the front control; returns `true` when the block is now empty.
    #[inline]
    pub(crate) fn take(&mut self, b: usize) -> bool {
        self.cursor[b] += 1;
        self.cursor[b] == self.end[b]
    }
}
