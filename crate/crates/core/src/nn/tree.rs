//! Greedy nearest-neighbor matching for treated objects in arbitrary order.
//!
//! Controls sit in a perfectly balanced binary search tree built once from
//! the sorted control array (one vertex per run of equal scores). Matching
//! only ever deletes, so the depth never grows:
//!
//! * a matched vertex with two children becomes *void*: it keeps its score
//!   for navigation but no longer offers a control;
//! * a matched vertex with fewer children is spliced out, and if that leaves
//!   a void parent with a single child, the parent is spliced out as well.
//!
//! The nearest live control is found by walking down with two to four
//! *guesses*, ordered by score, each either static (a settled candidate) or
//! branching (a subtree still to explore). Two static dummy guesses at
//! `-inf` and `+inf` bracket the search.

use std::cmp::Ordering;

use super::{cmp_distance, ControlBlocks, ProcessingOrder};
use crate::caliper::{CaliperSpec, Certification};
use crate::error::Result;
use crate::result::MatchResult;
use crate::score::ScoreSet;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Vertex {
    left: usize,
    right: usize,
    parent: usize,
    void: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Low,
    High,
    Vertex(usize),
}

#[derive(Debug, Clone, Copy)]
struct Guess {
    target: Target,
    branching: bool,
}

impl Guess {
    fn fixed(target: Target) -> Self {
        Self {
            target,
            branching: false,
        }
    }

    fn branch(vertex: usize) -> Self {
        Self {
            target: Target::Vertex(vertex),
            branching: true,
        }
    }
}

/// Outcome of a nearest-control lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nearest {
    /// Vertex holding the control; pass to [`ControlTree::take`].
    pub vertex: usize,
    /// Sorted control position.
    pub control: usize,
    /// Guess steps taken by the descent.
    pub steps: usize,
}

/// Balanced search tree over unmatched controls with void-vertex deletion.
#[derive(Debug, Clone)]
pub struct ControlTree {
    blocks: ControlBlocks,
    vertices: Vec<Vertex>,
    root: usize,
    remaining: usize,
}

impl ControlTree {
    /// Builds the tree from controls sorted ascending.
    pub fn new(sorted_control: &[f64]) -> Self {
        let blocks = ControlBlocks::new(sorted_control);
        let mut vertices = vec![
            Vertex {
                left: NIL,
                right: NIL,
                parent: NIL,
                void: false,
            };
            blocks.len()
        ];
        let root = build(&mut vertices, 0, blocks.len(), NIL);
        Self {
            blocks,
            vertices,
            root,
            remaining: sorted_control.len(),
        }
    }

    /// Unmatched controls left.
    pub fn len(&self) -> usize {
        self.remaining
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    fn score(&self, target: Target) -> f64 {
        match target {
            Target::Low => f64::NEG_INFINITY,
            Target::High => f64::INFINITY,
            Target::Vertex(v) => self.blocks.score(v),
        }
    }

    /// Nearest unmatched control to `x`; exact ties go to the smaller score.
    pub fn nearest(&self, x: f64) -> Option<Nearest> {
        if self.root == NIL {
            return None;
        }
        let mut guesses: Vec<Guess> = vec![
            Guess::fixed(Target::Low),
            Guess::branch(self.root),
            Guess::fixed(Target::High),
        ];
        let mut next: Vec<Guess> = Vec::with_capacity(4);
        let mut steps = 0;
        loop {
            steps += 1;
            debug_assert!((2..=4).contains(&guesses.len()));
            debug_assert!(guesses
                .windows(2)
                .all(|w| self.score(w[0].target) <= self.score(w[1].target)));
            let at = (0..guesses.len() - 1)
                .find(|&g| {
                    self.score(guesses[g].target) <= x && x <= self.score(guesses[g + 1].target)
                })
                .expect("dummy guesses bracket every score");
            let (left, right) = (guesses[at], guesses[at + 1]);

            if !left.branching && !right.branching {
                let vertex = self.closer(x, left.target, right.target)?;
                return Some(Nearest {
                    vertex,
                    control: self.blocks.front(vertex),
                    steps,
                });
            }

            next.clear();
            match (left.branching, left.target) {
                (true, Target::Vertex(v)) if self.vertices[v].void => {
                    next.push(Guess::branch(self.vertices[v].left));
                    next.push(Guess::branch(self.vertices[v].right));
                }
                (true, Target::Vertex(v)) => {
                    next.push(Guess::fixed(left.target));
                    if self.vertices[v].right != NIL {
                        next.push(Guess::branch(self.vertices[v].right));
                    }
                }
                _ => next.push(left),
            }
            match (right.branching, right.target) {
                (true, Target::Vertex(v)) if self.vertices[v].void => {
                    next.push(Guess::branch(self.vertices[v].left));
                    next.push(Guess::branch(self.vertices[v].right));
                }
                (true, Target::Vertex(v)) => {
                    if self.vertices[v].left != NIL {
                        next.push(Guess::branch(self.vertices[v].left));
                    }
                    next.push(Guess::fixed(right.target));
                }
                _ => next.push(right),
            }
            std::mem::swap(&mut guesses, &mut next);
        }
    }

    /// Picks the closer of two static guesses, skipping dummies.
    fn closer(&self, x: f64, left: Target, right: Target) -> Option<usize> {
        match (left, right) {
            (Target::Vertex(a), Target::Vertex(b)) => {
                match cmp_distance(x, self.blocks.score(a), self.blocks.score(b)) {
                    Ordering::Greater => Some(b),
                    _ => Some(a),
                }
            }
            (Target::Vertex(a), _) => Some(a),
            (_, Target::Vertex(b)) => Some(b),
            _ => None,
        }
    }

    /// Marks the front control of `vertex` as matched, voiding or splicing
    /// the vertex when its run is used up.
    pub fn take(&mut self, vertex: usize) {
        debug_assert!(!self.vertices[vertex].void);
        self.remaining -= 1;
        if !self.blocks.take(vertex) {
            return;
        }
        let Vertex {
            left,
            right,
            parent,
            ..
        } = self.vertices[vertex];
        if left != NIL && right != NIL {
            self.vertices[vertex].void = true;
            return;
        }
        let child = if left != NIL { left } else { right };
        self.replace_child(parent, vertex, child);
        if child == NIL && parent != NIL && self.vertices[parent].void {
            let p = &self.vertices[parent];
            let only = if p.left != NIL { p.left } else { p.right };
            let grandparent = p.parent;
            self.replace_child(grandparent, parent, only);
        }
    }

    fn replace_child(&mut self, parent: usize, old: usize, new: usize) {
        if parent == NIL {
            self.root = new;
        } else if self.vertices[parent].left == old {
            self.vertices[parent].left = new;
        } else {
            debug_assert_eq!(self.vertices[parent].right, old);
            self.vertices[parent].right = new;
        }
        if new != NIL {
            self.vertices[new].parent = parent;
        }
    }

    /// Height of the tree (0 when empty).
    pub fn depth(&self) -> usize {
        fn rec(t: &ControlTree, v: usize) -> usize {
            if v == NIL {
                0
            } else {
                1 + rec(t, t.vertices[v].left).max(rec(t, t.vertices[v].right))
            }
        }
        rec(self, self.root)
    }

    /// Checks the structural invariants: parent links agree, no void vertex
    /// has fewer than two children, live scores are strictly increasing in
    /// order, and the live control count matches.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut stack = Vec::new();
        let mut v = self.root;
        let mut last_live: Option<f64> = None;
        let mut last_any: Option<f64> = None;
        let mut live = 0;
        if self.root != NIL && self.vertices[self.root].parent != NIL {
            return Err("root has a parent".into());
        }
        while v != NIL || !stack.is_empty() {
            while v != NIL {
                stack.push(v);
                v = self.vertices[v].left;
            }
            let u = stack.pop().unwrap();
            let vert = &self.vertices[u];
            for child in [vert.left, vert.right] {
                if child != NIL && self.vertices[child].parent != u {
                    return Err(format!("vertex {child} has a stale parent link"));
                }
            }
            let score = self.blocks.score(u);
            if last_any.is_some_and(|s| s >= score) {
                return Err(format!("in-order scores not increasing at vertex {u}"));
            }
            last_any = Some(score);
            if vert.void {
                if vert.left == NIL || vert.right == NIL {
                    return Err(format!("void vertex {u} has fewer than two children"));
                }
                if self.blocks.remaining(u) != 0 {
                    return Err(format!("void vertex {u} still holds controls"));
                }
            } else {
                if self.blocks.remaining(u) == 0 {
                    return Err(format!("live vertex {u} holds no controls"));
                }
                if last_live.is_some_and(|s| s >= score) {
                    return Err(format!("live scores not increasing at vertex {u}"));
                }
                last_live = Some(score);
                live += self.blocks.remaining(u);
            }
            v = vert.right;
        }
        if live != self.remaining {
            return Err(format!(
                "tree holds {live} controls but {} are recorded",
                self.remaining
            ));
        }
        Ok(())
    }
}

fn build(vertices: &mut [Vertex], lo: usize, hi: usize, parent: usize) -> usize {
    if lo >= hi {
        return NIL;
    }
    let mid = lo + (hi - lo) / 2;
    vertices[mid].parent = parent;
    vertices[mid].left = build(vertices, lo, mid, mid);
    vertices[mid].right = build(vertices, mid + 1, hi, mid);
    mid
}

/// Greedy nearest-neighbor matching with treated objects in `order`.
///
/// Produces exactly the pairs of the naive scan under the same order and
/// tie rule. Pairs are sorted by treated position; `loop_iterations` counts
/// guess steps over all lookups.
pub fn gnnm_tree(
    scores: &ScoreSet,
    caliper: &CaliperSpec,
    order: &ProcessingOrder,
) -> Result<MatchResult> {
    caliper.require(scores, "greedy nearest-neighbor matching", Certification::Any)?;
    let x = scores.treated();
    let y = scores.control();
    let mut tree = ControlTree::new(y);
    let mut pairs = Vec::new();
    let mut steps = 0;
    for i in order.treated_sequence(scores) {
        let Some(hit) = tree.nearest(x[i]) else {
            break;
        };
        steps += hit.steps;
        if caliper.admits(x[i], y[hit.control]) {
            pairs.push((i, hit.control));
            tree.take(hit.vertex);
        }
    }
    pairs.sort_unstable();
    Ok(MatchResult::from_pairs(scores, pairs, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_gnnm_naive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton() {
        let s = ScoreSet::new(&[0.5], &[0.52]).unwrap();
        let r = gnnm_tree(&s, &CaliperSpec::constant(0.05), &ProcessingOrder::AsGiven).unwrap();
        assert_eq!(r.pairs, vec![(0, 0)]);
    }

    #[test]
    fn empty_tree_has_no_nearest() {
        let tree = ControlTree::new(&[]);
        assert!(tree.nearest(0.3).is_none());
        assert_eq!(tree.depth(), 0);
        tree.check_invariants().unwrap();
    }

    #[test]
    fn exact_tie_goes_to_smaller_score() {
        let tree = ControlTree::new(&[0.4, 0.6]);
        assert_eq!(tree.nearest(0.5).unwrap().control, 0);
    }

    #[test]
    fn internal_vertex_becomes_void_then_spliced() {
        // seven controls: root is 0.4 with children 0.2 and 0.6
        let ys = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
        let mut tree = ControlTree::new(&ys);
        assert_eq!(tree.depth(), 3);
        assert_eq!(tree.root, 3);

        let hit = tree.nearest(0.41).unwrap();
        assert_eq!(hit.control, 3);
        tree.take(hit.vertex);
        tree.check_invariants().unwrap();
        assert!(tree.vertices[3].void);
        assert_eq!(tree.root, 3);

        // the void root still steers lookups to both sides
        assert_eq!(tree.nearest(0.41).unwrap().control, 4);
        assert_eq!(tree.nearest(0.38).unwrap().control, 2);

        // empty the whole left subtree; the void root loses its left child
        // and is spliced out
        for x in [0.2, 0.1, 0.3] {
            let hit = tree.nearest(x).unwrap();
            tree.take(hit.vertex);
            tree.check_invariants().unwrap();
        }
        assert_eq!(tree.root, 5);
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.nearest(0.0).unwrap().control, 4);
    }

    #[test]
    fn runs_of_equal_controls_share_a_vertex() {
        let mut tree = ControlTree::new(&[0.2, 0.5, 0.5, 0.9]);
        let first = tree.nearest(0.5).unwrap();
        assert_eq!(first.control, 1);
        tree.take(first.vertex);
        let second = tree.nearest(0.5).unwrap();
        assert_eq!((second.vertex, second.control), (first.vertex, 2));
        tree.take(second.vertex);
        tree.check_invariants().unwrap();
        assert_eq!(tree.nearest(0.5).unwrap().control, 0);
    }

    #[test]
    fn invariants_hold_after_every_deletion() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let l = rng.gen_range(1..=60);
            let mut ys: Vec<f64> = (0..l).map(|_| rng.gen_range(0..30) as f64 / 30.0).collect();
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut tree = ControlTree::new(&ys);
            let depth = tree.depth();
            let mut taken = vec![false; l];
            while !tree.is_empty() {
                let x: f64 = rng.gen_range(-0.2..1.2);
                let hit = tree.nearest(x).unwrap();
                // brute-force nearest under the same tie rule
                let best = (0..l)
                    .filter(|&j| !taken[j])
                    .min_by(|&a, &b| cmp_distance(x, ys[a], ys[b]).then(a.cmp(&b)))
                    .unwrap();
                assert_eq!(hit.control, best);
                assert!(hit.steps <= 2 * depth + 2, "{} steps, depth {depth}", hit.steps);
                taken[best] = true;
                tree.take(hit.vertex);
                tree.check_invariants().unwrap();
                assert!(tree.depth() <= depth);
            }
            assert!(tree.nearest(0.5).is_none());
        }
    }

    #[test]
    fn matches_naive_reference_in_every_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for round in 0..300 {
            let k = rng.gen_range(0..=80);
            let l = rng.gen_range(0..=80);
            let xs: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
            let ys: Vec<f64> = (0..l).map(|_| rng.gen_range(0..50) as f64 / 50.0).collect();
            let s = ScoreSet::new(&xs, &ys).unwrap();
            let c = CaliperSpec::constant(rng.gen_range(0.0..0.1));
            for order in [
                ProcessingOrder::AsGiven,
                ProcessingOrder::Sorted,
                ProcessingOrder::Random { seed: round },
            ] {
                let fast = gnnm_tree(&s, &c, &order).unwrap();
                let slow = oracle_gnnm_naive(&s, &c, &order);
                assert_eq!(fast.pairs, slow.pairs, "order {order:?}");
            }
        }
    }
}
