//! Slow, independent reference implementations.
//!
//! Nothing here shares code with the fast algorithms beyond the caliper
//! predicate itself. Distances are compared exactly: every score is a dyadic
//! rational, so scaling a whole instance by a common power of two turns the
//! scores into integers.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{float::FloatCore, Signed};

use crate::caliper::CaliperSpec;
use crate::error::{MatchError, Result};
use crate::nn::ProcessingOrder;
use crate::result::MatchResult;
use crate::score::ScoreSet;

/// Largest `treated * control` vertex product the matching oracles accept.
pub const MAX_GRAPH_PRODUCT: usize = 10_000;

/// Largest group size for complete-matching enumeration.
pub const MAX_COMPLETE_SIZE: usize = 7;

/// Feasibility relation of an instance: `adjacency[i]` lists every control
/// `j` with `|X_i - Y_j| <= c(X_i, Y_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityGraph {
    pub controls: usize,
    pub adjacency: Vec<Vec<usize>>,
}

impl FeasibilityGraph {
    pub fn build(scores: &ScoreSet, caliper: &CaliperSpec) -> Self {
        let adjacency = scores
            .treated()
            .iter()
            .map(|&x| {
                scores
                    .control()
                    .iter()
                    .enumerate()
                    .filter(|&(_, &y)| caliper.admits(x, y))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Self {
            controls: scores.l(),
            adjacency,
        }
    }

    pub fn treated(&self) -> usize {
        self.adjacency.len()
    }

    fn guard(&self, replication: usize) -> Result<()> {
        let product = self
            .treated()
            .saturating_mul(replication)
            .saturating_mul(self.controls);
        if product > MAX_GRAPH_PRODUCT {
            return Err(MatchError::SizeGuard(format!(
                "{} x {} vertices exceeds {}",
                self.treated() * replication,
                self.controls,
                MAX_GRAPH_PRODUCT
            )));
        }
        Ok(())
    }
}

/// Maximum-cardinality bipartite matching by repeated augmenting-path search.
pub fn oracle_max_matching(graph: &FeasibilityGraph) -> Result<usize> {
    oracle_b_matching(graph, 1)
}

/// Maximum number of pairs when each treated vertex may take up to `n`
/// controls: the plain matching size on the graph with every treated vertex
/// copied `n` times.
pub fn oracle_b_matching(graph: &FeasibilityGraph, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(MatchError::InvalidArgument("n must be at least 1".into()));
    }
    graph.guard(n)?;
    let replicated: Vec<&Vec<usize>> = graph
        .adjacency
        .iter()
        .flat_map(|adj| std::iter::repeat_n(adj, n))
        .collect();

    let mut owner: Vec<Option<usize>> = vec![None; graph.controls];
    let mut size = 0;
    for left in 0..replicated.len() {
        let mut seen = vec![false; graph.controls];
        if augment(left, &replicated, &mut owner, &mut seen) {
            size += 1;
        }
    }
    Ok(size)
}

fn augment(
    left: usize,
    adjacency: &[&Vec<usize>],
    owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &j in adjacency[left] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        let free = match owner[j] {
            None => true,
            Some(other) => augment(other, adjacency, owner, seen),
        };
        if free {
            owner[j] = Some(left);
            return true;
        }
    }
    false
}

/// The same quantity as [`oracle_b_matching`], computed as a max flow
/// (source -> treated with capacity `n`, treated -> control and
/// control -> sink with capacity 1) by BFS augmentation.
pub fn b_matching_flow(graph: &FeasibilityGraph, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(MatchError::InvalidArgument("n must be at least 1".into()));
    }
    graph.guard(n)?;
    let k = graph.treated();
    let l = graph.controls;
    let source = k + l;
    let sink = source + 1;
    let nodes = sink + 1;
    let mut cap = vec![vec![0i64; nodes]; nodes];
    for (i, adj) in graph.adjacency.iter().enumerate() {
        cap[source][i] = n as i64;
        for &j in adj {
            cap[i][k + j] = 1;
        }
    }
    for j in 0..l {
        cap[k + j][sink] = 1;
    }

    let mut flow = 0usize;
    loop {
        let mut parent = vec![usize::MAX; nodes];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nodes {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        // unit bottleneck: every path crosses a capacity-1 control edge
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] -= 1;
            cap[v][u] += 1;
            v = u;
        }
        flow += 1;
    }
    Ok(flow)
}

/// Scores of both groups as integers sharing one power-of-two scale.
struct ExactScores {
    treated: Vec<BigInt>,
    control: Vec<BigInt>,
}

impl ExactScores {
    fn new(scores: &ScoreSet) -> Self {
        let decoded: Vec<(u64, i16, i8)> = scores
            .treated()
            .iter()
            .chain(scores.control())
            .map(|&v| FloatCore::integer_decode(v))
            .collect();
        let min_exp = decoded.iter().map(|d| d.1).min().unwrap_or(0);
        let mut ints = decoded.into_iter().map(|(mantissa, exp, sign)| {
            let v = BigInt::from(mantissa) << ((exp - min_exp) as usize);
            if sign < 0 {
                -v
            } else {
                v
            }
        });
        let treated = ints.by_ref().take(scores.k()).collect();
        let control = ints.collect();
        Self { treated, control }
    }

    fn distance(&self, i: usize, j: usize) -> BigInt {
        (&self.treated[i] - &self.control[j]).abs()
    }
}

/// The same scaled integers in `i128`, when every shifted mantissa fits.
struct SmallExactScores {
    treated: Vec<i128>,
    control: Vec<i128>,
}

impl SmallExactScores {
    fn new(scores: &ScoreSet) -> Option<Self> {
        let decoded: Vec<(u64, i16, i8)> = scores
            .treated()
            .iter()
            .chain(scores.control())
            .map(|&v| FloatCore::integer_decode(v))
            .collect();
        let min_exp = decoded.iter().map(|d| d.1).min().unwrap_or(0);
        // mantissas have at most 53 bits; keep differences well inside i128
        if decoded.iter().any(|d| (d.1 - min_exp) > 72) {
            return None;
        }
        let mut ints = decoded.into_iter().map(|(mantissa, exp, sign)| {
            let v = (mantissa as i128) << (exp - min_exp);
            if sign < 0 {
                -v
            } else {
                v
            }
        });
        let treated = ints.by_ref().take(scores.k()).collect();
        let control = ints.collect();
        Some(Self { treated, control })
    }

    fn distance(&self, i: usize, j: usize) -> i128 {
        (self.treated[i] - self.control[j]).abs()
    }
}

/// Greedy nearest-neighbor matching without replacement, by linear scan.
///
/// Treated objects are visited in `order`; each takes the unmatched control
/// at the smallest exact distance (ties go to the smaller sorted position,
/// hence the smaller score), and the pair is kept only if that control
/// satisfies the caliper. Pairs are returned sorted by treated position.
pub fn oracle_gnnm_naive(
    scores: &ScoreSet,
    caliper: &CaliperSpec,
    order: &ProcessingOrder,
) -> MatchResult {
    match SmallExactScores::new(scores) {
        Some(small) => gnnm_scan(scores, caliper, order, |i, j| small.distance(i, j)),
        None => {
            let big = ExactScores::new(scores);
            gnnm_scan(scores, caliper, order, |i, j| big.distance(i, j))
        }
    }
}

fn gnnm_scan<D: Ord>(
    scores: &ScoreSet,
    caliper: &CaliperSpec,
    order: &ProcessingOrder,
    distance: impl Fn(usize, usize) -> D,
) -> MatchResult {
    let mut used = vec![false; scores.l()];
    let mut pairs = Vec::new();
    let mut scans = 0;
    for i in order.treated_sequence(scores) {
        let mut best: Option<(usize, D)> = None;
        for j in (0..scores.l()).filter(|&j| !used[j]) {
            scans += 1;
            let d = distance(i, j);
            if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            if caliper.admits(scores.treated()[i], scores.control()[j]) {
                used[j] = true;
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    MatchResult::from_pairs(scores, pairs, scans)
}

/// Best (or worst) complete matching found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteOptimum {
    /// `sum |X_i - Y_perm[i]|^p`, rounded to `f64`.
    pub cost: f64,
    /// `permutation[i]` is the control matched to treated `i`; the first
    /// optimum in lexicographic order.
    pub permutation: Vec<usize>,
}

/// Minimum of `sum |X_i - Y_perm(i)|^p` over all `K!` complete matchings.
///
/// Integer exponents up to 16 are evaluated exactly; other exponents in
/// floating point.
pub fn oracle_min_cost_complete(scores: &ScoreSet, cost_exponent: f64) -> Result<CompleteOptimum> {
    enumerate_complete(scores, cost_exponent, false)
}

/// Maximum of the same cost over all complete matchings.
pub fn oracle_max_cost_complete(scores: &ScoreSet, cost_exponent: f64) -> Result<CompleteOptimum> {
    enumerate_complete(scores, cost_exponent, true)
}

/// Exact `sum |X_i - Y_perm[i]|^p` for an integer exponent, in units of the
/// instance's common power-of-two scale raised to `p`. Only comparable
/// between permutations of the same instance.
pub fn exact_complete_cost(scores: &ScoreSet, permutation: &[usize], p: u32) -> BigInt {
    let exact = ExactScores::new(scores);
    permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| num_traits::pow(exact.distance(i, j), p as usize))
        .sum()
}

fn enumerate_complete(scores: &ScoreSet, p: f64, maximize: bool) -> Result<CompleteOptimum> {
    if scores.k() != scores.l() {
        return Err(MatchError::UnequalGroups {
            treated: scores.k(),
            control: scores.l(),
        });
    }
    if scores.k() > MAX_COMPLETE_SIZE {
        return Err(MatchError::SizeGuard(format!(
            "complete enumeration limited to {MAX_COMPLETE_SIZE} per group, got {}",
            scores.k()
        )));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(MatchError::InvalidArgument(format!(
            "cost exponent must be at least 1, got {p}"
        )));
    }
    let k = scores.k();
    let x = scores.treated();
    let y = scores.control();
    let float_cost = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(i, &j)| (x[i] - y[j]).abs().powf(p))
            .sum()
    };

    let perms = permutations_lex(k);
    let better = |a: std::cmp::Ordering| {
        if maximize {
            a == std::cmp::Ordering::Greater
        } else {
            a == std::cmp::Ordering::Less
        }
    };
    let best = if p.fract() == 0.0 && p <= 16.0 {
        let p = p as u32;
        let exact = ExactScores::new(scores);
        let table: Vec<Vec<BigInt>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| num_traits::pow(exact.distance(i, j), p as usize))
                    .collect()
            })
            .collect();
        let mut best: Option<(BigInt, Vec<usize>)> = None;
        for perm in perms {
            let c: BigInt = perm.iter().enumerate().map(|(i, &j)| &table[i][j]).sum();
            if best.as_ref().is_none_or(|(bc, _)| better(c.cmp(bc))) {
                best = Some((c, perm));
            }
        }
        best.map(|(_, perm)| perm)
    } else {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for perm in perms {
            let c = float_cost(&perm);
            if best.as_ref().is_none_or(|(bc, _)| better(c.total_cmp(bc))) {
                best = Some((c, perm));
            }
        }
        best.map(|(_, perm)| perm)
    };
    let permutation = best.unwrap_or_default();
    Ok(CompleteOptimum {
        cost: float_cost(&permutation),
        permutation,
    })
}

/// All permutations of `0..k` in lexicographic order.
fn permutations_lex(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                rec(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Exact `sum |X - Y|` of a matching, as an integer in the instance's
/// common power-of-two scale. Useful for comparing matchings whose float sums
/// differ only by rounding.
pub fn exact_total_distance(scores: &ScoreSet, pairs: &[(usize, usize)]) -> BigInt {
    let exact = ExactScores::new(scores);
    pairs.iter().map(|&(i, j)| exact.distance(i, j)).sum()
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(controls: usize, adjacency: Vec<Vec<usize>>) -> FeasibilityGraph {
        FeasibilityGraph {
            controls,
            adjacency,
        }
    }

    #[test]
    fn empty_graph_matches_nothing() {
        assert_eq!(oracle_max_matching(&graph(0, vec![])).unwrap(), 0);
        assert_eq!(oracle_max_matching(&graph(3, vec![vec![], vec![]])).unwrap(), 0);
    }

    #[test]
    fn complete_bipartite_three() {
        let g = graph(3, vec![vec![0, 1, 2]; 3]);
        assert_eq!(oracle_max_matching(&g).unwrap(), 3);
    }

    /// Every subset of edges of a 3x2 instance, kept when it is a matching.
    fn exhaustive_max(g: &FeasibilityGraph) -> usize {
        let edges: Vec<(usize, usize)> = g
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().map(move |&j| (i, j)))
            .collect();
        let mut best = 0;
        for mask in 0u32..(1 << edges.len()) {
            let chosen: Vec<_> = (0..edges.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| edges[b])
                .collect();
            let mut ts: Vec<_> = chosen.iter().map(|e| e.0).collect();
            let mut cs: Vec<_> = chosen.iter().map(|e| e.1).collect();
            ts.sort_unstable();
            ts.dedup();
            cs.sort_unstable();
            cs.dedup();
            if ts.len() == chosen.len() && cs.len() == chosen.len() {
                best = best.max(chosen.len());
            }
        }
        best
    }

    #[test]
    fn small_instance_against_exhaustive_check() {
        let s = ScoreSet::new(&[0.0, 0.1, 0.2], &[0.05, 0.25]).unwrap();
        let g = FeasibilityGraph::build(&s, &CaliperSpec::constant(0.06));
        assert_eq!(exhaustive_max(&g), 2);
        assert_eq!(oracle_max_matching(&g).unwrap(), 2);
    }

    #[test]
    fn b_matching_reductions() {
        let g = graph(3, vec![vec![0, 1, 2]]);
        assert_eq!(oracle_b_matching(&g, 1).unwrap(), 1);
        assert_eq!(oracle_b_matching(&g, 2).unwrap(), 2);
        assert_eq!(oracle_b_matching(&g, 5).unwrap(), 3);
        assert!(oracle_b_matching(&g, 0).is_err());
    }

    #[test]
    fn size_guard_is_an_error() {
        let g = graph(101, vec![vec![]; 100]);
        assert!(matches!(oracle_max_matching(&g), Err(MatchError::SizeGuard(_))));
        let g = graph(100, vec![vec![]; 50]);
        assert!(oracle_max_matching(&g).is_ok());
        assert!(oracle_b_matching(&g, 3).is_err());
    }

    fn random_graph(rng: &mut ChaCha8Rng) -> FeasibilityGraph {
        let k = rng.gen_range(0..=10);
        let l = rng.gen_range(0..=10);
        let density = rng.gen_range(0.0..1.0);
        let adjacency = (0..k)
            .map(|_| (0..l).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        graph(l, adjacency)
    }

    #[test]
    fn augmenting_path_agrees_with_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..400 {
            let g = random_graph(&mut rng);
            for n in 1..=3 {
                assert_eq!(
                    oracle_b_matching(&g, n).unwrap(),
                    b_matching_flow(&g, n).unwrap()
                );
            }
        }
    }

    #[test]
    fn label_permutation_does_not_change_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let g = random_graph(&mut rng);
            let size = oracle_max_matching(&g).unwrap();
            let mut relabel: Vec<usize> = (0..g.controls).collect();
            let mut rows = g.adjacency.clone();
            use rand::seq::SliceRandom;
            relabel.shuffle(&mut rng);
            rows.shuffle(&mut rng);
            let permuted = graph(
                g.controls,
                rows.iter()
                    .map(|adj| adj.iter().map(|&j| relabel[j]).collect())
                    .collect(),
            );
            assert_eq!(oracle_max_matching(&permuted).unwrap(), size);
        }
    }

    #[test]
    fn infinite_caliper_matches_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let k = rng.gen_range(0..=12);
            let xs: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
            let ys: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
            let s = ScoreSet::new(&xs, &ys).unwrap();
            let g = FeasibilityGraph::build(&s, &CaliperSpec::constant(f64::INFINITY));
            assert_eq!(oracle_max_matching(&g).unwrap(), k);
        }
    }

    #[test]
    fn complete_oracle_two_by_two() {
        let s = ScoreSet::new(&[0.0, 1.0], &[0.4, 0.6]).unwrap();
        let best = oracle_min_cost_complete(&s, 1.0).unwrap();
        assert_eq!(best.permutation, vec![0, 1]);
        assert!((best.cost - 0.8).abs() < 1e-12);
        let worst = oracle_max_cost_complete(&s, 1.0).unwrap();
        assert_eq!(worst.permutation, vec![1, 0]);
        assert!((worst.cost - 1.2).abs() < 1e-12);
    }

    #[test]
    fn complete_oracle_singleton_and_guards() {
        let s = ScoreSet::new(&[0.3], &[0.9]).unwrap();
        assert_eq!(oracle_min_cost_complete(&s, 2.0).unwrap().permutation, vec![0]);
        let uneven = ScoreSet::new(&[0.3], &[0.9, 0.1]).unwrap();
        assert!(matches!(
            oracle_min_cost_complete(&uneven, 1.0),
            Err(MatchError::UnequalGroups { .. })
        ));
        let big = ScoreSet::new(&[0.0; 8], &[0.0; 8]).unwrap();
        assert!(matches!(
            oracle_min_cost_complete(&big, 1.0),
            Err(MatchError::SizeGuard(_))
        ));
        assert!(oracle_min_cost_complete(&s, 0.5).is_err());
    }

    #[test]
    fn convex_argmin_is_sorted_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..30 {
            let xs: Vec<f64> = (0..5).map(|_| rng.gen()).collect();
            let ys: Vec<f64> = (0..5).map(|_| rng.gen()).collect();
            let s = ScoreSet::new(&xs, &ys).unwrap();
            for p in [1.0, 2.0, 1.5] {
                let best = oracle_min_cost_complete(&s, p).unwrap();
                assert_eq!(best.permutation, vec![0, 1, 2, 3, 4], "p = {p}");
            }
        }
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations_lex(0).len(), 1);
        assert_eq!(permutations_lex(4).len(), 24);
        assert_eq!(permutations_lex(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn exact_scale_handles_mixed_magnitudes() {
        let s = ScoreSet::new(&[1e-300, -2.0], &[3.5]).unwrap();
        let exact = ExactScores::new(&s);
        // sorted: -2.0 comes first
        assert!(exact.treated[0] < exact.treated[1]);
        assert!(exact.distance(1, 0) < exact.distance(0, 0));
        assert!(exact.distance(1, 0) < BigInt::from(7) * exact.control[0].clone() / 2);
        assert!(SmallExactScores::new(&s).is_none());
        let uniform = ScoreSet::new(&[0.25, 1.0 - f64::EPSILON], &[1e-16]).unwrap();
        let small = SmallExactScores::new(&uniform).unwrap();
        let big = ExactScores::new(&uniform);
        for i in 0..2 {
            assert_eq!(BigInt::from(small.distance(i, 0)), big.distance(i, 0));
        }
    }
}
