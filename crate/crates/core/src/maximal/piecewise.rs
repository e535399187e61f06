use crate::caliper::{CaliperSpec, Certification, StepFunction};
use crate::error::{MatchError, Result};
use crate::result::MatchResult;
use crate::score::ScoreSet;

/// Partition of the sorted treated and control arrays by the caliper's
/// interval cuts, with one cursor per interval.
///
/// Treated interval `u` covers positions `treated_bounds[u]..treated_bounds[u + 1]`
/// and scores in `treated_ranges[u]` (half-open). Intervals holding no
/// observations are dropped. The cursor arrays carry one extra sentinel
/// entry equal to the group size.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalIndex {
    pub treated_bounds: Vec<usize>,
    pub control_bounds: Vec<usize>,
    pub treated_ranges: Vec<(f64, f64)>,
    pub control_ranges: Vec<(f64, f64)>,
    /// Next unused treated position per interval.
    pub treated_cursors: Vec<usize>,
    /// Next unused control position per interval.
    pub control_cursors: Vec<usize>,
}

impl IntervalIndex {
    pub fn treated_intervals(&self) -> usize {
        self.treated_bounds.len() - 1
    }

    pub fn control_intervals(&self) -> usize {
        self.control_bounds.len() - 1
    }
}

/// Interval start positions (plus the end sentinel) and score ranges.
type Cuts = (Vec<usize>, Vec<(f64, f64)>);

/// Cuts the sorted scores at the step thresholds in one pass.
fn cut(sorted: &[f64], table: &StepFunction, group: &'static str) -> Result<Cuts> {
    let thresholds: Vec<f64> = table.thresholds().collect();
    if let Some(&first) = sorted.first() {
        if first < thresholds[0] {
            return Err(MatchError::UncoveredScore {
                group,
                score: first,
                first_cut: thresholds[0],
            });
        }
    }
    let mut bounds = Vec::new();
    let mut ranges = Vec::new();
    let mut pos = 0;
    for (k, &lo) in thresholds.iter().enumerate() {
        let hi = thresholds.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let start = pos;
        while pos < sorted.len() && sorted[pos] < hi {
            pos += 1;
        }
        if pos > start {
            bounds.push(start);
            ranges.push((lo, hi));
        }
    }
    bounds.push(sorted.len());
    Ok((bounds, ranges))
}

/// Builds the interval index for a step-sum caliper.
///
/// Fails when a score lies below the first threshold of its table.
pub fn build_interval_index(scores: &ScoreSet, caliper: &CaliperSpec) -> Result<IntervalIndex> {
    let CaliperSpec::StepSum { f, s } = caliper else {
        return Err(MatchError::UncertifiedCaliper {
            family: caliper.family(),
            algorithm: "piecewise maximal matching",
        });
    };
    let (treated_bounds, treated_ranges) = cut(scores.treated(), f, "treated")?;
    let (control_bounds, control_ranges) = cut(scores.control(), s, "control")?;
    Ok(IntervalIndex {
        treated_cursors: treated_bounds.clone(),
        control_cursors: control_bounds.clone(),
        treated_bounds,
        control_bounds,
        treated_ranges,
        control_ranges,
    })
}

/// Moves the scan position past the current one within interval `cur`,
/// jumping to the next interval that still has unused positions when the
/// current one runs out. Ends on the sentinel when none is left.
#[inline]
fn advance(pos: &mut usize, cur: &mut usize, cursors: &mut [usize], bounds: &[usize]) {
    let intervals = bounds.len() - 1;
    cursors[*cur] += 1;
    *pos += 1;
    if *pos == bounds[*cur + 1] {
        let mut next = *cur + 1;
        while next < intervals && cursors[next] == bounds[next + 1] {
            next += 1;
        }
        *cur = next;
        *pos = cursors[next];
    }
}

/// Maximum-cardinality one-to-one matching under a step-sum caliper.
///
/// Like the linear scan, but when the smaller of the two current scores
/// cannot be paired at the current position, it is tried against the first
/// unused observation of every later interval of the other group before
/// being discarded. Each outer iteration consumes at least one observation;
/// `loop_iterations` counts outer iterations, so it never exceeds `K + L`.
pub fn algorithm_c(scores: &ScoreSet, caliper: &CaliperSpec) -> Result<MatchResult> {
    caliper.require(scores, "piecewise maximal matching", Certification::Piecewise)?;
    let index = build_interval_index(scores, caliper)?;
    Ok(run_c(scores, caliper, index).0)
}

/// Returns the matching and the number of inner interval probes.
pub(crate) fn run_c(
    scores: &ScoreSet,
    caliper: &CaliperSpec,
    index: IntervalIndex,
) -> (MatchResult, usize) {
    let x = scores.treated();
    let y = scores.control();
    let IntervalIndex {
        treated_bounds: ib,
        control_bounds: jb,
        treated_cursors: mut sc,
        control_cursors: mut tc,
        ..
    } = index;
    let nu = ib.len() - 1;
    let nv = jb.len() - 1;

    let (mut i, mut j, mut u0, mut v0) = (0, 0, 0, 0);
    let mut pairs = Vec::new();
    let mut iterations = 0;
    let mut probes = 0;

    while i < x.len() && j < y.len() {
        iterations += 1;
        if x[i] < y[j] {
            let mut hit = None;
            for v in v0..nv {
                probes += 1;
                // short-circuit: tc[v] is only read as a position when in range
                if tc[v] < jb[v + 1] && caliper.admits(x[i], y[tc[v]]) {
                    hit = Some(v);
                    break;
                }
            }
            match hit {
                Some(v) => {
                    pairs.push((i, tc[v]));
                    advance(&mut i, &mut u0, &mut sc, &ib);
                    if v == v0 {
                        advance(&mut j, &mut v0, &mut tc, &jb);
                    } else {
                        tc[v] += 1;
                    }
                }
                None => advance(&mut i, &mut u0, &mut sc, &ib),
            }
        } else {
            let mut hit = None;
            for u in u0..nu {
                probes += 1;
                if sc[u] < ib[u + 1] && caliper.admits(x[sc[u]], y[j]) {
                    hit = Some(u);
                    break;
                }
            }
            match hit {
                Some(u) => {
                    pairs.push((sc[u], j));
                    advance(&mut j, &mut v0, &mut tc, &jb);
                    if u == u0 {
                        advance(&mut i, &mut u0, &mut sc, &ib);
                    } else {
                        sc[u] += 1;
                    }
                }
                None => advance(&mut j, &mut v0, &mut tc, &jb),
            }
        }
    }
    pairs.sort_unstable();
    (MatchResult::from_pairs(scores, pairs, iterations), probes)
}
