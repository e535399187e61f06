//! Monte-Carlo comparison of maximal matching, greedy nearest-neighbor
//! matching and rematched greedy matching on uniform scores.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::caliper::CaliperSpec;
use crate::error::{MatchError, Result};
use crate::maximal::algorithm_a;
use crate::nn::{gnnm_sorted, gnnm_tree, rematch_sorted, ProcessingOrder};
use crate::result::MatchResult;
use crate::score::ScoreSet;

/// Simulation settings. Both groups have `group_size` members.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub group_size: usize,
    /// Constant caliper for the maximal one-to-one matching.
    pub caliper_a: f64,
    /// Constant caliper for greedy nearest-neighbor matching.
    pub caliper_gnnm: f64,
    pub replications: usize,
    pub seed: u64,
    /// Treated processing order for greedy matching. Defaults to
    /// [`ProcessingOrder::AsGiven`]: scores are drawn i.i.d., so this is a
    /// uniformly random order. `Random { seed }` is re-seeded per
    /// replication from `seed` and the replication index.
    pub order: ProcessingOrder,
}

impl SimConfig {
    pub fn new(group_size: usize, caliper_a: f64, caliper_gnnm: f64, replications: usize, seed: u64) -> Self {
        Self {
            group_size,
            caliper_a,
            caliper_gnnm,
            replications,
            seed,
            order: ProcessingOrder::AsGiven,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.group_size == 0 {
            return Err(MatchError::InvalidArgument("group size must be positive".into()));
        }
        if self.replications == 0 {
            return Err(MatchError::InvalidArgument("at least one replication is required".into()));
        }
        for (name, c) in [("caliper_a", self.caliper_a), ("caliper_gnnm", self.caliper_gnnm)] {
            if !c.is_finite() || c < 0.0 {
                return Err(MatchError::InvalidArgument(format!(
                    "{name} must be a finite nonnegative number, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Pair count and distance summaries of one matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchStats {
    pub pairs: usize,
    pub max_distance: f64,
    pub avg_distance: f64,
}

impl From<&MatchResult> for MatchStats {
    fn from(r: &MatchResult) -> Self {
        Self {
            pairs: r.pair_count(),
            max_distance: r.max_distance(),
            avg_distance: r.mean_distance(),
        }
    }
}

/// Statistics of the three matchings in one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replication {
    pub algorithm_a: MatchStats,
    pub gnnm: MatchStats,
    pub gnnm_rematched: MatchStats,
}

/// Means and sorted samples (for empirical CDFs) of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmStats {
    pub mean_pairs: f64,
    pub mean_max_distance: f64,
    pub mean_avg_distance: f64,
    pub cdf_pairs: Vec<f64>,
    pub cdf_max_distance: Vec<f64>,
    pub cdf_avg_distance: Vec<f64>,
}

impl AlgorithmStats {
    fn collect(stats: impl Iterator<Item = MatchStats>) -> Self {
        let mut pairs = Vec::new();
        let mut max = Vec::new();
        let mut avg = Vec::new();
        for s in stats {
            pairs.push(s.pairs as f64);
            max.push(s.max_distance);
            avg.push(s.avg_distance);
        }
        // means are taken in replication order, before sorting, so they do
        // not depend on thread scheduling
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mean_pairs, mean_max_distance, mean_avg_distance) = (mean(&pairs), mean(&max), mean(&avg));
        for v in [&mut pairs, &mut max, &mut avg] {
            v.sort_by(f64::total_cmp);
        }
        Self {
            mean_pairs,
            mean_max_distance,
            mean_avg_distance,
            cdf_pairs: pairs,
            cdf_max_distance: max,
            cdf_avg_distance: avg,
        }
    }

    pub fn samples(&self, statistic: Statistic) -> &[f64] {
        match statistic {
            Statistic::Pairs => &self.cdf_pairs,
            Statistic::MaxDistance => &self.cdf_max_distance,
            Statistic::AvgDistance => &self.cdf_avg_distance,
        }
    }

    pub fn mean(&self, statistic: Statistic) -> f64 {
        match statistic {
            Statistic::Pairs => self.mean_pairs,
            Statistic::MaxDistance => self.mean_max_distance,
            Statistic::AvgDistance => self.mean_avg_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub config: SimConfig,
    pub algorithm_a: AlgorithmStats,
    pub gnnm: AlgorithmStats,
    pub gnnm_rematched: AlgorithmStats,
    /// Per-replication statistics in replication order.
    pub replications: Vec<Replication>,
}

impl SimSummary {
    /// `(name, stats)` for the three algorithms in a fixed order.
    pub fn algorithms(&self) -> [(&'static str, &AlgorithmStats); 3] {
        [
            ("algorithm_a", &self.algorithm_a),
            ("gnnm", &self.gnnm),
            ("gnnm_rematched", &self.gnnm_rematched),
        ]
    }
}

fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn run_one(config: &SimConfig, rep: usize) -> Result<Replication> {
    let mut rng = replication_rng(config.seed, rep);
    let k = config.group_size;
    let treated: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
    let control: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
    let scores = ScoreSet::new(&treated, &control)?;

    let c1 = CaliperSpec::constant(config.caliper_a);
    let c2 = CaliperSpec::constant(config.caliper_gnnm);
    let a = algorithm_a(&scores, &c1)?;
    let g = match config.order {
        ProcessingOrder::Sorted => gnnm_sorted(&scores, &c2)?,
        ProcessingOrder::AsGiven => gnnm_tree(&scores, &c2, &ProcessingOrder::AsGiven)?,
        // fresh seed per replication, so orders differ across replications
        ProcessingOrder::Random { seed } => {
            let mut seeder = replication_rng(seed, rep);
            gnnm_tree(&scores, &c2, &ProcessingOrder::Random { seed: seeder.gen() })?
        }
    };
    let r = rematch_sorted(&g, &scores, &c2)?;
    Ok(Replication {
        algorithm_a: (&a).into(),
        gnnm: (&g).into(),
        gnnm_rematched: (&r).into(),
    })
}

/// Runs the simulation. Replication `r` draws its scores from ChaCha8
/// stream `r` under `seed`, treated first, so the output depends only on
/// the configuration, not on the number of threads.
pub fn run_simulation(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    let replications = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_one(config, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimSummary {
        config: config.clone(),
        algorithm_a: AlgorithmStats::collect(replications.iter().map(|r| r.algorithm_a)),
        gnnm: AlgorithmStats::collect(replications.iter().map(|r| r.gnnm)),
        gnnm_rematched: AlgorithmStats::collect(replications.iter().map(|r| r.gnnm_rematched)),
        replications,
    })
}

/// Per-replication statistic for CDF output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Pairs,
    MaxDistance,
    AvgDistance,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Pairs, Statistic::MaxDistance, Statistic::AvgDistance];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Pairs => "pairs",
            Statistic::MaxDistance => "max_distance",
            Statistic::AvgDistance => "avg_distance",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = MatchError;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                MatchError::InvalidArgument(format!(
                    "unknown statistic {s:?}; expected pairs, max_distance or avg_distance"
                ))
            })
    }
}

/// Empirical CDF of sorted samples: one `(value, fraction <= value)` point
/// per distinct value.
pub fn empirical_cdf(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (idx, &v) in sorted.iter().enumerate() {
        let frac = (idx + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => out.push((v, frac)),
        }
    }
    out
}

/// Writes `algorithm,value,cumulative_fraction` CSV rows for `statistic`,
/// one block per algorithm.
pub fn emit_cdf<W: Write>(summary: &SimSummary, statistic: Statistic, mut out: W) -> io::Result<()> {
    writeln!(out, "algorithm,value,cumulative_fraction")?;
    for (name, stats) in summary.algorithms() {
        for (value, frac) in empirical_cdf(stats.samples(statistic)) {
            writeln!(out, "{name},{value},{frac}")?;
        }
    }
    Ok(())
}

/// Writes the means table: one row per algorithm.
pub fn emit_summary<W: Write>(summary: &SimSummary, mut out: W) -> io::Result<()> {
    writeln!(out, "algorithm,mean_pairs,mean_max_distance,mean_avg_distance")?;
    for (name, s) in summary.algorithms() {
        writeln!(
            out,
            "{name},{},{},{}",
            s.mean_pairs, s.mean_max_distance, s.mean_avg_distance
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_thread_independent() {
        let cfg = SimConfig::new(50, 0.02, 0.02, 8, 17);
        let a = run_simulation(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_simulation(&cfg).unwrap());
        assert_eq!(a, b);
        let single = run_simulation(&SimConfig { replications: 1, ..cfg.clone() }).unwrap();
        assert_eq!(single.replications[0], a.replications[0]);
    }

    #[test]
    fn per_replication_invariants() {
        let cfg = SimConfig::new(80, 0.02, 0.02, 30, 5);
        let s = run_simulation(&cfg).unwrap();
        for r in &s.replications {
            assert!(r.algorithm_a.pairs >= r.gnnm.pairs);
            assert_eq!(r.gnnm.pairs, r.gnnm_rematched.pairs);
            assert!(r.gnnm_rematched.max_distance <= r.gnnm.max_distance);
            assert!(r.algorithm_a.max_distance <= 0.02);
        }
        assert_eq!(s.gnnm.mean_pairs, s.gnnm_rematched.mean_pairs);
        for (_, stats) in s.algorithms() {
            for st in Statistic::ALL {
                let v = stats.samples(st);
                assert_eq!(v.len(), 30);
                assert!(v.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn other_orders_run() {
        for order in [ProcessingOrder::Sorted, ProcessingOrder::Random { seed: 3 }] {
            let cfg = SimConfig { order, ..SimConfig::new(40, 0.03, 0.03, 4, 1) };
            let s = run_simulation(&cfg).unwrap();
            assert!(s.replications.iter().all(|r| r.algorithm_a.pairs >= r.gnnm.pairs));
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(run_simulation(&SimConfig::new(0, 0.1, 0.1, 1, 0)).is_err());
        assert!(run_simulation(&SimConfig::new(5, 0.1, 0.1, 0, 0)).is_err());
        assert!(run_simulation(&SimConfig::new(5, -0.1, 0.1, 1, 0)).is_err());
        assert!(run_simulation(&SimConfig::new(5, 0.1, f64::NAN, 1, 0)).is_err());
    }

    #[test]
    fn two_point_cdf() {
        assert_eq!(empirical_cdf(&[3.0, 5.0]), vec![(3.0, 0.5), (5.0, 1.0)]);
        assert_eq!(empirical_cdf(&[1.0, 1.0, 2.0, 2.0]), vec![(1.0, 0.5), (2.0, 1.0)]);
        assert!(empirical_cdf(&[]).is_empty());
    }

    #[test]
    fn cdf_output_ends_at_one() {
        let s = run_simulation(&SimConfig::new(20, 0.05, 0.05, 7, 2)).unwrap();
        let mut buf = Vec::new();
        emit_cdf(&s, Statistic::MaxDistance, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("algorithm,value,cumulative_fraction"));
        for name in ["algorithm_a", "gnnm", "gnnm_rematched"] {
            let last = text.lines().rfind(|l| l.starts_with(&format!("{name},"))).unwrap();
            assert!(last.ends_with(",1"), "{last}");
        }
    }

    #[test]
    fn statistic_names() {
        for st in Statistic::ALL {
            assert_eq!(st.name().parse::<Statistic>().unwrap(), st);
        }
        assert!("median".parse::<Statistic>().is_err());
    }
}
