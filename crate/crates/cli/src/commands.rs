use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use caliper_match::sim::emit_summary;
use caliper_match::{
    algorithm_a, algorithm_b, algorithm_c, anti_optimal_complete_matching, emit_cdf, gnnm_sorted,
    gnnm_tree, min_caliper_search, optimal_complete_matching, rematch_sorted, run_simulation,
    CaliperFamily, CaliperSpec, MatchResult, MinCaliper, ProcessingOrder, SimConfig, SimSummary,
    Statistic,
};

use crate::error::{CliError, Result};
use crate::input::InputTable;

/// Matching algorithm selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Maximal one-to-one; step-sum calipers use the piecewise scan.
    OneToOne,
    /// Maximal matching with up to `n` controls per treated object.
    OneToN(usize),
    GnnmSorted,
    GnnmTree(ProcessingOrder),
    Complete,
    AntiComplete,
}

impl Mode {
    fn uses_caliper(self) -> bool {
        !matches!(self, Mode::Complete | Mode::AntiComplete)
    }
}

/// Runs the chosen matching and writes one CSV row per pair:
/// `treated_id,control_id,treated_score,control_score,distance`, in
/// ascending treated score. Returns the number of pairs.
pub fn cmd_match<W: Write>(
    table: &InputTable,
    caliper: Option<&CaliperSpec>,
    mode: Mode,
    rematch: bool,
    out: W,
) -> Result<usize> {
    let scores = table.score_set()?;
    let caliper = match (mode.uses_caliper(), caliper) {
        (true, Some(c)) => Some(c),
        (true, None) => {
            return Err(CliError::Usage(
                "this mode needs a caliper: pass --width or --caliper".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(CliError::Usage(
                "complete matching pairs everyone and takes no caliper".into(),
            ))
        }
        (false, None) => None,
    };

    let mut result: MatchResult = match (mode, caliper) {
        (Mode::OneToOne, Some(c)) if c.family() == CaliperFamily::StepSum => algorithm_c(&scores, c)?,
        (Mode::OneToOne, Some(c)) => algorithm_a(&scores, c)?,
        (Mode::OneToN(n), Some(c)) => algorithm_b(&scores, c, n)?,
        (Mode::GnnmSorted, Some(c)) => gnnm_sorted(&scores, c)?,
        (Mode::GnnmTree(order), Some(c)) => gnnm_tree(&scores, c, &order)?,
        (Mode::Complete, None) => optimal_complete_matching(&scores)?,
        (Mode::AntiComplete, None) => anti_optimal_complete_matching(&scores)?,
        _ => unreachable!("caliper presence checked above"),
    };
    if rematch {
        let Some(c) = caliper else {
            return Err(CliError::Usage(
                "--rematch needs a caliper-based mode".into(),
            ));
        };
        if matches!(mode, Mode::OneToN(n) if n > 1) {
            return Err(CliError::Usage("--rematch applies to one-to-one matchings only".into()));
        }
        result = rematch_sorted(&result, &scores, c)?;
    }

    let x = scores.treated();
    let y = scores.control();
    let stdout_path = PathBuf::from("<output>");
    let write_err = |e: csv::Error| CliError::Write {
        path: stdout_path.clone(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["treated_id", "control_id", "treated_score", "control_score", "distance"])
        .map_err(write_err)?;
    for (&(i, j), &d) in result.pairs.iter().zip(&result.distances) {
        let ti = &table.treated_ids[scores.treated_perm()[i]];
        let cj = &table.control_ids[scores.control_perm()[j]];
        w.write_record([
            ti.as_str(),
            cj.as_str(),
            &x[i].to_string(),
            &y[j].to_string(),
            &d.to_string(),
        ])
        .map_err(write_err)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: stdout_path.clone(),
        source,
    })?;
    Ok(result.pair_count())
}

/// Smallest constant caliper reaching the target fraction; writes
/// `caliper,bracket_lower,target_pairs,achieved_pairs`.
pub fn cmd_min_caliper<W: Write>(
    table: &InputTable,
    target_fraction: f64,
    iterations: usize,
    mut out: W,
) -> Result<MinCaliper> {
    let scores = table.score_set()?;
    let found = min_caliper_search(&scores, target_fraction, iterations)?;
    let path = PathBuf::from("<output>");
    writeln!(out, "caliper,bracket_lower,target_pairs,achieved_pairs")
        .and_then(|_| {
            writeln!(
                out,
                "{},{},{},{}",
                found.caliper, found.lower, found.target_pairs, found.achieved_pairs
            )
        })
        .map_err(|source| CliError::Write { path, source })?;
    Ok(found)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Write {
            path: path.to_owned(),
            source,
        })
}

/// Runs the simulation and writes `summary.csv` plus one
/// `cdf_<statistic>.csv` per statistic into `out_dir` (created if needed).
pub fn cmd_simulate(config: &SimConfig, out_dir: &Path) -> Result<SimSummary> {
    let summary = run_simulation(config)?;
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Write {
        path: out_dir.to_owned(),
        source,
    })?;
    let write = |name: String, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| {
        let path = out_dir.join(name);
        let mut file = create(&path)?;
        f(&mut file)
            .and_then(|_| file.flush())
            .map_err(|source| CliError::Write { path, source })
    };
    write("summary.csv".into(), &|w| emit_summary(&summary, w))?;
    for st in Statistic::ALL {
        write(format!("cdf_{st}.csv"), &|w| emit_cdf(&summary, st, w))?;
    }
    Ok(summary)
}
