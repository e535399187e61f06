//! Caliper families and their validation.
//!
//! A caliper `c(x, y) >= 0` bounds the admissible score distance of a pair
//! with treated score `x` and control score `y`: the pair is admissible when
//! `|x - y| <= c(x, y)`, compared exactly in floating point.
//!
//! Three families can be certified from their tables alone:
//!
//! * [`CaliperSpec::Constant`]: always certified for the linear-scan
//!   algorithms (and trivially piecewise).
//! * [`CaliperSpec::SeparableLipschitz`]: `c(x, y) = g(x) + h(y)` with
//!   piecewise-linear `g`, `h` whose slopes are bounded by 1 in magnitude,
//!   which makes `c` 1-Lipschitz in each argument.
//! * [`CaliperSpec::StepSum`]: `c(x, y) = f(x) + s(y)` with nondecreasing,
//!   nonnegative step functions. Such a caliper is constant on every cell
//!   between consecutive thresholds and never decreases faster than its
//!   argument grows, which is what the interval algorithm needs.
//!
//! [`CaliperSpec::Unchecked`] wraps an arbitrary function; algorithms accept
//! it but optimality is then up to the caller.

use std::fmt;
use std::sync::Arc;

use crate::error::{MatchError, Result};
use crate::score::ScoreSet;

/// Piecewise-linear function given by knots `(abscissa, value)`.
///
/// Between knots the function interpolates linearly; outside the knot range
/// it is clamped to the value of the nearest end knot. A single knot is a
/// constant function.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(MatchError::InvalidCaliper(
                "piecewise-linear table needs at least one knot".into(),
            ));
        }
        for (idx, &(a, v)) in knots.iter().enumerate() {
            if !a.is_finite() || !v.is_finite() {
                return Err(MatchError::InvalidCaliper(format!(
                    "knot {idx} ({a}, {v}) is not finite"
                )));
            }
        }
        if let Some(idx) = knots.windows(2).position(|w| w[0].0 >= w[1].0) {
            return Err(MatchError::InvalidCaliper(format!(
                "knot abscissas must be strictly increasing (knots {} and {})",
                idx,
                idx + 1
            )));
        }
        Ok(Self { knots })
    }

    /// A constant function.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![(0.0, value)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.knots.partition_point(|&(a, _)| a <= x);
        if idx == 0 {
            return self.knots[0].1;
        }
        if idx == self.knots.len() {
            return self.knots[idx - 1].1;
        }
        let (a0, v0) = self.knots[idx - 1];
        let (a1, v1) = self.knots[idx];
        v0 + (x - a0) * (v1 - v0) / (a1 - a0)
    }

    /// Slope of each linear piece, in knot order.
    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
    }
}

/// Right-open step function given by `(threshold, value)` steps.
///
/// On `[threshold_k, threshold_{k+1})` the function equals `value_k`; below
/// the first threshold it is clamped to the first value. The first threshold
/// may be `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    steps: Vec<(f64, f64)>,
}

impl StepFunction {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(MatchError::InvalidCaliper(
                "step table needs at least one step".into(),
            ));
        }
        for (idx, &(t, v)) in steps.iter().enumerate() {
            let threshold_ok = t.is_finite() || (idx == 0 && t == f64::NEG_INFINITY);
            if !threshold_ok || !v.is_finite() {
                return Err(MatchError::InvalidCaliper(format!(
                    "step {idx} ({t}, {v}) is not finite"
                )));
            }
        }
        if let Some(idx) = steps.windows(2).position(|w| w[0].0 >= w[1].0) {
            return Err(MatchError::InvalidCaliper(format!(
                "step thresholds must be strictly increasing (steps {} and {})",
                idx,
                idx + 1
            )));
        }
        Ok(Self { steps })
    }

    /// A single step covering the whole line.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![(f64::NEG_INFINITY, value)])
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn thresholds(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|&(t, _)| t)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.steps.partition_point(|&(t, _)| t <= x);
        self.steps[idx.saturating_sub(1)].1
    }
}

/// Which family a caliper belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaliperFamily {
    Constant,
    SeparableLipschitz,
    StepSum,
    Unchecked,
}

impl fmt::Display for CaliperFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CaliperFamily::Constant => "constant",
            CaliperFamily::SeparableLipschitz => "separable-lipschitz",
            CaliperFamily::StepSum => "step-sum",
            CaliperFamily::Unchecked => "unchecked",
        };
        f.write_str(name)
    }
}

pub type CaliperFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A caliper description.
#[derive(Clone)]
pub enum CaliperSpec {
    /// `c(x, y) = value`.
    Constant(f64),
    /// `c(x, y) = g(x) + h(y)`.
    SeparableLipschitz {
        g: PiecewiseLinear,
        h: PiecewiseLinear,
    },
    /// `c(x, y) = f(x) + s(y)`; `f`'s thresholds cut the treated axis and
    /// `s`'s thresholds cut the control axis.
    StepSum { f: StepFunction, s: StepFunction },
    /// Arbitrary caliper; never validated.
    Unchecked(CaliperFn),
}

impl fmt::Debug for CaliperSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaliperSpec::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            CaliperSpec::SeparableLipschitz { g, h } => f
                .debug_struct("SeparableLipschitz")
                .field("g", g)
                .field("h", h)
                .finish(),
            CaliperSpec::StepSum { f: ff, s } => f
                .debug_struct("StepSum")
                .field("f", ff)
                .field("s", s)
                .finish(),
            CaliperSpec::Unchecked(_) => f.write_str("Unchecked(..)"),
        }
    }
}

impl CaliperSpec {
    pub fn constant(value: f64) -> Self {
        CaliperSpec::Constant(value)
    }

    pub fn unchecked<F>(func: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        CaliperSpec::Unchecked(Arc::new(func))
    }

    pub fn family(&self) -> CaliperFamily {
        match self {
            CaliperSpec::Constant(_) => CaliperFamily::Constant,
            CaliperSpec::SeparableLipschitz { .. } => CaliperFamily::SeparableLipschitz,
            CaliperSpec::StepSum { .. } => CaliperFamily::StepSum,
            CaliperSpec::Unchecked(_) => CaliperFamily::Unchecked,
        }
    }

    /// Evaluates `c(x, y)`.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            CaliperSpec::Constant(c) => *c,
            CaliperSpec::SeparableLipschitz { g, h } => g.eval(x) + h.eval(y),
            CaliperSpec::StepSum { f, s } => f.eval(x) + s.eval(y),
            CaliperSpec::Unchecked(func) => func(x, y),
        }
    }

    /// Whether the pair (treated score `x`, control score `y`) satisfies
    /// `|x - y| <= c(x, y)`. No tolerance is applied.
    #[inline]
    pub fn admits(&self, x: f64, y: f64) -> bool {
        (x - y).abs() <= self.eval(x, y)
    }

    /// Checks the tables alone, without looking at data.
    fn check_structure(&self) -> Result<StructureReport> {
        match self {
            CaliperSpec::Constant(c) => {
                if c.is_nan() || *c < 0.0 {
                    return Err(MatchError::InvalidCaliper(format!(
                        "constant caliper must be nonnegative, got {c}"
                    )));
                }
                Ok(StructureReport {
                    lipschitz: true,
                    piecewise: true,
                    max_slope: Some(0.0),
                })
            }
            CaliperSpec::SeparableLipschitz { g, h } => {
                let mut max_slope: f64 = 0.0;
                for (name, table) in [("g", g), ("h", h)] {
                    for (piece, slope) in table.slopes().enumerate() {
                        if slope.abs() > 1.0 {
                            let (a0, _) = table.knots()[piece];
                            let (a1, _) = table.knots()[piece + 1];
                            return Err(MatchError::InvalidCaliper(format!(
                                "{name} piece {piece} on [{a0}, {a1}] has slope {slope}, \
                                 magnitude must not exceed 1"
                            )));
                        }
                        max_slope = max_slope.max(slope.abs());
                    }
                }
                Ok(StructureReport {
                    lipschitz: true,
                    piecewise: false,
                    max_slope: Some(max_slope),
                })
            }
            CaliperSpec::StepSum { f, s } => {
                for (name, table) in [("f", f), ("s", s)] {
                    let steps = table.steps();
                    if let Some((step, &(t, v))) =
                        steps.iter().enumerate().find(|(_, &(_, v))| v < 0.0)
                    {
                        return Err(MatchError::InvalidCaliper(format!(
                            "{name} step {step} at {t} has negative value {v}"
                        )));
                    }
                    if let Some(step) = steps.windows(2).position(|w| w[1].1 < w[0].1) {
                        return Err(MatchError::InvalidCaliper(format!(
                            "{name} decreases from step {} ({}) to step {} ({})",
                            step,
                            steps[step].1,
                            step + 1,
                            steps[step + 1].1
                        )));
                    }
                }
                Ok(StructureReport {
                    lipschitz: false,
                    piecewise: true,
                    max_slope: None,
                })
            }
            CaliperSpec::Unchecked(_) => Ok(StructureReport {
                lipschitz: false,
                piecewise: false,
                max_slope: None,
            }),
        }
    }

    /// Validates the caliper against a data set.
    ///
    /// Besides the table checks, verifies that `c(X_i, Y_j) >= 0` for every
    /// treated/control pair. For the separable families this only needs the
    /// minimum of each component over its own group.
    pub fn validate(&self, scores: &ScoreSet) -> Result<ValidityReport> {
        let structure = self.check_structure()?;
        let min_value = match self {
            CaliperSpec::Constant(c) => Some(*c),
            CaliperSpec::SeparableLipschitz { g, h } => {
                separable_min(scores, |x| g.eval(x), |y| h.eval(y))?
            }
            CaliperSpec::StepSum { f, s } => {
                separable_min(scores, |x| f.eval(x), |y| s.eval(y))?
            }
            CaliperSpec::Unchecked(_) => None,
        };
        Ok(ValidityReport {
            family: self.family(),
            certified_lipschitz: structure.lipschitz,
            certified_piecewise: structure.piecewise,
            max_slope: structure.max_slope,
            min_value,
        })
    }

    /// Rejects calipers that cannot back the given algorithm.
    pub(crate) fn require(
        &self,
        scores: &ScoreSet,
        algorithm: &'static str,
        need: Certification,
    ) -> Result<ValidityReport> {
        let report = self.validate(scores)?;
        let ok = match need {
            Certification::Lipschitz => {
                report.certified_lipschitz || report.family == CaliperFamily::Unchecked
            }
            Certification::Piecewise => report.family == CaliperFamily::StepSum,
            Certification::Any => true,
        };
        if ok {
            Ok(report)
        } else {
            Err(MatchError::UncertifiedCaliper {
                family: report.family,
                algorithm,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Certification {
    Lipschitz,
    Piecewise,
    Any,
}

struct StructureReport {
    lipschitz: bool,
    piecewise: bool,
    max_slope: Option<f64>,
}

/// Result of [`validate_caliper`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub family: CaliperFamily,
    /// Certified 1-Lipschitz in both arguments; usable by the linear-scan
    /// one-to-one and 1-to-n algorithms.
    pub certified_lipschitz: bool,
    /// Certified Lipschitz-nondecreasing and piecewise Lipschitz; usable by
    /// the interval algorithm.
    pub certified_piecewise: bool,
    /// Largest slope magnitude over all linear pieces, when applicable.
    pub max_slope: Option<f64>,
    /// Smallest caliper value over all data pairs, `None` when either group
    /// is empty or the caliper is unchecked.
    pub min_value: Option<f64>,
}

fn separable_min(
    scores: &ScoreSet,
    first: impl Fn(f64) -> f64,
    second: impl Fn(f64) -> f64,
) -> Result<Option<f64>> {
    let x = scores
        .treated()
        .iter()
        .map(|&x| (x, first(x)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let y = scores
        .control()
        .iter()
        .map(|&y| (y, second(y)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match (x, y) {
        (Some((x, gx)), Some((y, hy))) => {
            let value = gx + hy;
            if value < 0.0 {
                Err(MatchError::NegativeCaliper {
                    treated: x,
                    control: y,
                    value,
                })
            } else {
                Ok(Some(value))
            }
        }
        _ => Ok(None),
    }
}

/// Evaluates `c(x, y)`.
pub fn eval_caliper(spec: &CaliperSpec, x: f64, y: f64) -> f64 {
    spec.eval(x, y)
}

/// Validates `spec` structurally and against the data in `scores`.
pub fn validate_caliper(spec: &CaliperSpec, scores: &ScoreSet) -> Result<ValidityReport> {
    spec.validate(scores)
}
