//! Plain-text caliper files.
//!
//! One `key = value` pair per line; blank lines and text after `#` are
//! ignored. `kind` selects the family and decides which other keys are
//! required:
//!
//! ```text
//! # constant width
//! kind  = constant
//! value = 0.05
//!
//! # c(x, y) = g(x) + h(y), piecewise linear through the knots `x:value`
//! kind = separable
//! g = 0:0.01, 1:0.51
//! h = 0:0
//!
//! # c(x, y) = f(x) + s(y), steps `threshold:value`; each step holds from
//! # its threshold up to the next one, the first threshold may be -inf
//! kind = step-sum
//! f = -inf:0.01, 0.5:0.05
//! s = -inf:0
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use caliper_match::{CaliperSpec, PiecewiseLinear, ScoreSet, StepFunction};

use crate::error::{CliError, Result};

pub fn read_caliper_file(path: &Path) -> Result<CaliperSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_caliper(&text, path)
}

/// Parses caliper file contents; `path` is only used in error messages.
pub fn parse_caliper(text: &str, path: &Path) -> Result<CaliperSpec> {
    let err = |line: usize, message: String| CliError::CaliperFile {
        path: PathBuf::from(path),
        line,
        message,
    };

    let mut entries: HashMap<String, (usize, String)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(line, format!("expected `key = value`, found {content:?}")));
        };
        let key = key.trim().to_ascii_lowercase();
        if !matches!(key.as_str(), "kind" | "value" | "g" | "h" | "f" | "s") {
            return Err(err(line, format!("unknown key {key:?}")));
        }
        if let Some((first, _)) = entries.get(&key) {
            return Err(err(line, format!("key {key:?} already set on line {first}")));
        }
        entries.insert(key, (line, value.trim().to_owned()));
    }

    let last_line = text.lines().count().max(1);
    let get = |key: &str| {
        entries
            .get(key)
            .cloned()
            .ok_or_else(|| err(last_line, format!("missing key {key:?}")))
    };
    let allow_only = |allowed: &[&str]| -> Result<()> {
        for (key, (line, _)) in &entries {
            if key != "kind" && !allowed.contains(&key.as_str()) {
                return Err(err(*line, format!("key {key:?} does not apply to this kind")));
            }
        }
        Ok(())
    };
    // library errors carry no position, so pin them to the table's line
    let at = |line: usize| move |e: caliper_match::MatchError| err(line, e.to_string());

    let (kind_line, kind) = get("kind")?;
    match kind.to_ascii_lowercase().as_str() {
        "constant" => {
            allow_only(&["value"])?;
            let (line, v) = get("value")?;
            let c = parse_number(&v).map_err(|m| err(line, m))?;
            if !c.is_finite() || c < 0.0 {
                return Err(err(line, format!("constant caliper must be finite and nonnegative, got {v}")));
            }
            Ok(CaliperSpec::constant(c))
        }
        "separable" | "separable-lipschitz" => {
            allow_only(&["g", "h"])?;
            let (gl, g) = get("g")?;
            let (hl, h) = get("h")?;
            let g = PiecewiseLinear::new(parse_points(&g).map_err(|m| err(gl, m))?).map_err(at(gl))?;
            let h = PiecewiseLinear::new(parse_points(&h).map_err(|m| err(hl, m))?).map_err(at(hl))?;
            // check each component alone so a slope error points at its line
            let zero = || PiecewiseLinear::constant(0.0).expect("zero is a valid table");
            let lone_g = CaliperSpec::SeparableLipschitz { g: g.clone(), h: zero() };
            let lone_h = CaliperSpec::SeparableLipschitz { g: zero(), h: h.clone() };
            lone_g.validate(&no_data()).map_err(at(gl))?;
            lone_h.validate(&no_data()).map_err(at(hl))?;
            Ok(CaliperSpec::SeparableLipschitz { g, h })
        }
        "step-sum" | "step" => {
            allow_only(&["f", "s"])?;
            let (fl, f) = get("f")?;
            let (sl, s) = get("s")?;
            let f = StepFunction::new(parse_points(&f).map_err(|m| err(fl, m))?).map_err(at(fl))?;
            let s = StepFunction::new(parse_points(&s).map_err(|m| err(sl, m))?).map_err(at(sl))?;
            let zero = || StepFunction::constant(0.0).expect("zero is a valid table");
            let lone_f = CaliperSpec::StepSum { f: f.clone(), s: zero() };
            let lone_s = CaliperSpec::StepSum { f: zero(), s: s.clone() };
            lone_f.validate(&no_data()).map_err(at(fl))?;
            lone_s.validate(&no_data()).map_err(at(sl))?;
            Ok(CaliperSpec::StepSum { f, s })
        }
        other => Err(err(
            kind_line,
            format!("unknown kind {other:?}; expected constant, separable or step-sum"),
        )),
    }
}

/// Table checks need a score set; with no scores only the tables are checked.
fn no_data() -> ScoreSet {
    ScoreSet::new(&[], &[]).expect("empty input is valid")
}

fn parse_number(text: &str) -> std::result::Result<f64, String> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| format!("{:?} is not a number", text.trim()))
}

/// `a:b, c:d, ...` into pairs.
fn parse_points(text: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|item| {
            let (x, v) = item
                .split_once(':')
                .ok_or_else(|| format!("expected `position:value`, found {:?}", item.trim()))?;
            Ok((parse_number(x)?, parse_number(v)?))
        })
        .collect()
}
