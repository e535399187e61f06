//! Input table: a CSV file with a header and the columns `id`, `group` and
//! `score` (any order, names case-insensitive, extra columns ignored).
//! `group` is `treated` or `control`, case-insensitive. Rows may come in
//! any order; nothing needs to be sorted beforehand.

use std::collections::HashSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use caliper_match::ScoreSet;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InputTable {
    pub treated_ids: Vec<String>,
    pub treated_scores: Vec<f64>,
    pub control_ids: Vec<String>,
    pub control_scores: Vec<f64>,
}

impl InputTable {
    pub fn read_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::read(file, path)
    }

    /// Parses CSV from `reader`; `path` is only used in error messages.
    pub fn read<R: Read>(reader: R, path: &Path) -> Result<Self> {
        let table_err = |message: String| CliError::Table {
            path: path.to_owned(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| table_err(format!("unreadable header: {e}")))?
            .clone();
        let column = |name: &str| {
            header
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| table_err(format!("header lacks a `{name}` column")))
        };
        let (id_col, group_col, score_col) = (column("id")?, column("group")?, column("score")?);

        let mut table = InputTable::default();
        let mut seen = HashSet::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                input_err(path, line, format!("malformed CSV: {e}"))
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |col: usize| record.get(col).unwrap_or("");
            let id = field(id_col);
            if id.is_empty() {
                return Err(input_err(path, line, "empty id".into()));
            }
            if !seen.insert(id.to_owned()) {
                return Err(input_err(path, line, format!("duplicate id {id:?}")));
            }
            let score: f64 = field(score_col).parse().map_err(|_| {
                input_err(path, line, format!("score {:?} is not a number", field(score_col)))
            })?;
            if !score.is_finite() {
                return Err(input_err(path, line, format!("score {score} is not finite")));
            }
            let group = field(group_col);
            if group.eq_ignore_ascii_case("treated") {
                table.treated_ids.push(id.to_owned());
                table.treated_scores.push(score);
            } else if group.eq_ignore_ascii_case("control") {
                table.control_ids.push(id.to_owned());
                table.control_scores.push(score);
            } else {
                return Err(input_err(
                    path,
                    line,
                    format!("group {group:?} is neither \"treated\" nor \"control\""),
                ));
            }
        }
        Ok(table)
    }

    pub fn score_set(&self) -> Result<ScoreSet> {
        Ok(ScoreSet::new(&self.treated_scores, &self.control_scores)?)
    }
}

fn input_err(path: &Path, line: u64, message: String) -> CliError {
    CliError::Input {
        path: PathBuf::from(path),
        line,
        message,
    }
}
