//! Named end-to-end checks. Each suite runs fixed instances and reports one
//! row per case with the measured and expected values.

mod density;
mod limits;

use std::fmt;

use serde::Serialize;

use crate::domain::ProbePolicy;
use crate::error::{Error, Result};

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] = &["minimax", "window", "buffer", "memoryless", "identify", "bruteforce", "coding", "scd"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteRow {
    /// Acceptance criterion the row belongs to (1 to 10).
    pub criterion: u8,
    pub case: String,
    pub measured: String,
    pub expected: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    fn new(suite: &str, rows: Vec<SuiteRow>) -> Self {
        SuiteReport { suite: suite.to_string(), pass: rows.iter().all(|r| r.pass), rows }
    }

    /// Whether every row of `criterion` passed (and there is at least one).
    pub fn criterion_passed(&self, criterion: u8) -> bool {
        let mut rows = self.rows.iter().filter(|r| r.criterion == criterion).peekable();
        rows.peek().is_some() && rows.all(|r| r.pass)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.case.len()).max().unwrap_or(4).max(4);
        writeln!(f, "suite {}", self.suite)?;
        writeln!(f, "{:>2}  {:<width$}  {:<4}  measured / expected", "c", "case", "ok")?;
        for r in &self.rows {
            let ok = if r.pass { "pass" } else { "FAIL" };
            writeln!(f, "{:>2}  {:<width$}  {ok}  {} / {}", r.criterion, r.case, r.measured, r.expected)?;
        }
        write!(f, "{}", if self.pass { "all passed" } else { "FAILED" })
    }
}

pub(crate) fn row(
    criterion: u8,
    case: impl Into<String>,
    measured: impl fmt::Display,
    expected: impl fmt::Display,
    pass: bool,
) -> SuiteRow {
    SuiteRow { criterion, case: case.into(), measured: measured.to_string(), expected: expected.to_string(), pass }
}

pub fn run_suite(name: &str, policy: &ProbePolicy) -> Result<SuiteReport> {
    let rows = match name {
        "minimax" => density::minimax(policy)?,
        "window" => density::window(policy)?,
        "buffer" => density::buffer(policy)?,
        "memoryless" => limits::memoryless(policy)?,
        "identify" => limits::identify(policy)?,
        "bruteforce" => limits::bruteforce()?,
        "coding" => limits::coding(policy)?,
        "scd" => limits::scd()?,
        other => {
            return Err(Error::InvalidParams(format!("unknown suite {other}; expected one of {}", SUITES.join(", "))))
        }
    };
    Ok(SuiteReport::new(name, rows))
}
