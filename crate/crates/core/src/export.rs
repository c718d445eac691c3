//! CSV writers and the `key = value` summary block.
//!
//! Numbers use Rust's shortest round-trip formatting, so the output is a
//! pure function of the values written.

use std::fmt;
use std::io::Write;

use crate::analysis::BoundReport;
use crate::error::{Error, Result};
use crate::outer::{SweepResult, TrappedRow};

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv output failed: {e}"))
}

fn write_rows<W: Write, const N: usize>(
    out: W,
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv output failed: {e}")))
}

/// Header `x,u`.
pub fn write_profile<W: Write>(out: W, x: &[f64], u: &[f64]) -> Result<()> {
    if x.len() != u.len() {
        return Err(Error::InvalidInput(format!("{} nodes but {} values", x.len(), u.len())));
    }
    write_rows(out, ["x", "u"], x.iter().zip(u).map(|(x, u)| [x.to_string(), u.to_string()]))
}

/// Header `a,F,certificate`.
pub fn write_sweep<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    write_rows(
        out,
        ["a", "F", "certificate"],
        (0..sweep.len())
            .map(|i| [sweep.a_values[i].to_string(), sweep.f_values[i].to_string(), sweep.status[i].to_string()]),
    )
}

/// Header `theorem,lower,computed,upper,pass,slack`. The pass column reads
/// `not-applicable` for reports whose precondition failed.
pub fn write_bounds<W: Write>(out: W, reports: &[BoundReport]) -> Result<()> {
    write_rows(
        out,
        ["theorem", "lower", "computed", "upper", "pass", "slack"],
        reports.iter().map(|r| {
            let pass = if r.applicable { r.pass.to_string() } else { "not-applicable".to_string() };
            [
                r.theorem.to_string(),
                r.lower.to_string(),
                r.computed.to_string(),
                r.upper.to_string(),
                pass,
                r.slack.to_string(),
            ]
        }),
    )
}

/// Header `beta,width,criterion,attained,argmin`.
pub fn write_trapped_grid<W: Write>(out: W, rows: &[TrappedRow]) -> Result<()> {
    write_rows(
        out,
        ["beta", "width", "criterion", "attained", "argmin"],
        rows.iter().map(|r| {
            [
                r.beta.to_string(),
                r.width.to_string(),
                r.criterion.to_string(),
                r.attained.to_string(),
                r.argmin.to_string(),
            ]
        }),
    )
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
