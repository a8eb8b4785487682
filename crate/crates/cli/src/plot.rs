//! Plain-text plot data for external tooling.
//!
//! Header lines start with `#` and document the columns; data lines are
//! space-separated with full-precision floats, so re-parsing reproduces the
//! numbers bit for bit.

use std::io::{BufRead, Write};

use crate::fit::Abscissa;
use crate::rows::{fmt_f64, AggregateRow};
use crate::{HarnessError, Result};

pub fn emit_plot_data(
    out: &mut impl Write,
    rows: &[AggregateRow],
    abscissa: Abscissa,
) -> Result<()> {
    writeln!(out, "# convergence aggregate, log scale against {}", abscissa.name())?;
    writeln!(
        out,
        "# columns: n {} log_mean_w log_upper_rate log_upper_rate_poisson log_lower_rate",
        abscissa.name()
    )?;
    for r in rows {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            r.n,
            fmt_f64(abscissa.eval(r.n)),
            fmt_f64(r.mean_w.ln()),
            fmt_f64(r.upper_rate.ln()),
            fmt_f64(r.upper_rate_poisson.ln()),
            fmt_f64(r.lower_rate.ln()),
        )?;
    }
    Ok(())
}

/// Parse a plot file back into its numeric columns (header lines skipped).
pub fn parse_plot_data(input: &mut impl BufRead) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| {
                    HarnessError::Config(format!("bad plot value {tok:?}: {e}"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
