//! Sweep results as CSV.

use std::fmt::Write;
use std::path::Path;

use crate::error::Result;
use crate::io::write_atomic;
use crate::simulation::SweepResult;

pub const CSV_HEADER: &str = "M,N,scheme,mean_dc_power_w,mean_dc_power_dbm,std_error,realizations,seed";

/// CSV text with shortest round-trip scientific notation for every float.
pub fn format_csv(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{:e},{:e},{:e},{},{}",
            r.m, r.n, r.scheme, r.mean_dc_power_w, r.mean_dc_power_dbm, r.std_error, r.realizations, r.seed
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_atomic(path, format_csv(result).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{Scheme, SweepRow};

    #[test]
    fn empty_sweep_is_header_only() {
        assert_eq!(format_csv(&SweepResult::default()), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_row_two_lines() {
        let result = SweepResult {
            rows: vec![SweepRow::from_samples(2, 4, Scheme::OPT_PIXEL, 7, vec![1.0, 3.0])],
        };
        let text = format_csv(&result);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "2,4,opt-pixel,2e0,3.301029995663981e1,1e0,2,7");
    }

    #[test]
    fn emit_is_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let result = SweepResult {
            rows: vec![SweepRow::from_samples(1, 1, Scheme::SVD_FIXED, 0, vec![0.1, 0.2, 0.4])],
        };
        emit_csv(&result, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        emit_csv(&result, &path).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }
}
