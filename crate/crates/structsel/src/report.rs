//! Selection reports as portable JSON artifacts.

use std::path::Path;

use structsel_core::select::SelectionReport;
use structsel_core::SelectionOperator;

use crate::error::Result;
use crate::json::{read_json, write_json};

pub const REPORT_FILE: &str = "report.json";

pub fn write_report(path: &Path, report: &SelectionReport) -> Result<()> {
    write_json(path, report)
}

/// Reads a report (or a directory holding `report.json`) and revalidates
/// its selection.
pub fn read_report(path: &Path) -> Result<SelectionReport> {
    let path = if path.is_dir() {
        path.join(REPORT_FILE)
    } else {
        path.to_path_buf()
    };
    let mut report: SelectionReport = read_json(&path)?;
    report.selection = SelectionOperator::new(
        report.selection.mode_sizes().to_vec(),
        report.selection.per_mode().to_vec(),
    )?;
    Ok(report)
}
