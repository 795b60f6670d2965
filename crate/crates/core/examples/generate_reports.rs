//! Writes the synthetic report CSV used by the bundled configuration.
//!
//! cargo run -p fsa-scr --example generate_reports -- data/synthetic_reports.csv

use fsa_scr::report::write_report_csv;
use fsa_scr::synthetic::{synthetic_reports, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/synthetic_reports.csv".into());
    let snapshots = synthetic_reports(&SyntheticSpec::default())?;
    std::fs::write(&path, write_report_csv(&snapshots))?;
    eprintln!("wrote {} snapshots to {path}", snapshots.len());
    Ok(())
}
