//! Prints the per-amplitude PMF table of a constellation file, or of an MB
//! 64QAM² when no file is given.
//!
//! cargo run --release --example pmf_report -- [constellation.json]

use shapeopt::constellation::{build_product_qam, mb_pmf};
use shapeopt::experiment::{report_amplitude_pmf, PmfReport};

fn main() -> shapeopt::Result<()> {
    let report = match std::env::args().nth(1) {
        Some(path) => report_amplitude_pmf(path)?,
        None => PmfReport::of(&mb_pmf(&build_product_qam(64)?, 2.0)?.with_name("64QAM^2 MB 2.0")),
    };
    println!("{}: {} of {} points in use", report.name, report.nonzero_points, report.total_points);
    println!("  energy  size  probability  scale");
    for r in &report.rows {
        let mark = if r.pruned { "  pruned" } else { "" };
        println!("{:8.4} {:5} {:12.4e} {:6.3}{mark}", r.energy, r.size, r.probability, r.scale);
    }
    println!("total probability {:.15}", report.total_probability);
    Ok(())
}
