use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constellation::{amplitude_classes, read_constellation, Constellation4D, ENERGY_REL_TOL};
use crate::error::Result;
use crate::numeric::ksum;

/// One amplitude shell of a constellation file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    /// ‖x‖² of the shell in the file's (unit mean energy) normalization.
    pub energy: f64,
    pub size: usize,
    /// Total probability of the shell.
    pub probability: f64,
    /// Radial factor relative to the base shell, 1 when unrecorded.
    pub scale: f64,
    pub pruned: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PmfReport {
    pub name: String,
    /// Ascending energy.
    pub rows: Vec<AmplitudeRow>,
    pub total_points: usize,
    pub nonzero_points: usize,
    pub total_probability: f64,
}

impl PmfReport {
    pub fn of(c: &Constellation4D) -> Self {
        let scales = c.metadata().scales.as_deref();
        let rows: Vec<AmplitudeRow> = amplitude_classes(c, ENERGY_REL_TOL)
            .classes
            .iter()
            .map(|cl| AmplitudeRow {
                energy: cl.energy,
                size: cl.size(),
                probability: cl.probability,
                scale: scales.map_or(1.0, |s| s[cl.members[0]]),
                pruned: cl.is_pruned(),
            })
            .collect();
        Self {
            name: c.metadata().name.clone(),
            total_probability: ksum(rows.iter().map(|r| r.probability)),
            total_points: c.len(),
            nonzero_points: c.support_size(),
            rows,
        }
    }

    pub fn nonzero_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.pruned).count()
    }

    /// CSV with one row per shell and a closing `total` row.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["energy", "size", "probability", "scale", "pruned"])?;
        for r in &self.rows {
            out.write_record([
                r.energy.to_string(),
                r.size.to_string(),
                r.probability.to_string(),
                r.scale.to_string(),
                r.pruned.to_string(),
            ])?;
        }
        out.write_record([
            "total".to_string(),
            self.total_points.to_string(),
            self.total_probability.to_string(),
            String::new(),
            (self.total_points - self.nonzero_points).to_string(),
        ])?;
        out.flush()?;
        Ok(())
    }
}

/// Per-amplitude PMF table of a constellation exchange file.
pub fn report_amplitude_pmf(path: impl AsRef<Path>) -> Result<PmfReport> {
    Ok(PmfReport::of(&read_constellation(path)?))
}
