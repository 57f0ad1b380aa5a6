//! 4D constellations with a per-point probability mass function.
//!
//! A point is one dual-polarization time slot `[Re X, Im X, Re Y, Im Y]`.
//! Every constructor and transform in this module returns a constellation
//! normalized to unit mean energy under its own PMF; launch power is applied
//! only by the channel models.

mod classes;
mod exchange;
mod moments;
mod qam;
mod shaping;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{energy, ksum};

pub use classes::{amplitude_classes, apply_class_state, AmplitudeClass, AmplitudeClassSet};
pub use exchange::{read_constellation, write_constellation, ConstellationFile};
pub use moments::{moments, MomentReport};
pub use qam::{build_product_pam16_4d, build_product_qam};
pub use shaping::{mb_for_awgn_snr, mb_pmf, md_ball, md_ball_with, MbSearch, MdBallOptions};

/// One 4D point: both quadratures of both polarizations.
pub type Point4 = [f64; 4];

/// Tolerance on the PMF sum.
pub const PMF_TOL: f64 = 1e-12;
/// Minimum Euclidean separation between supported points.
pub const DISTINCT_TOL: f64 = 1e-12;
/// Default relative tolerance for grouping equal energies.
pub const ENERGY_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub name: String,
    pub base: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ball: Option<usize>,
    /// Radial factor applied to each point relative to its base position,
    /// before global power normalization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constellation4D {
    points: Vec<Point4>,
    pmf: Vec<f64>,
    metadata: Metadata,
}

impl Constellation4D {
    /// Validates and wraps a point list and PMF. Does not normalize power.
    pub fn new(points: Vec<Point4>, pmf: Vec<f64>) -> Result<Self> {
        Self::with_metadata(points, pmf, Metadata::default())
    }

    pub fn with_metadata(points: Vec<Point4>, pmf: Vec<f64>, metadata: Metadata) -> Result<Self> {
        let c = Self {
            points,
            pmf,
            metadata,
        };
        c.validate()?;
        Ok(c)
    }

    /// Uniform PMF over `points`, normalized to unit mean energy.
    pub fn uniform(points: Vec<Point4>, metadata: Metadata) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidConstellation("empty point list".into()));
        }
        let pmf = vec![1.0 / n as f64; n];
        Self::with_metadata(points, pmf, metadata)?.normalized()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if n == 0 {
            return Err(Error::InvalidConstellation("empty point list".into()));
        }
        if self.pmf.len() != n {
            return Err(Error::InvalidConstellation(format!(
                "{} points but {} probabilities",
                n,
                self.pmf.len()
            )));
        }
        if let Some(bad) = self.pmf.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidConstellation(format!(
                "probability {} at index {bad} is not a finite nonnegative number",
                self.pmf[bad]
            )));
        }
        if let Some(bad) = self
            .points
            .iter()
            .position(|p| p.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidConstellation(format!(
                "point {bad} has a non-finite coordinate"
            )));
        }
        let total = ksum(self.pmf.iter().copied());
        if (total - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidConstellation(format!(
                "PMF sums to {total:.17}, expected 1"
            )));
        }
        if let Some((i, j)) = self.find_coincident() {
            return Err(Error::InvalidConstellation(format!(
                "points {i} and {j} coincide"
            )));
        }
        Ok(())
    }

    // Hash supported points into cells much larger than the tolerance; a
    // coordinate close to a cell edge is also probed in the adjacent cell.
    fn find_coincident(&self) -> Option<(usize, usize)> {
        const CELL: f64 = 1e-9;
        let mut cells: HashMap<[i64; 4], Vec<usize>> = HashMap::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            if self.pmf[i] == 0.0 {
                continue;
            }
            let mut options: [[i64; 2]; 4] = [[0; 2]; 4];
            let mut counts = [1usize; 4];
            for d in 0..4 {
                let q = p[d] / CELL;
                let cell = q.floor();
                options[d][0] = cell as i64;
                let frac = (q - cell) * CELL;
                if frac < DISTINCT_TOL {
                    options[d][1] = cell as i64 - 1;
                    counts[d] = 2;
                } else if CELL - frac < DISTINCT_TOL {
                    options[d][1] = cell as i64 + 1;
                    counts[d] = 2;
                }
            }
            for a in 0..counts[0] {
                for b in 0..counts[1] {
                    for c in 0..counts[2] {
                        for d in 0..counts[3] {
                            let key = [options[0][a], options[1][b], options[2][c], options[3][d]];
                            if let Some(others) = cells.get(&key) {
                                for &j in others {
                                    if crate::numeric::dist2(p, &self.points[j]).sqrt() <= DISTINCT_TOL
                                    {
                                        return Some((j, i));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            cells
                .entry([options[0][0], options[1][0], options[2][0], options[3][0]])
                .or_default()
                .push(i);
        }
        None
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point4] {
        &self.points
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut Metadata {
        &mut self.metadata
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.metadata.name = name.into();
        self
    }

    /// A point carrying exactly zero probability is pruned.
    pub fn is_pruned(&self, i: usize) -> bool {
        self.pmf[i] == 0.0
    }

    /// Indices of points with nonzero probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.pmf[i] > 0.0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.pmf.iter().filter(|p| **p > 0.0).count()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(energy).collect()
    }

    /// E‖X‖² under the PMF.
    pub fn mean_energy(&self) -> f64 {
        ksum(
            self.points
                .iter()
                .zip(&self.pmf)
                .map(|(p, w)| w * energy(p)),
        )
    }

    /// Entropy of the PMF in bits.
    pub fn entropy_bits(&self) -> f64 {
        -ksum(
            self.pmf
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| p * p.log2()),
        )
    }

    /// Rescales every point so that E‖X‖² = 1 under the PMF.
    pub fn normalized(mut self) -> Result<Self> {
        let e = self.mean_energy();
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidConstellation(format!(
                "cannot normalize mean energy {e}"
            )));
        }
        let g = e.sqrt().recip();
        for p in &mut self.points {
            for v in p.iter_mut() {
                *v *= g;
            }
        }
        Ok(self)
    }

    /// Replaces the PMF, renormalizing it to sum to one, then renormalizes power.
    pub fn with_pmf(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} points",
                weights.len(),
                self.len()
            )));
        }
        let total = ksum(weights.iter().copied());
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegeneratePmf);
        }
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::with_metadata(self.points.clone(), pmf, self.metadata.clone())?.normalized()
    }

    /// Drops pruned points, keeping order.
    pub fn without_pruned(&self) -> Result<Self> {
        let keep = self.support();
        let mut meta = self.metadata.clone();
        if let Some(s) = &meta.scales {
            meta.scales = Some(keep.iter().map(|&i| s[i]).collect());
        }
        Self::with_metadata(
            keep.iter().map(|&i| self.points[i]).collect(),
            keep.iter().map(|&i| self.pmf[i]).collect(),
            meta,
        )
    }

    /// Applies the same permutation to points and PMF: output slot `k` holds input `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let mut seen = vec![false; self.len()];
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let mut meta = self.metadata.clone();
        if let Some(s) = &meta.scales {
            meta.scales = Some(order.iter().map(|&i| s[i]).collect());
        }
        Self::with_metadata(
            order.iter().map(|&i| self.points[i]).collect(),
            order.iter().map(|&i| self.pmf[i]).collect(),
            meta,
        )
    }

    /// Canonical little-endian byte image of points and PMF, for fingerprints.
    pub fn content_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * 40);
        for (p, w) in self.points.iter().zip(&self.pmf) {
            for v in p {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(Constellation4D::new(vec![], vec![]).is_err());
        assert!(Constellation4D::new(vec![[1.0, 0.0, 0.0, 0.0]], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn rejects_bad_pmf() {
        let pts = vec![[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]];
        assert!(Constellation4D::new(pts.clone(), vec![0.6, 0.6]).is_err());
        assert!(Constellation4D::new(pts.clone(), vec![1.5, -0.5]).is_err());
        assert!(Constellation4D::new(pts, vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn rejects_coincident_support_points() {
        let pts = vec![[0.5, 0.5, 0.0, 0.0], [0.5, 0.5 + 1e-13, 0.0, 0.0]];
        assert!(Constellation4D::new(pts, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn coincident_points_straddling_a_hash_cell_are_caught() {
        let x = 3e-9 - 2e-13;
        let pts = vec![[x, 0.0, 0.0, 0.0], [x + 4e-13, 0.0, 0.0, 0.0]];
        assert!(Constellation4D::new(pts, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn pruned_duplicates_are_tolerated() {
        let pts = vec![[1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]];
        let c = Constellation4D::new(pts, vec![0.5, 0.0, 0.5]).unwrap();
        assert!(c.is_pruned(1));
        assert_eq!(c.support(), vec![0, 2]);
    }

    #[test]
    fn normalization_gives_unit_energy() {
        let pts = vec![[3.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]];
        let c = Constellation4D::new(pts, vec![0.25, 0.75])
            .unwrap()
            .normalized()
            .unwrap();
        assert!((c.mean_energy() - 1.0).abs() < 1e-12);
    }
}
