use serde::{Deserialize, Serialize};

use super::{Constellation4D, Metadata, ENERGY_REL_TOL};
use crate::error::{Error, Result};
use crate::numeric::{energy, ksum};

/// Points of one 4D energy shell, shaped together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeClass {
    /// Shell energy ‖x‖² in the parent's normalization, before scaling.
    pub energy: f64,
    pub members: Vec<usize>,
    /// Total probability of the members.
    pub probability: f64,
    /// Radial factor applied to every member.
    pub scale: f64,
    /// Last nonzero probability; lets a pruned class be revived.
    pub shadow_probability: f64,
}

impl AmplitudeClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_pruned(&self) -> bool {
        self.probability == 0.0
    }

    /// Probability of a single member point.
    pub fn point_probability(&self) -> f64 {
        self.probability / self.members.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeClassSet {
    /// Sorted by ascending energy.
    pub classes: Vec<AmplitudeClass>,
    /// Target mean energy after normalization.
    pub parent_power: f64,
}

impl AmplitudeClassSet {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn nonzero_classes(&self) -> usize {
        self.classes.iter().filter(|c| !c.is_pruned()).count()
    }

    pub fn nonzero_points(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| !c.is_pruned())
            .map(|c| c.size())
            .sum()
    }

    pub fn total_probability(&self) -> f64 {
        ksum(self.classes.iter().map(|c| c.probability))
    }

    /// Checks that the classes partition `0..n_points` with valid weights.
    pub fn check_partition(&self, n_points: usize) -> Result<()> {
        let mut seen = vec![false; n_points];
        for (k, class) in self.classes.iter().enumerate() {
            if class.members.is_empty() {
                return Err(Error::InvalidArgument(format!("class {k} is empty")));
            }
            if !(class.probability >= 0.0 && class.probability.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "class {k} has probability {}",
                    class.probability
                )));
            }
            if !(class.scale > 0.0 && class.scale.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "class {k} has scale {}; scales must be positive",
                    class.scale
                )));
            }
            for &i in &class.members {
                if i >= n_points || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!(
                        "class {k} member {i} is out of range or repeated"
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("point {i} belongs to no class")));
        }
        Ok(())
    }
}

/// Groups the points of `c` into shells of equal energy.
///
/// Energies are compared relative to the first (smallest) energy of the shell
/// being built, so a chain of near-equal values cannot drift across shells.
pub fn amplitude_classes(c: &Constellation4D, rel_tol: f64) -> AmplitudeClassSet {
    let rel_tol = if rel_tol > 0.0 { rel_tol } else { ENERGY_REL_TOL };
    let energies = c.energies();
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));

    let mut classes: Vec<AmplitudeClass> = Vec::new();
    for i in order {
        let e = energies[i];
        match classes.last_mut() {
            Some(cl) if (e - cl.energy).abs() <= rel_tol * cl.energy.abs().max(f64::MIN_POSITIVE) => {
                cl.members.push(i)
            }
            _ => classes.push(AmplitudeClass {
                energy: e,
                members: vec![i],
                probability: 0.0,
                scale: 1.0,
                shadow_probability: 0.0,
            }),
        }
    }
    let pmf = c.pmf();
    for cl in &mut classes {
        cl.members.sort_unstable();
        cl.probability = ksum(cl.members.iter().map(|&i| pmf[i]));
        cl.shadow_probability = cl.probability;
    }
    AmplitudeClassSet {
        classes,
        parent_power: 1.0,
    }
}

/// Materializes a class state on top of `base`.
///
/// Each member gets an equal share of its class probability and is scaled by
/// the class factor; the result is renormalized to unit mean energy over the
/// supported points.
pub fn apply_class_state(base: &Constellation4D, acs: &AmplitudeClassSet) -> Result<Constellation4D> {
    acs.check_partition(base.len())?;
    let total = acs.total_probability();
    if total <= 0.0 {
        return Err(Error::DegeneratePmf);
    }
    let mut points = base.points().to_vec();
    let mut pmf = vec![0.0; base.len()];
    let mut scales = vec![1.0; base.len()];
    for class in &acs.classes {
        let w = class.probability / total / class.size() as f64;
        for &i in &class.members {
            pmf[i] = w;
            scales[i] = class.scale;
            for v in points[i].iter_mut() {
                *v *= class.scale;
            }
        }
    }
    let mean = ksum(points.iter().zip(&pmf).map(|(p, w)| w * energy(p)));
    let g = (acs.parent_power / mean).sqrt();
    for p in &mut points {
        for v in p.iter_mut() {
            *v *= g;
        }
    }
    let meta = Metadata {
        name: format!("{} (shaped)", base.metadata().base),
        base: base.metadata().base.clone(),
        scales: Some(scales),
        ..Metadata::default()
    };
    Constellation4D::with_metadata(points, pmf, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_product_qam, moments};

    #[test]
    fn qpsk_squared_is_one_class() {
        let acs = amplitude_classes(&build_product_qam(4).unwrap(), ENERGY_REL_TOL);
        assert_eq!(acs.len(), 1);
        assert_eq!(acs.classes[0].size(), 16);
    }

    #[test]
    fn qam64_class_count_matches_enumeration() {
        // Pairwise sums of the nine 2D energies {2,10,18,26,34,50,58,74,98}
        // take 21 distinct values; frozen from exhaustive enumeration.
        let acs = amplitude_classes(&build_product_qam(64).unwrap(), ENERGY_REL_TOL);
        assert_eq!(acs.len(), 21);
        let sizes: Vec<usize> = acs.classes.iter().map(|c| c.size()).collect();
        assert_eq!(
            sizes,
            [16, 64, 96, 128, 208, 192, 224, 384, 288, 320, 448, 192, 304, 384, 96, 256, 192, 160, 64, 64, 16]
        );
        assert!((acs.total_probability() - 1.0).abs() < 1e-12);
        acs.check_partition(4096).unwrap();
    }

    #[test]
    fn classes_sorted_and_partitioned() {
        let c = build_product_qam(16).unwrap();
        let acs = amplitude_classes(&c, ENERGY_REL_TOL);
        assert!(acs.classes.windows(2).all(|w| w[0].energy < w[1].energy));
        acs.check_partition(c.len()).unwrap();
    }

    #[test]
    fn uniform_class_state_reproduces_base() {
        let base = build_product_qam(16).unwrap();
        let acs = amplitude_classes(&base, ENERGY_REL_TOL);
        let out = apply_class_state(&base, &acs).unwrap();
        for (a, b) in out.points().iter().zip(base.points()) {
            for d in 0..4 {
                assert!((a[d] - b[d]).abs() < 1e-12);
            }
        }
        for (p, q) in out.pmf().iter().zip(base.pmf()) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn single_class_gives_constant_modulus() {
        let base = build_product_qam(64).unwrap();
        let mut acs = amplitude_classes(&base, ENERGY_REL_TOL);
        for (k, cl) in acs.classes.iter_mut().enumerate() {
            cl.probability = if k == 7 { 1.0 } else { 0.0 };
        }
        let out = apply_class_state(&base, &acs).unwrap();
        assert_eq!(out.support_size(), 384);
        assert!((moments(&out).papr - 1.0).abs() < 1e-12);
        assert!((out.mean_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_is_degenerate() {
        let base = build_product_qam(4).unwrap();
        let mut acs = amplitude_classes(&base, ENERGY_REL_TOL);
        acs.classes[0].probability = 0.0;
        assert!(matches!(apply_class_state(&base, &acs), Err(Error::DegeneratePmf)));
    }

    #[test]
    fn zero_scale_is_rejected() {
        let base = build_product_qam(16).unwrap();
        let mut acs = amplitude_classes(&base, ENERGY_REL_TOL);
        acs.classes[1].scale = 0.0;
        assert!(apply_class_state(&base, &acs).is_err());
    }
}
