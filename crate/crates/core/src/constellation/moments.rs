use serde::{Deserialize, Serialize};

use super::Constellation4D;
use crate::numeric::ksum;

/// Power and shape statistics of a constellation under its PMF.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean_energy: f64,
    /// Peak energy over the supported points divided by the mean energy.
    pub papr: f64,
    /// E‖X‖⁴ / (E‖X‖²)².
    pub mu4: f64,
    /// E‖X‖⁶ / (E‖X‖²)³.
    pub mu6: f64,
    pub entropy_bits: f64,
}

pub fn moments(c: &Constellation4D) -> MomentReport {
    let e = c.energies();
    let p = c.pmf();
    let support = || e.iter().zip(p).filter(|(_, w)| **w > 0.0);
    let m2 = ksum(support().map(|(e, w)| w * e));
    let m4 = ksum(support().map(|(e, w)| w * e * e));
    let m6 = ksum(support().map(|(e, w)| w * e * e * e));
    let peak = support().map(|(e, _)| *e).fold(0.0, f64::max);
    MomentReport {
        mean_energy: m2,
        papr: peak / m2,
        mu4: m4 / (m2 * m2),
        mu6: m6 / (m2 * m2 * m2),
        entropy_bits: c.entropy_bits(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_product_pam16_4d, build_product_qam, mb_pmf};

    #[test]
    fn constant_modulus_moments_are_one() {
        let m = moments(&build_product_qam(4).unwrap());
        assert!((m.papr - 1.0).abs() < 1e-12);
        assert!((m.mu4 - 1.0).abs() < 1e-12);
        assert!((m.mu6 - 1.0).abs() < 1e-12);
        assert!((m.entropy_bits - 4.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_qam64_squared_moments() {
        // Exhaustive sums over the odd grid: mean 84, mu4 = 25/21,
        // PAPR = 196/84, mu6 = 1.592160673793327.
        let m = moments(&build_product_qam(64).unwrap());
        assert!((m.mu4 - 25.0 / 21.0).abs() < 1e-12);
        assert!((m.papr - 196.0 / 84.0).abs() < 1e-12);
        assert!((m.mu6 - 1.592160673793327).abs() < 1e-12);
        assert!((m.entropy_bits - 12.0).abs() < 1e-12);
    }

    #[test]
    fn pam16_papr() {
        // 4·225 / 340
        let m = moments(&build_product_pam16_4d());
        assert!((m.papr - 900.0 / 340.0).abs() < 1e-12);
    }

    #[test]
    fn pruned_points_do_not_set_the_peak() {
        let c = build_product_qam(16).unwrap();
        let e = c.energies();
        let emax = e.iter().cloned().fold(0.0, f64::max);
        let w: Vec<f64> = e.iter().map(|v| if *v >= emax - 1e-12 { 0.0 } else { 1.0 }).collect();
        let shaped = c.with_pmf(w).unwrap();
        let m = moments(&shaped);
        // 16QAM²: outer shell 36 removed, next shell 28, mean over the 240 rest
        let mean = (4.0 * 16.0 + 12.0 * 64.0 + 20.0 * 96.0 + 28.0 * 64.0) / 240.0;
        assert!((m.papr - 28.0 / mean).abs() < 1e-12);
        assert!((mb_pmf(&shaped, 0.0).unwrap().support_size()) == 240);
    }
}
