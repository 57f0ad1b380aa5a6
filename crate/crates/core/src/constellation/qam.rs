use super::{Constellation4D, Metadata, Point4};
use crate::error::{Error, Result};

/// Cartesian product of two identical square QAM constellations.
///
/// Points are ordered lexicographically by (X-polarization symbol, Y-polarization
/// symbol), and a 2D symbol index `s` maps to in-phase level `s / side` and
/// quadrature level `s % side` on the odd-integer grid. Uniform PMF, unit energy.
pub fn build_product_qam(m_per_pol: usize) -> Result<Constellation4D> {
    let side = (m_per_pol as f64).sqrt().round() as usize;
    if m_per_pol < 4 || side * side != m_per_pol {
        return Err(Error::InvalidArgument(format!(
            "QAM order {m_per_pol} is not a square >= 4"
        )));
    }
    let level = |k: usize| (2 * k) as f64 - (side - 1) as f64;
    let mut points: Vec<Point4> = Vec::with_capacity(m_per_pol * m_per_pol);
    for sx in 0..m_per_pol {
        for sy in 0..m_per_pol {
            points.push([
                level(sx / side),
                level(sx % side),
                level(sy / side),
                level(sy % side),
            ]);
        }
    }
    let name = format!("{m_per_pol}^2QAM");
    Constellation4D::uniform(
        points,
        Metadata {
            name: name.clone(),
            base: name,
            ..Metadata::default()
        },
    )
}

/// 16-PAM in each of the four real dimensions (256QAM per polarization).
pub fn build_product_pam16_4d() -> Constellation4D {
    let mut c = build_product_qam(256).expect("256 is a valid square order");
    c.metadata.name = "4D-16PAM".into();
    c.metadata.base = "4D-16PAM".into();
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn qam64_has_4096_uniform_points() {
        let c = build_product_qam(64).unwrap();
        assert_eq!(c.len(), 4096);
        assert!(c.pmf().iter().all(|p| *p == 1.0 / 4096.0));
    }

    #[test]
    fn qpsk_squared_is_equal_energy() {
        let c = build_product_qam(4).unwrap();
        assert_eq!(c.len(), 16);
        let e = c.energies();
        assert!(e.iter().all(|v| (v - e[0]).abs() < 1e-15));
    }

    #[test]
    fn qam16_unit_energy() {
        let c = build_product_qam(16).unwrap();
        assert_eq!(c.len(), 256);
        assert!((c.mean_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_square_orders() {
        for m in [0, 1, 2, 8, 32, 63] {
            assert!(build_product_qam(m).is_err(), "{m}");
        }
    }

    #[test]
    fn order_is_lexicographic_over_polarization_symbols() {
        let c = build_product_qam(4).unwrap();
        let s = c.points()[0][0].abs();
        // index 1 = (sx=0, sy=1): only the Y quadrature moves
        let p0 = c.points()[0];
        let p1 = c.points()[1];
        assert_eq!([p0[0], p0[1], p0[2]], [p1[0], p1[1], p1[2]]);
        assert!((p1[3] - p0[3] - 2.0 * s).abs() < 1e-15);
    }

    #[test]
    fn pam16_4d_matches_qam256_squared() {
        let pam = build_product_pam16_4d();
        assert_eq!(pam.len(), 65536);
        assert!((pam.mean_energy() - 1.0).abs() < 1e-12);
        let key = |p: &Point4| p.map(|v| (v * 1e6).round() as i64);
        let a: HashSet<_> = pam.points().iter().map(key).collect();
        let b: HashSet<_> = build_product_qam(256).unwrap().points().iter().map(key).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn pam16_4d_distinct_energy_count() {
        // 94 distinct values of a²+b²+c²+d² over odd a..d in [-15, 15],
        // frozen from exhaustive enumeration.
        let c = build_product_pam16_4d();
        let mut e: Vec<i64> = c
            .energies()
            .iter()
            .map(|v| (v * 340.0).round() as i64) // mean integer energy is 340
            .collect();
        e.sort_unstable();
        e.dedup();
        assert_eq!(e.len(), 94);
    }
}
