//! Log-sum-exp over a Gaussian kernel centred on constellation points.

use crate::constellation::Point4;

/// Terms further than this below the running maximum (in nats) are dropped.
pub(crate) const LSE_CUTOFF: f64 = 20.0;

/// Whitened support points in structure-of-arrays form with log-probabilities.
pub(crate) struct Kernel {
    c0: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
    c3: Vec<f64>,
    lnp: Vec<f64>,
}

impl Kernel {
    pub fn new(points: impl IntoIterator<Item = (Point4, f64)>) -> Self {
        let mut k = Kernel {
            c0: Vec::new(),
            c1: Vec::new(),
            c2: Vec::new(),
            c3: Vec::new(),
            lnp: Vec::new(),
        };
        for (p, prob) in points {
            k.c0.push(p[0]);
            k.c1.push(p[1]);
            k.c2.push(p[2]);
            k.c3.push(p[3]);
            k.lnp.push(prob.ln());
        }
        k
    }

    pub fn len(&self) -> usize {
        self.lnp.len()
    }

    /// `ln Σ_j P_j exp(-‖w - z_j‖² / 2)`; `scratch` is reused between calls.
    pub fn log_mixture(&self, w: &Point4, scratch: &mut Vec<f64>) -> f64 {
        let n = self.len();
        scratch.clear();
        scratch.resize(n, 0.0);
        let (c0, c1, c2, c3, lnp) = (
            &self.c0[..n],
            &self.c1[..n],
            &self.c2[..n],
            &self.c3[..n],
            &self.lnp[..n],
        );
        let s = &mut scratch[..n];
        for j in 0..n {
            let d0 = w[0] - c0[j];
            let d1 = w[1] - c1[j];
            let d2 = w[2] - c2[j];
            let d3 = w[3] - c3[j];
            s[j] = lnp[j] - 0.5 * (d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3);
        }
        let mut lanes = [f64::NEG_INFINITY; 4];
        let chunks = s.chunks_exact(4);
        let tail = chunks.remainder();
        for ch in chunks {
            for l in 0..4 {
                lanes[l] = if ch[l] > lanes[l] { ch[l] } else { lanes[l] };
            }
        }
        let peak = tail.iter().chain(&lanes).fold(f64::NEG_INFINITY, |m, &v| if v > m { v } else { m });
        let mut sum = 0.0;
        for &a in s.iter() {
            let e = a - peak;
            if e > -LSE_CUTOFF {
                sum += e.exp();
            }
        }
        peak + sum.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let pts = [([0.0, 0.0, 0.0, 0.0], 0.25), ([1.0, 0.5, 0.0, -1.0], 0.75)];
        let k = Kernel::new(pts);
        let w = [0.3, -0.2, 0.1, 0.4];
        let direct: f64 = pts
            .iter()
            .map(|(p, q)| q * (-0.5 * crate::numeric::dist2(&w, p)).exp())
            .sum();
        let mut s = Vec::new();
        assert!((k.log_mixture(&w, &mut s) - direct.ln()).abs() < 1e-14);
    }

    #[test]
    fn stays_finite_far_from_all_points() {
        let k = Kernel::new([([0.0; 4], 0.5), ([1e6, 0.0, 0.0, 0.0], 0.5)]);
        let mut s = Vec::new();
        let v = k.log_mixture(&[5e8, 0.0, 0.0, 0.0], &mut s);
        assert!(v.is_finite());
    }
}
