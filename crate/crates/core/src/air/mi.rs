use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aux::AuxChannel;
use super::kernel::Kernel;
use crate::channel::{effective_snr, Fingerprint, SymbolBatch};
use crate::constellation::{moments, Constellation4D, Point4};
use crate::error::{Error, Result};
use crate::numeric::{jackknife_se, ksum};

/// Number of contiguous sub-batches used for jackknife errors.
pub const JACKKNIFE_GROUPS: usize = 10;

/// Achievable-rate estimate for one (constellation, channel) evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AirReport {
    /// Mismatched-decoding MI, clipped to `[0, entropy_bits]`.
    pub mi_bits_per_4d: f64,
    /// Jackknife standard error over [`JACKKNIFE_GROUPS`] sub-batches.
    pub mi_se: f64,
    pub entropy_bits: f64,
    pub snr_eff_db: f64,
    pub n_symbols: usize,
    pub aux: AuxChannel,
    pub papr: f64,
    /// Per-sub-batch MI means, for paired comparisons under common random numbers.
    pub group_means: Vec<f64>,
    pub seed: u64,
    pub channel_fingerprint: Fingerprint,
}

impl AirReport {
    /// Appends this report as one JSON line.
    pub fn append_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        let line = serde_json::to_string(self).expect("serializable");
        writeln!(f, "{line}")?;
        Ok(())
    }
}

/// Means of `values` over `groups` contiguous, nearly equal slices.
pub(crate) fn group_means(values: &[f64], groups: usize) -> Vec<f64> {
    let n = values.len();
    let g = groups.min(n).max(1);
    (0..g)
        .map(|k| {
            let (lo, hi) = (k * n / g, (k + 1) * n / g);
            ksum(values[lo..hi].iter().copied()) / (hi - lo) as f64
        })
        .collect()
}

fn lexicographic(a: &Point4, b: &Point4) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Per-symbol information densities `log2 q(y|x) / Σ_j P_j q(y|x_j)` in bits.
///
/// The denominator runs over the support of `c` in a canonical point order,
/// so the result does not depend on how `c` is indexed.
pub fn information_densities(batch: &SymbolBatch, c: &Constellation4D, aux: &AuxChannel) -> Result<Vec<f64>> {
    batch.check_against(c)?;
    let mut support = c.support();
    if support.is_empty() {
        return Err(Error::DegeneratePmf);
    }
    if let Some(&k) = batch.tx_indices.iter().find(|&&i| c.is_pruned(i as usize)) {
        return Err(Error::InvalidArgument(format!(
            "transmitted index {k} carries zero probability"
        )));
    }
    support.sort_by(|&a, &b| lexicographic(&c.points()[a], &c.points()[b]).then(a.cmp(&b)));
    let centre = |p: &Point4| {
        let scaled = p.map(|v| v * batch.tx_scale);
        aux.whiten(&aux.gain.apply(&scaled))
    };
    let kernel = Kernel::new(
        support
            .iter()
            .map(|&i| (centre(&c.points()[i]), c.pmf()[i])),
    );
    let ln2 = std::f64::consts::LN_2;
    let densities = batch
        .tx
        .par_iter()
        .zip(batch.rx.par_iter())
        .map_init(Vec::new, |scratch, (x, y)| {
            let w = aux.whiten(y);
            let z = aux.whiten(&aux.gain.apply(x));
            let own = -0.5 * crate::numeric::dist2(&w, &z);
            (own - kernel.log_mixture(&w, scratch)) / ln2
        })
        .collect();
    Ok(densities)
}

/// Mismatched-decoding MI estimate of `batch` under the auxiliary law `aux`.
pub fn mutual_information(batch: &SymbolBatch, c: &Constellation4D, aux: &AuxChannel) -> Result<AirReport> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let densities = information_densities(batch, c, aux)?;
    let raw = ksum(densities.iter().copied()) / densities.len() as f64;
    let groups = group_means(&densities, JACKKNIFE_GROUPS);
    let m = moments(c);
    Ok(AirReport {
        mi_bits_per_4d: raw.clamp(0.0, m.entropy_bits),
        mi_se: jackknife_se(&groups),
        entropy_bits: m.entropy_bits,
        snr_eff_db: effective_snr(batch)?,
        n_symbols: batch.len(),
        aux: aux.clone(),
        papr: m.papr,
        group_means: groups,
        seed: batch.seed,
        channel_fingerprint: batch.channel_fingerprint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::air::{fit_gaussian_auxiliary, FitOptions};
    use crate::channel::{sample_symbols, simulate_awgn};
    use crate::constellation::{build_product_qam, mb_pmf};

    fn awgn(c: &Constellation4D, snr_db: f64, n: usize, seed: u64) -> SymbolBatch {
        let tx = sample_symbols(c, n, seed).unwrap();
        simulate_awgn(c, &tx, snr_db, seed + 1).unwrap()
    }

    #[test]
    fn noiseless_uniform_64qam_saturates_at_12_bits() {
        let c = build_product_qam(64).unwrap();
        let b = awgn(&c, f64::INFINITY, 2000, 1);
        let aux = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
        let r = mutual_information(&b, &c, &aux).unwrap();
        assert!((r.mi_bits_per_4d - 12.0).abs() < 1e-9, "{}", r.mi_bits_per_4d);
        assert!(r.mi_bits_per_4d.is_finite(), "{r:?}");
    }

    #[test]
    fn never_exceeds_entropy() {
        let c = mb_pmf(&build_product_qam(16).unwrap(), 1.5).unwrap();
        for snr in [0.0, 10.0, 30.0, f64::INFINITY] {
            let b = awgn(&c, snr, 3000, 5);
            let aux = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
            let r = mutual_information(&b, &c, &aux).unwrap();
            assert!(r.mi_bits_per_4d <= r.entropy_bits && r.mi_bits_per_4d >= 0.0);
        }
    }

    #[test]
    fn rx_scaling_leaves_mi_unchanged() {
        let c = build_product_qam(16).unwrap();
        let b = awgn(&c, 12.0, 5000, 9);
        let base = {
            let aux = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
            mutual_information(&b, &c, &aux).unwrap().mi_bits_per_4d
        };
        for k in [1e-3, 0.5, 7.0, 1e4] {
            let s = b.with_rx_scaled(k);
            let aux = fit_gaussian_auxiliary(&s, FitOptions::default()).unwrap();
            let v = mutual_information(&s, &c, &aux).unwrap().mi_bits_per_4d;
            assert!((v - base).abs() < 1e-9, "scale {k}: {v} vs {base}");
        }
    }

    #[test]
    fn point_permutation_is_bit_identical() {
        let c = mb_pmf(&build_product_qam(16).unwrap(), 0.7).unwrap();
        let b = awgn(&c, 11.0, 4000, 4);
        let aux = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
        let r1 = mutual_information(&b, &c, &aux).unwrap();

        let n = c.len();
        let order: Vec<usize> = (0..n).map(|k| (k * 97 + 13) % n).collect();
        let permuted = c.permuted(&order).unwrap();
        let mut inverse = vec![0u32; n];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new as u32;
        }
        let mut pb = b.clone();
        pb.tx_indices = b.tx_indices.iter().map(|&i| inverse[i as usize]).collect();
        let r2 = mutual_information(&pb, &permuted, &aux).unwrap();
        assert_eq!(r1.mi_bits_per_4d.to_bits(), r2.mi_bits_per_4d.to_bits());
    }

    #[test]
    fn monotone_in_snr_under_common_seed() {
        let c = build_product_qam(16).unwrap();
        let mut last = 0.0;
        for snr in [2.0, 6.0, 10.0, 14.0, 18.0] {
            let b = awgn(&c, snr, 20_000, 77);
            let aux = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
            let r = mutual_information(&b, &c, &aux).unwrap();
            assert!(r.mi_bits_per_4d + 2.0 * r.mi_se >= last);
            last = r.mi_bits_per_4d;
        }
    }

    #[test]
    fn tiny_variance_and_huge_energies_stay_finite() {
        let c = build_product_qam(16).unwrap();
        let b = awgn(&c, 20.0, 500, 2).with_rx_scaled(1e3);
        let aux = AuxChannel::scaled_identity(crate::air::Gain::Real(1e3), 1e-15).unwrap();
        let r = mutual_information(&b, &c, &aux).unwrap();
        assert!(r.mi_bits_per_4d.is_finite(), "{r:?}");
    }
}
