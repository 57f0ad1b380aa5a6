use rand_distr::{Distribution, StandardNormal};

use super::source::{substream, NOISE_STREAM};
use super::{Fingerprint, SymbolBatch};
use crate::constellation::{Constellation4D, Point4};
use crate::error::{Error, Result};
use crate::numeric::db_to_lin;

pub fn awgn_channel_fingerprint(snr_db: f64) -> Fingerprint {
    Fingerprint::of(&[b"awgn", &snr_db.to_le_bytes()])
}

/// Memoryless AWGN channel on 4D symbols.
///
/// `snr_db` is E‖X‖² over the total noise variance of the four real
/// dimensions; `+inf` returns `rx == tx`.
pub fn simulate_awgn(c: &Constellation4D, tx: &[u32], snr_db: f64, seed: u64) -> Result<SymbolBatch> {
    if tx.is_empty() {
        return Err(Error::InvalidArgument("no symbols to transmit".into()));
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidArgument("SNR is NaN".into()));
    }
    if let Some(&bad) = tx.iter().find(|&&i| i as usize >= c.len()) {
        return Err(Error::InvalidArgument(format!("tx index {bad} out of range")));
    }
    let values: Vec<Point4> = tx.iter().map(|&i| c.points()[i as usize]).collect();
    let sigma = (c.mean_energy() / (4.0 * db_to_lin(snr_db))).sqrt();
    let rx = if sigma == 0.0 {
        values.clone()
    } else {
        let mut rng = substream(seed, NOISE_STREAM);
        values
            .iter()
            .map(|x| {
                std::array::from_fn(|d| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    x[d] + sigma * g
                })
            })
            .collect()
    };
    let channel_fingerprint = awgn_channel_fingerprint(snr_db);
    Ok(SymbolBatch {
        tx_indices: tx.to_vec(),
        tx: values,
        rx,
        tx_scale: 1.0,
        seed,
        config_fingerprint: Fingerprint::of(&[&channel_fingerprint.0, &c.content_bytes()]),
        channel_fingerprint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{effective_snr, sample_symbols};
    use crate::constellation::build_product_qam;

    #[test]
    fn infinite_snr_is_transparent() {
        let c = build_product_qam(16).unwrap();
        let tx = sample_symbols(&c, 100, 1).unwrap();
        let b = simulate_awgn(&c, &tx, f64::INFINITY, 2).unwrap();
        assert_eq!(b.tx, b.rx);
    }

    #[test]
    fn empirical_snr_matches_configuration() {
        // Sample-variance oracle over 10⁶ symbols.
        let c = build_product_qam(16).unwrap();
        let tx = sample_symbols(&c, 1_000_000, 5).unwrap();
        let b = simulate_awgn(&c, &tx, 13.0, 6).unwrap();
        let noise: f64 = b
            .tx
            .iter()
            .zip(&b.rx)
            .map(|(x, y)| crate::numeric::dist2(x, y))
            .sum::<f64>()
            / b.len() as f64;
        let measured = 10.0 * (c.mean_energy() / noise).log10();
        assert!((measured - 13.0).abs() < 0.05, "{measured}");
        assert!((effective_snr(&b).unwrap() - 13.0).abs() < 0.05);
    }

    #[test]
    fn same_seed_same_noise() {
        let c = build_product_qam(4).unwrap();
        let tx = sample_symbols(&c, 64, 1).unwrap();
        assert_eq!(
            simulate_awgn(&c, &tx, 3.0, 9).unwrap(),
            simulate_awgn(&c, &tx, 3.0, 9).unwrap()
        );
    }
}
