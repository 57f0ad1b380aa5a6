//! Compares the mismatched-decoding estimate on a simulated AWGN channel with
//! the numeric AWGN oracle, for uniform 16QAM² and 64QAM².
//!
//! cargo run --release --example mi_estimation

use shapeopt::air::{awgn_mi_oracle, fit_gaussian_auxiliary, mutual_information, FitOptions};
use shapeopt::channel::{sample_symbols, simulate_awgn};
use shapeopt::constellation::build_product_qam;

fn main() -> shapeopt::Result<()> {
    println!("base     SNR[dB]  oracle  mismatched     se");
    for m in [16, 64] {
        let c = build_product_qam(m)?;
        for snr in [6.0, 10.0, 14.0, 18.0] {
            let tx = sample_symbols(&c, 100_000, 7)?;
            let batch = simulate_awgn(&c, &tx, snr, 7)?;
            let aux = fit_gaussian_auxiliary(&batch, FitOptions::default())?;
            let r = mutual_information(&batch, &c, &aux)?;
            println!(
                "{m:>2}QAM^2 {snr:8.1} {:7.3} {:11.3} {:6.3}",
                awgn_mi_oracle(&c, snr)?,
                r.mi_bits_per_4d,
                r.mi_se
            );
        }
    }
    Ok(())
}
