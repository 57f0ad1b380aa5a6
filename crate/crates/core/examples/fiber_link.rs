//! Simulates the desk-scale WDM link for uniform 64²QAM at a few launch powers
//! and prints the effective SNR and mismatched-decoding rate.
//!
//! cargo run --release --example fiber_link -- [--paper]

use std::time::Instant;

use shapeopt::air::{fit_gaussian_auxiliary, mutual_information, FitOptions, GainModel};
use shapeopt::channel::{simulate_wdm, LinkConfig};
use shapeopt::constellation::build_product_qam;

fn main() -> shapeopt::Result<()> {
    let paper = std::env::args().any(|a| a == "--paper");
    let base = if paper { LinkConfig::paper() } else { LinkConfig::desk() };
    let c = build_product_qam(64)?;
    let opts = FitOptions { gain: GainModel::Complex, ..FitOptions::default() };
    println!("P_in[dBm]  SNR_eff[dB]  MI[bit/4D]     se  time[s]");
    for p in [8.0, 11.0, 14.0, 17.0, 20.0, 23.0] {
        let cfg = LinkConfig { total_launch_power: p, ..base.clone() };
        let t = Instant::now();
        let batch = simulate_wdm(&c, &cfg)?;
        let aux = fit_gaussian_auxiliary(&batch, opts)?;
        let r = mutual_information(&batch, &c, &aux)?;
        println!(
            "{p:9.1}  {:11.2}  {:10.3}  {:.3}  {:7.2}",
            r.snr_eff_db,
            r.mi_bits_per_4d,
            r.mi_se,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
