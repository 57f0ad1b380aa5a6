//! Runs the greedy optimizer on 64QAM² over AWGN and compares the result with
//! the best Maxwell-Boltzmann PMF. Takes several minutes.
//!
//! cargo run --release --example awgn_mb_convergence -- [snr_db]

use std::time::Instant;

use shapeopt::air::AwgnOracle;
use shapeopt::constellation::{build_product_qam, mb_pmf};
use shapeopt::optimizer::{optimize, OptimizerConfig, OracleEvaluator};

fn main() -> shapeopt::Result<()> {
    let snr: f64 = std::env::args().nth(1).map_or(14.4, |s| s.parse().expect("snr in dB"));
    let base = build_product_qam(64)?;
    let oracle = AwgnOracle::with_samples(1 << 16);

    let mut best = (f64::MIN, 0.0);
    for k in 0..=20 {
        let lambda = k as f64 * 0.25;
        let mi = oracle.mutual_information(&mb_pmf(&base, lambda)?, snr)?;
        if mi > best.0 {
            best = (mi, lambda);
        }
    }
    println!("uniform {:.4}  best MB {:.4} at lambda {}", oracle.mutual_information(&base, snr)?, best.0, best.1);

    let cfg = OptimizerConfig {
        prob_grid: vec![0.0, 0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0],
        scale_grid: vec![1.0],
        eval_symbols: 1 << 16,
        epoch_improvement_tol: 2e-4,
        ..OptimizerConfig::default()
    };
    let t = Instant::now();
    let trace = optimize(&base, &OracleEvaluator { snr_db: snr }, &cfg)?;
    println!("greedy {:.4} after {} epochs, {:.0} s", oracle.mutual_information(&trace.final_constellation, snr)?, trace.epochs.len(), t.elapsed().as_secs_f64());
    println!("energy    p(point)");
    for c in &trace.final_state.classes {
        println!("{:6.3}  {:.4e}", c.energy, c.point_probability());
    }
    Ok(())
}
