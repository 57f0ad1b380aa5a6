//! Desk-scale launch-power sweep for uniform, MB and proposed shaping. Rows go
//! to `results/power_sweep/results.csv`; re-running skips finished cells.
//!
//! cargo run --release --example power_sweep -- [strategy ...]

use shapeopt::experiment::{run_power_sweep, ExperimentSpec, Preset, RunOptions, Strategy};
use shapeopt::optimizer::OptimizerConfig;

fn main() -> shapeopt::Result<()> {
    env_logger::init();
    let chosen: Vec<String> = std::env::args().skip(1).collect();
    let strategies = [Strategy::Uniform, Strategy::MbSnrMatched, Strategy::MbBruteforce, Strategy::Proposed];
    let base = ExperimentSpec {
        power_sweep: vec![8.0, 11.0, 14.0],
        link: Preset::Desk.link(),
        optimizer: OptimizerConfig {
            prob_grid: vec![0.0, 0.5, 1.0, 2.0],
            scale_grid: vec![0.95, 1.0, 1.05],
            max_epochs: 3,
            eval_symbols: 4096,
            ..OptimizerConfig::default()
        },
        output_dir: "results/power_sweep".into(),
        ..ExperimentSpec::default()
    };
    println!("strategy        P[dBm]  MI[bit/4D]     se  points  amps  lambda");
    for s in strategies {
        if !chosen.is_empty() && !chosen.iter().any(|c| c == s.name()) {
            continue;
        }
        let out = run_power_sweep(&ExperimentSpec { strategy: s, ..base.clone() }, RunOptions::default())?;
        for r in out.rows {
            println!(
                "{:<15} {:6.1} {:11.3} {:6.3} {:7} {:5} {:>7}  {}",
                r.strategy.name(),
                r.launch_power_dbm,
                r.mi_bits_per_4d,
                r.mi_se,
                r.nonzero_points,
                r.nonzero_amplitudes,
                r.lambda.map_or("-".into(), |l| format!("{l:.3}")),
                r.status
            );
        }
    }
    Ok(())
}
