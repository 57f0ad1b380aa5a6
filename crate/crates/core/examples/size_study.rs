//! MD-ball gain over uniform 64QAM² against the number of points, on the desk
//! link at a nonlinear launch power.
//!
//! cargo run --release --example size_study -- [power_dbm]

use shapeopt::experiment::{run_size_study, BaseKind, ExperimentSpec, Preset, RunOptions, Strategy};

fn main() -> shapeopt::Result<()> {
    env_logger::init();
    let power: f64 = std::env::args().nth(1).map_or(15.0, |s| s.parse().expect("power in dBm"));
    let spec = ExperimentSpec {
        strategy: Strategy::MdBall,
        base: BaseKind::Pam16x4,
        n_ball: Some(8192),
        power_sweep: vec![power],
        link: Preset::Desk.link(),
        output_dir: "results/size_study".into(),
        ..ExperimentSpec::default()
    };
    let out = run_size_study(&spec, &[256, 1024, 4096, 8192, 16384, 65536], RunOptions::default())?;
    println!("   n_ball  MI[bit/4D]     se    gain");
    for r in out.rows {
        println!(
            "{:>9} {:11.3} {:6.3} {:+7.3}",
            r.n_ball.map_or("uniform".into(), |n| n.to_string()),
            r.mi_bits_per_4d,
            r.mi_se,
            r.gain.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
