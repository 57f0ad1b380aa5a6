use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shapeopt::experiment::{
    report_amplitude_pmf, run_optimize, run_power_sweep, run_size_study, ExperimentSpec, Preset, RunOptions,
    SweepOutcome, RESULTS_FILE,
};
use shapeopt::Error;

#[derive(Parser)]
#[command(name = "shapeopt", version, about = "Constellation shaping experiments for nonlinear fiber links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SpecArgs {
    /// Experiment spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Link preset; keys of the spec's [link] table override it.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Continue interrupted optimizer traces.
    #[arg(long)]
    resume: bool,
}

#[derive(Subcommand)]
enum Command {
    /// MI against launch power for the spec's strategy.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// MD-ball gain over uniform 64²QAM for several ball sizes.
    Sizes {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Per-amplitude PMF table of a constellation file, as CSV.
    Pmf { file: PathBuf },
    /// Runs the optimizer at the first sweep power.
    Optimize {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

const CONFIG_ERROR: u8 = 2;
const PARTIAL_FAILURE: u8 = 3;

fn code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::Parse { .. } => CONFIG_ERROR,
        _ => PARTIAL_FAILURE,
    }
}

fn load(args: &SpecArgs) -> Result<ExperimentSpec, ExitCode> {
    ExperimentSpec::load(&args.spec, args.preset).map_err(|e| {
        eprintln!("error: {}: {e}", args.spec.display());
        ExitCode::from(CONFIG_ERROR)
    })
}

fn summarize(spec: &ExperimentSpec, out: shapeopt::Result<SweepOutcome>) -> ExitCode {
    match out {
        Ok(o) => {
            let failed = o.failures();
            eprintln!(
                "{} rows ({} reused, {failed} failed) in {}",
                o.rows.len(),
                o.reused,
                spec.output_dir.join(RESULTS_FILE).display()
            );
            if failed > 0 {
                ExitCode::from(PARTIAL_FAILURE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code_for(&e))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let run = |a: &SpecArgs, workers| RunOptions { workers, resume: a.resume };
    match cli.command {
        Command::Sweep { spec: a, workers } => match load(&a) {
            Ok(spec) => summarize(&spec, run_power_sweep(&spec, run(&a, workers))),
            Err(code) => code,
        },
        Command::Sizes { spec: a, sizes, workers } => match load(&a) {
            Ok(spec) => summarize(&spec, run_size_study(&spec, &sizes, run(&a, workers))),
            Err(code) => code,
        },
        Command::Pmf { file } => match report_amplitude_pmf(&file).and_then(|r| r.write_csv(std::io::stdout().lock())) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}: {e}", file.display());
                ExitCode::from(code_for(&e))
            }
        },
        Command::Optimize { spec: a, out } => match load(&a) {
            Ok(spec) => match run_optimize(&spec, &out, a.resume) {
                Ok((c, trace)) => {
                    eprintln!(
                        "MI {:.4} bit/4D, {} points in {} amplitudes, written to {}",
                        trace.final_report.mi_bits_per_4d,
                        c.support_size(),
                        trace.nonzero_classes,
                        out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(code_for(&e))
                }
            },
            Err(code) => code,
        },
    }
}
