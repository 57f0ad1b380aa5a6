//! Greedy joint probabilistic and geometric shaping over amplitude classes.

mod config;
mod evaluator;
mod gain;
mod greedy;
mod trace;

pub use config::{OptimizerConfig, SeedPolicy, SweepOrder};
pub use evaluator::{AwgnEvaluator, EntropyEvaluator, Evaluator, FiberEvaluator, OracleEvaluator};
pub use gain::{shaping_gain, ShapingGain};
pub use greedy::{candidate_state, evaluate_candidate, optimize, optimize_with};
pub use trace::{read_trace, ClassParams, EpochRecord, NdjsonSink, OptimizerTrace, StepRecord, TraceEvent};
