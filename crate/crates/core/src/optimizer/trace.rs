use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::OptimizerConfig;
use crate::air::AirReport;
use crate::constellation::{AmplitudeClassSet, Constellation4D};
use crate::error::{Error, Result};

/// One evaluated grid candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub epoch: usize,
    pub class: usize,
    pub prob_factor: f64,
    pub scale_factor: f64,
    pub mi: f64,
    pub se: f64,
    pub seed: u64,
    pub accepted: bool,
}

/// Probability, scale and shadow probability of one class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub probability: f64,
    pub scale: f64,
    pub shadow_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mi: f64,
    pub classes: Vec<ClassParams>,
    pub incumbent: AirReport,
    pub evaluations: u64,
}

/// Line-delimited trace record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Start {
        base: String,
        n_classes: usize,
        config: OptimizerConfig,
        initial: AirReport,
    },
    Step(StepRecord),
    EpochEnd(EpochRecord),
    Finish {
        epochs: usize,
        converged: bool,
        mi: f64,
        nonzero_classes: usize,
        nonzero_points: usize,
    },
    Abort {
        epoch: usize,
        class: usize,
        message: String,
    },
}

impl TraceEvent {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Reads an NDJSON trace; blank lines are skipped and a torn final line
/// (interrupted write) is ignored.
pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceEvent>> {
    let lines: Vec<String> = BufReader::new(std::fs::File::open(path)?)
        .lines()
        .collect::<std::io::Result<_>>()?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut out = Vec::new();
    for (k, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(ev) => out.push(ev),
            Err(_) if Some(k) == last => break,
            Err(e) => {
                return Err(Error::Parse {
                    line: k + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

/// Appends events to a file, flushing each line.
pub struct NdjsonSink<W: Write> {
    out: W,
}

impl NdjsonSink<std::fs::File> {
    pub fn append(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { out: f })
    }
}

impl<W: Write> NdjsonSink<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, ev: &TraceEvent) -> Result<()> {
        writeln!(self.out, "{}", ev.to_line())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Outcome of a greedy run.
#[derive(Clone, Debug)]
pub struct OptimizerTrace {
    pub initial: AirReport,
    pub steps: Vec<StepRecord>,
    pub epochs: Vec<EpochRecord>,
    /// Incumbent MI at the end of each epoch.
    pub epoch_mi: Vec<f64>,
    pub final_state: AmplitudeClassSet,
    pub final_constellation: Constellation4D,
    pub final_report: AirReport,
    pub nonzero_classes: usize,
    pub nonzero_points: usize,
    pub converged: bool,
    pub evaluations: u64,
    /// Set when an evaluator error stopped the run early.
    pub abort: Option<String>,
}

impl OptimizerTrace {
    /// Seeds of every evaluation, for train/validation bookkeeping.
    pub fn seeds(&self) -> std::collections::BTreeSet<u64> {
        let mut s: std::collections::BTreeSet<u64> = self.steps.iter().map(|r| r.seed).collect();
        s.insert(self.initial.seed);
        s
    }

    pub fn accepted(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.accepted)
    }
}
