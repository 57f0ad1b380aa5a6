use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{BaseKind, Cell, ExperimentSpec, Strategy};
use crate::air::AirReport;
use crate::channel::{Fingerprint, LinkConfig};
use crate::constellation::{
    amplitude_classes, mb_for_awgn_snr, mb_pmf, md_ball, write_constellation, Constellation4D, ENERGY_REL_TOL,
};
use crate::error::{Error, Result};
use crate::optimizer::{optimize_with, read_trace, Evaluator, FiberEvaluator, NdjsonSink, OptimizerTrace, TraceEvent};

pub const RESULTS_FILE: &str = "results.csv";
pub const AIR_LOG_FILE: &str = "air.ndjson";

/// One line of `results.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub strategy: Strategy,
    pub base: BaseKind,
    pub launch_power_dbm: f64,
    pub mi_bits_per_4d: f64,
    pub mi_se: f64,
    pub snr_eff_db: f64,
    pub papr: f64,
    pub entropy_bits: f64,
    pub nonzero_points: usize,
    pub nonzero_amplitudes: usize,
    pub lambda: Option<f64>,
    pub wall_time_s: f64,
    pub n_ball: Option<usize>,
    /// MI minus the uniform 64²QAM baseline; size studies only.
    pub gain: Option<f64>,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
    pub fingerprint: Fingerprint,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(cell: &Cell, fingerprint: Fingerprint, wall_time_s: f64, err: &Error) -> Self {
        Self {
            strategy: cell.strategy,
            base: cell.base,
            launch_power_dbm: cell.power_dbm,
            mi_bits_per_4d: f64::NAN,
            mi_se: f64::NAN,
            snr_eff_db: f64::NAN,
            papr: f64::NAN,
            entropy_bits: f64::NAN,
            nonzero_points: 0,
            nonzero_amplitudes: 0,
            lambda: None,
            wall_time_s,
            n_ball: cell.n_ball,
            gain: None,
            status: format!("failed: {err}"),
            fingerprint,
        }
    }
}

pub fn write_rows<W: std::io::Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(r: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn load_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    read_rows(File::open(path)?)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    /// Continue interrupted optimizer traces instead of restarting them.
    pub resume: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    /// Rows for the requested cells, in request order.
    pub rows: Vec<ResultRow>,
    /// Cells answered from an earlier run.
    pub reused: usize,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

/// A built constellation plus what it took to build it.
#[derive(Clone, Debug)]
pub struct Design {
    pub constellation: Constellation4D,
    pub lambda: Option<f64>,
    pub trace: Option<OptimizerTrace>,
}

fn link_at(spec: &ExperimentSpec, power_dbm: f64) -> LinkConfig {
    LinkConfig { total_launch_power: power_dbm, ..spec.link.clone() }
}

/// Builds the constellation a strategy would transmit at one power. Training
/// evaluations use the optimizer seed; `trace_path` receives the proposed
/// strategy's trace.
pub fn design(spec: &ExperimentSpec, cell: &Cell, trace_path: Option<&Path>, resume: bool) -> Result<Design> {
    let base = cell.base.build()?;
    let eval = FiberEvaluator::new(link_at(spec, cell.power_dbm));
    let train = |c: &Constellation4D| eval.evaluate(c, spec.optimizer.seed, spec.optimizer.eval_symbols);
    let plain = |constellation| Design { constellation, lambda: None, trace: None };
    match cell.strategy {
        Strategy::Uniform => Ok(plain(base)),
        Strategy::MdBall => {
            let n = cell.n_ball.ok_or_else(|| Error::InvalidConfig("md-ball needs n_ball".into()))?;
            Ok(plain(md_ball(&base, n)?))
        }
        Strategy::MbSnrMatched => {
            let snr = train(&base)?.snr_eff_db;
            let (c, lambda) = mb_for_awgn_snr(&base, snr)?;
            Ok(Design { constellation: c, lambda: Some(lambda), trace: None })
        }
        Strategy::MbBruteforce => {
            let score = |lambdas: Vec<f64>| -> Result<(f64, f64)> {
                let mis = lambdas
                    .par_iter()
                    .map(|&l| train(&mb_pmf(&base, l)?).map(|r| r.mi_bits_per_4d))
                    .collect::<Result<Vec<f64>>>()?;
                let mut best = (lambdas[0], mis[0]);
                for (&l, &m) in lambdas.iter().zip(&mis) {
                    if m > best.1 {
                        best = (l, m);
                    }
                }
                Ok(best)
            };
            let coarse = score(spec.lambda_grid.coarse())?;
            let mut fine = spec.lambda_grid.refine(coarse.0);
            fine.insert(0, coarse.0);
            let (lambda, _) = score(fine)?;
            Ok(Design { constellation: mb_pmf(&base, lambda)?, lambda: Some(lambda), trace: None })
        }
        Strategy::Proposed => {
            let prefix = match trace_path {
                Some(p) if resume && p.exists() => read_trace(p)?,
                _ => Vec::new(),
            };
            let prefix = completed_prefix(prefix);
            let mut sink = match trace_path {
                Some(p) => {
                    let mut s = NdjsonSink::new(File::create(p)?);
                    for ev in &prefix {
                        s.write(ev)?;
                    }
                    Some(s)
                }
                None => None,
            };
            let trace = optimize_with(&base, &eval, &spec.optimizer, Some(&prefix), &mut |ev| match &mut sink {
                Some(s) => s.write(ev),
                None => Ok(()),
            })?;
            if let Some(msg) = &trace.abort {
                return Err(Error::Evaluator(msg.clone()));
            }
            Ok(Design { constellation: trace.final_constellation.clone(), lambda: None, trace: Some(trace) })
        }
    }
}

// Everything up to the last finished epoch; a prefix without one restarts.
fn completed_prefix(mut events: Vec<TraceEvent>) -> Vec<TraceEvent> {
    if events.iter().any(|e| matches!(e, TraceEvent::Finish { .. } | TraceEvent::Abort { .. })) {
        events.retain(|e| !matches!(e, TraceEvent::Finish { .. } | TraceEvent::Abort { .. }));
    }
    match events.iter().rposition(|e| matches!(e, TraceEvent::EpochEnd(_))) {
        Some(i) => {
            events.truncate(i + 1);
            events
        }
        None => Vec::new(),
    }
}

#[derive(Serialize)]
struct AirLogLine<'a> {
    cell: &'a Cell,
    fingerprint: Fingerprint,
    report: &'a AirReport,
}

/// Designs and validates one cell.
pub fn run_cell(spec: &ExperimentSpec, cell: &Cell, resume: bool) -> Result<ResultRow> {
    let started = Instant::now();
    let fingerprint = spec.cell_fingerprint(cell);
    let dir = &spec.output_dir;
    let trace_path = dir.join(format!("trace-{}.ndjson", cell.stem()));
    let d = design(spec, cell, (cell.strategy == Strategy::Proposed).then_some(trace_path.as_path()), resume)?;
    if let Some(t) = &d.trace {
        if t.seeds().contains(&spec.validation_seed) {
            return Err(Error::InvalidConfig(format!(
                "validation seed {} was used for training",
                spec.validation_seed
            )));
        }
    }
    let c = d.constellation.with_name(format!("{} {}", cell.strategy.name(), cell.base.name()));
    write_constellation(dir.join(format!("{}.json", cell.stem())), &c)?;
    let eval = FiberEvaluator::new(link_at(spec, cell.power_dbm));
    let report = eval.evaluate(&c, spec.validation_seed, spec.validation_symbols())?;
    let line = serde_json::to_string(&AirLogLine { cell, fingerprint, report: &report }).expect("serializable");
    {
        use std::io::Write;
        let mut f = OpenOptions::new().create(true).append(true).open(dir.join(AIR_LOG_FILE))?;
        writeln!(f, "{line}")?;
    }
    Ok(ResultRow {
        strategy: cell.strategy,
        base: cell.base,
        launch_power_dbm: cell.power_dbm,
        mi_bits_per_4d: report.mi_bits_per_4d,
        mi_se: report.mi_se,
        snr_eff_db: report.snr_eff_db,
        papr: report.papr,
        entropy_bits: report.entropy_bits,
        nonzero_points: c.support_size(),
        nonzero_amplitudes: amplitude_classes(&c, ENERGY_REL_TOL).nonzero_classes(),
        lambda: d.lambda,
        wall_time_s: started.elapsed().as_secs_f64(),
        n_ball: cell.n_ball,
        gain: None,
        status: "ok".into(),
        fingerprint,
    })
}

/// Single writer for `results.csv`; every row is flushed as it lands.
struct Table {
    out: csv::Writer<File>,
}

impl Table {
    /// Opens the table, keeping only completed rows of earlier runs.
    fn open(path: &Path) -> Result<(Self, Vec<ResultRow>)> {
        let previous = if path.exists() { load_rows(path)? } else { Vec::new() };
        let kept: Vec<ResultRow> = previous.into_iter().filter(ResultRow::is_ok).collect();
        let mut out = csv::Writer::from_writer(File::create(path)?);
        for r in &kept {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok((Self { out }, kept))
    }

    fn push(&mut self, row: &ResultRow) -> Result<()> {
        self.out.serialize(row)?;
        self.out.flush()?;
        Ok(())
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn run_cells(
    spec: &ExperimentSpec,
    cells: &[Cell],
    opts: RunOptions,
    finish: &(dyn Fn(ResultRow) -> ResultRow + Sync),
) -> Result<SweepOutcome> {
    std::fs::create_dir_all(&spec.output_dir)?;
    let (table, done) = Table::open(&spec.output_dir.join(RESULTS_FILE))?;
    let table = Mutex::new(table);
    let jobs: Vec<(Cell, Fingerprint, Option<ResultRow>)> = cells
        .iter()
        .map(|c| {
            let fp = spec.cell_fingerprint(c);
            (*c, fp, done.iter().find(|r| r.fingerprint == fp).cloned())
        })
        .collect();
    let reused = jobs.iter().filter(|j| j.2.is_some()).count();
    let rows = pool(opts.workers)?.install(|| {
        jobs.into_par_iter()
            .map(|(cell, fp, prev)| -> Result<ResultRow> {
                if let Some(r) = prev {
                    log::info!("{}: reusing completed row", cell.stem());
                    return Ok(r);
                }
                let started = Instant::now();
                let row = match run_cell(spec, &cell, opts.resume) {
                    Ok(r) => finish(r),
                    Err(e) => {
                        log::warn!("{}: {e}", cell.stem());
                        ResultRow::failed(&cell, fp, started.elapsed().as_secs_f64(), &e)
                    }
                };
                table.lock().expect("table lock").push(&row)?;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepOutcome { rows, reused })
}

/// One row per power of the spec's strategy, appended to `results.csv`.
pub fn run_power_sweep(spec: &ExperimentSpec, opts: RunOptions) -> Result<SweepOutcome> {
    spec.validate()?;
    run_cells(spec, &spec.sweep_cells(), opts, &|r| r)
}

/// MD-ball sizes at the first sweep power, each with its gain over uniform
/// 64²QAM at the same power and validation seed. The baseline row comes first.
pub fn run_size_study(spec: &ExperimentSpec, sizes: &[usize], opts: RunOptions) -> Result<SweepOutcome> {
    spec.validate()?;
    if spec.strategy != Strategy::MdBall {
        return Err(Error::InvalidConfig("a size study needs strategy md-ball".into()));
    }
    if sizes.is_empty() || sizes.iter().any(|&n| !(1..=65536).contains(&n)) {
        return Err(Error::InvalidConfig("sizes must be nonempty and within [1, 65536]".into()));
    }
    let power_dbm = spec.power_sweep[0];
    let baseline_cell = Cell { strategy: Strategy::Uniform, base: BaseKind::Qam64Sq, power_dbm, n_ball: None };
    let zero = |mut r: ResultRow| {
        r.gain = Some(0.0);
        r
    };
    let mut out = run_cells(spec, &[baseline_cell], opts, &zero)?;
    let baseline = out.rows[0].clone();
    if !baseline.is_ok() {
        return Err(Error::Evaluator(format!("baseline failed: {}", baseline.status)));
    }
    let cells: Vec<Cell> = sizes
        .iter()
        .map(|&n| Cell { strategy: Strategy::MdBall, base: spec.base, power_dbm, n_ball: Some(n) })
        .collect();
    let with_gain = |mut r: ResultRow| {
        r.gain = Some(r.mi_bits_per_4d - baseline.mi_bits_per_4d);
        r
    };
    let rest = run_cells(spec, &cells, opts, &with_gain)?;
    out.rows.extend(rest.rows);
    out.reused += rest.reused;
    Ok(out)
}

/// Optimizes at the first sweep power, writing `trace.ndjson` next to `out`.
pub fn run_optimize(spec: &ExperimentSpec, out: &Path, resume: bool) -> Result<(Constellation4D, OptimizerTrace)> {
    spec.validate()?;
    let cell = Cell { strategy: Strategy::Proposed, base: spec.base, power_dbm: spec.power_sweep[0], n_ball: None };
    let dir: PathBuf = out.parent().filter(|p| !p.as_os_str().is_empty()).map_or_else(|| ".".into(), Path::to_path_buf);
    std::fs::create_dir_all(&dir)?;
    let d = design(spec, &cell, Some(&dir.join("trace.ndjson")), resume)?;
    let trace = d.trace.expect("proposed designs carry a trace");
    write_constellation(out, &trace.final_constellation)?;
    Ok((trace.final_constellation.clone(), trace))
}
