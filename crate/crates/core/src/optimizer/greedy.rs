//! Greedy per-amplitude search over (class probability, class scale).

use rayon::prelude::*;

use super::trace::{ClassParams, EpochRecord, OptimizerTrace, StepRecord, TraceEvent};
use super::{Evaluator, OptimizerConfig, SweepOrder};
use crate::air::AirReport;
use crate::constellation::{amplitude_classes, apply_class_state, AmplitudeClassSet, Constellation4D, ENERGY_REL_TOL};
use crate::error::{Error, Result};
use crate::numeric::jackknife_se;

/// Class state after scaling class `k`'s probability by `prob_factor` and its
/// radius by `scale_factor`. The other classes share the remaining mass in
/// proportion to their current probabilities.
///
/// Returns `None` for candidates that would zero every class or that cannot
/// change anything (pruning an already pruned class).
pub fn candidate_state(
    state: &AmplitudeClassSet,
    k: usize,
    prob_factor: f64,
    scale_factor: f64,
) -> Option<AmplitudeClassSet> {
    let cur = &state.classes[k];
    let p = cur.probability;
    let others: f64 = crate::numeric::ksum(
        state
            .classes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, c)| c.probability),
    );
    if p == 0.0 && prob_factor == 0.0 {
        return None;
    }
    if p > 0.0 && prob_factor == 1.0 && scale_factor == 1.0 {
        return Some(state.clone());
    }
    let mut target = if p > 0.0 { p * prob_factor } else { cur.shadow_probability * prob_factor };
    if others <= 0.0 {
        if prob_factor == 0.0 {
            return None;
        }
        target = p;
    }
    let target = target.min(1.0);
    let ratio = if others > 0.0 { (1.0 - target) / others } else { 0.0 };

    let mut next = state.clone();
    for (j, c) in next.classes.iter_mut().enumerate() {
        let new_p = if j == k { target } else { c.probability * ratio };
        if new_p == 0.0 && c.probability > 0.0 {
            c.shadow_probability = c.probability;
        } else if new_p > 0.0 {
            c.shadow_probability = new_p;
        }
        c.probability = new_p;
    }
    next.classes[k].scale *= scale_factor;
    Some(next)
}

/// MI of one grid candidate; `Ok(None)` for skipped candidates.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_candidate(
    state: &AmplitudeClassSet,
    class_id: usize,
    prob_factor: f64,
    scale_factor: f64,
    base: &Constellation4D,
    evaluator: &dyn Evaluator,
    seed: u64,
    n_symbols: usize,
) -> Result<Option<AirReport>> {
    if class_id >= state.len() {
        return Err(Error::InvalidArgument(format!("class {class_id} out of range")));
    }
    match candidate_state(state, class_id, prob_factor, scale_factor) {
        None => Ok(None),
        Some(next) => {
            let c = apply_class_state(base, &next)?;
            evaluator.evaluate(&c, seed, n_symbols).map(Some)
        }
    }
}

/// Standard error of `a - b`, paired over sub-batches when both share a seed.
pub(crate) fn difference_se(a: &AirReport, b: &AirReport) -> f64 {
    if a.seed == b.seed && a.group_means.len() == b.group_means.len() && a.group_means.len() > 1 {
        let d: Vec<f64> = a.group_means.iter().zip(&b.group_means).map(|(x, y)| x - y).collect();
        jackknife_se(&d)
    } else {
        a.mi_se.hypot(b.mi_se)
    }
}

fn params(state: &AmplitudeClassSet) -> Vec<ClassParams> {
    state
        .classes
        .iter()
        .map(|c| ClassParams {
            probability: c.probability,
            scale: c.scale,
            shadow_probability: c.shadow_probability,
        })
        .collect()
}

/// Runs the greedy search without streaming or resume.
pub fn optimize(base: &Constellation4D, evaluator: &dyn Evaluator, cfg: &OptimizerConfig) -> Result<OptimizerTrace> {
    optimize_with(base, evaluator, cfg, None, &mut |_| Ok(()))
}

struct Run<'a> {
    base: &'a Constellation4D,
    evaluator: &'a dyn Evaluator,
    cfg: &'a OptimizerConfig,
    evaluations: u64,
}

impl Run<'_> {
    fn next_seed(&mut self) -> u64 {
        let s = self.cfg.evaluation_seed(self.evaluations);
        self.evaluations += 1;
        s
    }
}

/// Greedy search with every record passed to `sink` as it is produced.
///
/// `resume` is a trace prefix from an interrupted run with the same base and
/// config; the search continues after its last completed epoch.
pub fn optimize_with(
    base: &Constellation4D,
    evaluator: &dyn Evaluator,
    cfg: &OptimizerConfig,
    resume: Option<&[TraceEvent]>,
    sink: &mut dyn FnMut(&TraceEvent) -> Result<()>,
) -> Result<OptimizerTrace> {
    cfg.validate()?;
    let mut state = amplitude_classes(base, ENERGY_REL_TOL);
    let mut run = Run { base, evaluator, cfg, evaluations: 0 };
    let mut steps = Vec::new();
    let mut epochs: Vec<EpochRecord> = Vec::new();
    let initial;
    let mut incumbent;

    match resume.filter(|r| !r.is_empty()) {
        Some(prefix) => {
            let TraceEvent::Start { n_classes, config, initial: init, .. } = &prefix[0] else {
                return Err(Error::InvalidConfig("resume trace does not begin with a start record".into()));
            };
            if *n_classes != state.len() || config != cfg {
                return Err(Error::InvalidConfig("resume trace was produced by a different base or config".into()));
            }
            initial = init.clone();
            incumbent = init.clone();
            for ev in prefix {
                match ev {
                    TraceEvent::Step(s) => steps.push(s.clone()),
                    TraceEvent::EpochEnd(e) => epochs.push(e.clone()),
                    _ => {}
                }
            }
            // Only whole epochs are kept.
            let done = epochs.last().map_or(0, |e| e.epoch);
            steps.retain(|s| s.epoch <= done);
            if let Some(last) = epochs.last() {
                for (c, p) in state.classes.iter_mut().zip(&last.classes) {
                    c.probability = p.probability;
                    c.scale = p.scale;
                    c.shadow_probability = p.shadow_probability;
                }
                incumbent = last.incumbent.clone();
                run.evaluations = last.evaluations;
            } else {
                run.evaluations = 1;
            }
            log::info!("resuming after epoch {done}");
        }
        None => {
            let seed = run.next_seed();
            let start = apply_class_state(base, &state)?;
            initial = evaluator.evaluate(&start, seed, cfg.eval_symbols)?;
            incumbent = initial.clone();
            sink(&TraceEvent::Start {
                base: base.metadata().name.clone(),
                n_classes: state.len(),
                config: cfg.clone(),
                initial: initial.clone(),
            })?;
        }
    }

    let mut epoch_mi: Vec<f64> = epochs.iter().map(|e| e.mi).collect();
    let mut converged = {
        let prev = if epoch_mi.len() >= 2 { epoch_mi[epoch_mi.len() - 2] } else { initial.mi_bits_per_4d };
        epoch_mi.last().is_some_and(|m| m - prev < cfg.epoch_improvement_tol)
    };
    let mut abort = None;
    let first_epoch = epochs.len() + 1;

    let n_prob = cfg.prob_grid.len();
    let n_scale = cfg.scale_grid.len();
    let grid: Vec<(f64, f64)> = (0..n_prob * n_scale)
        .map(|g| (cfg.prob_grid[g / n_scale], cfg.scale_grid[g % n_scale]))
        .collect();
    let order: Vec<usize> = match cfg.sweep_order {
        SweepOrder::AscendingEnergy => (0..state.len()).collect(),
        SweepOrder::DescendingEnergy => (0..state.len()).rev().collect(),
    };

    'epochs: for epoch in first_epoch..=cfg.max_epochs {
        if converged {
            break;
        }
        let start_mi = incumbent.mi_bits_per_4d;
        for &k in &order {
            let pruned = state.classes[k].is_pruned();
            let jobs: Vec<(usize, AmplitudeClassSet, u64)> = grid
                .iter()
                .enumerate()
                .filter(|(_, &(pf, sf))| pruned || pf != 1.0 || sf != 1.0)
                .filter_map(|(g, &(pf, sf))| candidate_state(&state, k, pf, sf).map(|s| (g, s)))
                .map(|(g, s)| (g, s, run.next_seed()))
                .collect();
            let results: Vec<Result<AirReport>> = jobs
                .par_iter()
                .map(|(_, s, seed)| {
                    let c = apply_class_state(run.base, s)?;
                    run.evaluator.evaluate(&c, *seed, run.cfg.eval_symbols)
                })
                .collect();

            let mut best: Option<(usize, f64)> = None;
            let mut evaluated = Vec::with_capacity(jobs.len());
            for ((g, _, seed), r) in jobs.iter().zip(results) {
                match r {
                    Ok(rep) => {
                        if best.is_none_or(|(_, m)| rep.mi_bits_per_4d > m) {
                            best = Some((evaluated.len(), rep.mi_bits_per_4d));
                        }
                        evaluated.push((*g, *seed, rep));
                    }
                    Err(e) => {
                        let message = e.to_string();
                        sink(&TraceEvent::Abort { epoch, class: k, message: message.clone() })?;
                        abort = Some(message);
                        break 'epochs;
                    }
                }
            }
            let accept = best.and_then(|(i, m)| {
                let margin = (cfg.epoch_improvement_tol / 10.0).max(difference_se(&evaluated[i].2, &incumbent));
                (m > incumbent.mi_bits_per_4d + margin).then_some(i)
            });
            for (i, (g, seed, rep)) in evaluated.iter().enumerate() {
                let (pf, sf) = grid[*g];
                let rec = StepRecord {
                    epoch,
                    class: k,
                    prob_factor: pf,
                    scale_factor: sf,
                    mi: rep.mi_bits_per_4d,
                    se: rep.mi_se,
                    seed: *seed,
                    accepted: accept == Some(i),
                };
                sink(&TraceEvent::Step(rec.clone()))?;
                steps.push(rec);
            }
            if let Some(i) = accept {
                let idx = jobs.iter().position(|(g, _, _)| *g == evaluated[i].0).expect("evaluated job");
                state = jobs[idx].1.clone();
                incumbent = evaluated[i].2.clone();
                log::debug!(
                    "epoch {epoch} class {k}: accepted {:?}, MI {:.4}",
                    grid[evaluated[i].0],
                    incumbent.mi_bits_per_4d
                );
            }
        }
        let rec = EpochRecord {
            epoch,
            mi: incumbent.mi_bits_per_4d,
            classes: params(&state),
            incumbent: incumbent.clone(),
            evaluations: run.evaluations,
        };
        log::info!(
            "epoch {epoch}: MI {:.4} bits/4D, {} classes, {} points",
            rec.mi,
            state.nonzero_classes(),
            state.nonzero_points()
        );
        sink(&TraceEvent::EpochEnd(rec.clone()))?;
        epochs.push(rec);
        epoch_mi.push(incumbent.mi_bits_per_4d);
        converged = incumbent.mi_bits_per_4d - start_mi < cfg.epoch_improvement_tol;
    }

    let final_constellation = apply_class_state(base, &state)?.with_name(format!("{} greedy", base.metadata().base));
    let trace = OptimizerTrace {
        initial,
        steps,
        epochs,
        epoch_mi,
        nonzero_classes: state.nonzero_classes(),
        nonzero_points: state.nonzero_points(),
        final_state: state,
        final_constellation,
        final_report: incumbent,
        converged,
        evaluations: run.evaluations,
        abort,
    };
    if trace.abort.is_none() {
        sink(&TraceEvent::Finish {
            epochs: trace.epochs.len(),
            converged: trace.converged,
            mi: trace.final_report.mi_bits_per_4d,
            nonzero_classes: trace.nonzero_classes,
            nonzero_points: trace.nonzero_points,
        })?;
    }
    Ok(trace)
}
